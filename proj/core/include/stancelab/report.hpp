#pragma once

#include "stancelab/metrics.hpp"
#include "stancelab/pipeline.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stancelab {

enum class ReportFormat { Csv, Markdown };
ReportFormat parse_report_format(std::string_view s);

struct ReportRow {
  std::string rank;  // "1", "2", ... or "baseline"
  std::optional<double> eval_f_avg;
  std::optional<double> t80;
  std::optional<double> t100;
  std::string settings;
};

struct Report {
  std::vector<ReportRow> rows;  // data rows sorted, baseline last
};

// Sorted by test f-avg (T%100, else T%80, else eval) descending; the
// baseline row carries `baseline` in both test columns.
Report build_report(const std::vector<RunResult>& results, double baseline = BaselineConstants::task_b);

// CSV: rank,eval_f_avg,t80,t100,settings with 6 decimals (empty = absent).
// Markdown: | # | Eval f-avg | T%80 | T%100 | Settings |.
std::string render_report(const Report& report, ReportFormat format);
Report load_report_csv(std::string_view text);

}  // namespace stancelab
