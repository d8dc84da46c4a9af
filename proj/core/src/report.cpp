#include "stancelab/report.hpp"

#include "stancelab/csv.hpp"
#include "stancelab/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace stancelab {

namespace {

std::string fmt(const std::optional<double>& v, int decimals) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

std::optional<double> parse_metric(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error("");
    return v;
  } catch (const std::exception&) {
    throw Error("report CSV: bad metric \"" + s + "\"");
  }
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw Error("unknown report format \"" + std::string(s) + "\" (valid: csv, markdown)");
}

Report build_report(const std::vector<RunResult>& results, double baseline) {
  if (results.empty()) throw Error("report: no run results");
  std::vector<const RunResult*> sorted;
  for (const auto& r : results) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RunResult* a, const RunResult* b) {
    if (a->ranking_score() != b->ranking_score()) return a->ranking_score() > b->ranking_score();
    return a->run_id < b->run_id;
  });
  Report rep;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& r = *sorted[i];
    rep.rows.push_back({std::to_string(i + 1), r.eval_f_avg(), r.t80_test_f_avg(), r.t100_test_f_avg(),
                        format_settings(r.config)});
  }
  rep.rows.push_back({"baseline", std::nullopt, baseline, baseline, "Baseline"});
  return rep;
}

std::string render_report(const Report& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "rank,eval_f_avg,t80,t100,settings\n";
    for (const auto& r : report.rows) {
      out << csv::join({r.rank, fmt(r.eval_f_avg, 6), fmt(r.t80, 6), fmt(r.t100, 6), r.settings}) << '\n';
    }
    return out.str();
  }
  out << "| # | Eval f-avg | T%80 | T%100 | Settings |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : report.rows) {
    std::string settings = r.settings;
    // A literal pipe would split the cell.
    for (std::size_t p = settings.find('|'); p != std::string::npos; p = settings.find('|', p + 2)) {
      settings.replace(p, 1, "\\|");
    }
    out << "| " << r.rank << " | " << fmt(r.eval_f_avg, 3) << " | " << fmt(r.t80, 3) << " | " << fmt(r.t100, 3)
        << " | " << settings << " |\n";
  }
  return out.str();
}

Report load_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  csv::Reader reader(in);
  csv::Record rec;
  if (!reader.next(rec) || rec.fields != std::vector<std::string>{"rank", "eval_f_avg", "t80", "t100", "settings"}) {
    throw Error("report CSV: expected header rank,eval_f_avg,t80,t100,settings");
  }
  Report rep;
  while (reader.next(rec)) {
    if (rec.fields.size() != 5) throw Error("report CSV line " + std::to_string(rec.line) + ": expected 5 fields");
    rep.rows.push_back({rec.fields[0], parse_metric(rec.fields[1]), parse_metric(rec.fields[2]),
                        parse_metric(rec.fields[3]), rec.fields[4]});
  }
  return rep;
}

}  // namespace stancelab
