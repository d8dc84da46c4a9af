// stancelab: run, search, report and ablate stance-detection experiments.

#include "stancelab/error.hpp"
#include "stancelab/netgraph.hpp"
#include "stancelab/pipeline.hpp"
#include "stancelab/report.hpp"
#include "stancelab/search.hpp"
#include "stancelab/skipgram.hpp"
#include "stancelab/synthetic.hpp"
#include "stancelab/walks.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace sl = stancelab;

namespace {

void print_summary(const sl::RunResult& r, const std::filesystem::path& saved) {
  std::printf("%s  eval_f_avg=%.4f", r.run_id.c_str(), r.eval_f_avg());
  if (auto v = r.t80_test_f_avg()) std::printf("  t80=%.4f", *v);
  if (auto v = r.t100_test_f_avg()) std::printf("  t100=%.4f", *v);
  std::printf("  acc=%.4f  %.1fs  %s\n  -> %s\n", r.accuracy(), r.total_seconds, sl::format_settings(r.config).c_str(),
              saved.string().c_str());
}

void save_outputs(const sl::RunResult& r, const std::filesystem::path& out) {
  const auto saved = sl::save_run_result(r, out);
  if (!r.test_predictions.empty()) {
    sl::save_predictions(out / (r.run_id + ".predictions.csv"), r.test_ids, r.test_predictions);
  }
  print_summary(r, saved);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stancelab: multi-view stance detection experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one configuration");
  std::string run_config, data_dir, out_dir = "results";
  bool t100 = false;
  std::optional<std::uint64_t> seed_override, split_seed_override;
  run->add_option("--config", run_config, "JSON config file or settings string")->required();
  run->add_option("--data", data_dir, "Data directory (train.csv, test.csv, relations.csv, embeddings/)")->required();
  run->add_option("--out", out_dir, "Directory for run results");
  run->add_flag("--t100", t100, "Also retrain on all training data and score the test set");
  run->add_option("--seed", seed_override, "Override the model seed");
  run->add_option("--split-seed", split_seed_override, "Override the split seed");

  // search
  auto* search = app.add_subcommand("search", "Sample and run random configurations");
  std::string space_path;
  std::size_t n_runs = 10;
  std::uint64_t search_seed = 0;
  bool dry_run = false;
  search->add_option("--space", space_path, "Search space JSON")->required()->check(CLI::ExistingFile);
  search->add_option("--n", n_runs, "Number of sampled runs");
  search->add_option("--seed", search_seed, "Sampling seed");
  search->add_option("--data", data_dir, "Data directory");
  search->add_option("--out", out_dir, "Directory for run results");
  search->add_flag("--dry-run", dry_run, "Print the sampled settings without running");

  // report
  auto* report = app.add_subcommand("report", "Tabulate saved run results");
  std::string in_dir, format = "markdown", report_out;
  double baseline = sl::BaselineConstants::task_b;
  report->add_option("--in", in_dir, "Directory of run result JSON files")->required();
  report->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  report->add_option("--baseline", baseline, "Baseline f-avg for the appended row");
  report->add_option("--out", report_out, "Write to a file instead of stdout");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run a configuration with and without one block");
  std::string toggle;
  ablate->add_option("--config", run_config, "JSON config file or settings string")->required();
  ablate->add_option("--toggle", toggle, "Block to toggle")->required()->check(CLI::IsMember({"graph", "sv", "freq"}));
  ablate->add_option("--data", data_dir, "Data directory")->required();
  ablate->add_option("--out", out_dir, "Directory for run results");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic homophily data directory");
  sl::SyntheticSpec spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->add_option("--users", spec.users, "Number of users");
  synth->add_option("--train", spec.train_tweets, "Training tweets");
  synth->add_option("--test", spec.test_tweets, "Test tweets");
  synth->add_option("--lexical-signal", spec.lexical_signal, "Probability of a label cue word");
  synth->add_option("--community-label-prob", spec.community_label_prob, "P(label = community stance)");

  // graph
  auto* graph = app.add_subcommand("graph", "Build the interaction graph and export an edge list");
  std::string relations_path, edges_out;
  bool any_relation = false;
  graph->add_option("--relations", relations_path, "relations.csv")->required()->check(CLI::ExistingFile);
  graph->add_option("--out", edges_out, "Edge list output (src dst weight)");
  graph->add_flag("--no-require-friendship", any_relation, "Keep pairs without a friend relation");

  // walks
  auto* walks = app.add_subcommand("walks", "Generate random walks with the reference walker");
  sl::WalkConfig wcfg;
  std::string graph_path, walks_out, strategy = "deepwalk";
  walks->add_option("--graph", graph_path, "Edge list (src dst weight)")->required()->check(CLI::ExistingFile);
  walks->add_option("--out", walks_out, "Walk file output")->required();
  walks->add_option("--walks", wcfg.walks_per_node, "Walks per node");
  walks->add_option("--length", wcfg.walk_length, "Walk length");
  walks->add_option("--strategy", strategy, "deepwalk, node2vec or struc2vec");
  walks->add_option("--p", wcfg.p, "node2vec return parameter");
  walks->add_option("--q", wcfg.q, "node2vec in-out parameter");
  walks->add_option("--seed", wcfg.seed, "Seed");

  // validate-walks
  auto* validate = app.add_subcommand("validate-walks", "Check a walk file against a graph");
  std::string walk_file;
  std::size_t max_length = 80;
  bool no_edge_check = false;
  validate->add_option("--graph", graph_path, "Edge list (src dst weight)")->required()->check(CLI::ExistingFile);
  validate->add_option("--walks", walk_file, "Walk file")->required()->check(CLI::ExistingFile);
  validate->add_option("--length", max_length, "Maximum walk length");
  validate->add_flag("--no-edge-check", no_edge_check, "Only check the grammar and node ids");

  // node-embed
  auto* node_embed = app.add_subcommand("node-embed", "Train skip-gram user vectors from a walk file");
  sl::SkipGramConfig scfg;
  std::string embed_walks, embed_out;
  node_embed->add_option("--walks", embed_walks, "Walk file (one walk per line)")->required()->check(CLI::ExistingFile);
  node_embed->add_option("--out", embed_out, "word2vec text output keyed by node id")->required();
  node_embed->add_option("--dim", scfg.dim, "Vector size");
  node_embed->add_option("--window", scfg.window, "Context window");
  node_embed->add_option("--negatives", scfg.negatives, "Negative samples per pair");
  node_embed->add_option("--epochs", scfg.epochs, "Passes over the walks");
  node_embed->add_option("--seed", scfg.seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = sl::load_run_config(run_config);
      if (t100) cfg.run_t100 = true;
      if (seed_override) cfg.seed = *seed_override;
      if (split_seed_override) cfg.split_seed = *split_seed_override;
      const auto res = sl::Resources::from_directory(data_dir);
      save_outputs(sl::run(cfg, res), out_dir);
    } else if (*search) {
      const auto space = sl::load_config_space(space_path);
      std::vector<sl::RunConfig> configs;
      for (std::size_t i = 0; i < n_runs; ++i) {
        auto cfg = sl::sample_config(space, search_seed + i);
        cfg.seed = search_seed + i;
        configs.push_back(cfg);
      }
      if (dry_run) {
        for (const auto& c : configs) std::printf("%s\n", sl::format_settings(c).c_str());
        return 0;
      }
      if (data_dir.empty()) throw sl::Error("search: --data is required unless --dry-run is given");
      const auto res = sl::Resources::from_directory(data_dir);
      int failures = 0;
      for (const auto& o : sl::run_many(configs, res, sl::thread_budget())) {
        if (o.result) {
          save_outputs(*o.result, out_dir);
        } else {
          ++failures;
          std::fprintf(stderr, "run failed: %s\n", o.error.c_str());
        }
      }
      return failures == 0 ? 0 : 1;
    } else if (*report) {
      const auto rep = sl::build_report(sl::load_run_results(in_dir), baseline);
      const auto text = sl::render_report(rep, sl::parse_report_format(format));
      if (report_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(report_out) << text;
      }
    } else if (*ablate) {
      const auto cfg = sl::load_run_config(run_config);
      const auto res = sl::Resources::from_directory(data_dir);
      const auto r = sl::ablate(cfg, sl::parse_ablation_toggle(toggle), res);
      save_outputs(r.with_block, out_dir);
      save_outputs(r.without_block, out_dir);
      std::printf("toggle %s: eval f-avg delta %+.4f", std::string(sl::to_string(r.toggle)).c_str(), r.eval_delta());
      if (auto d = r.test_delta()) std::printf(", test f-avg delta %+.4f", *d);
      std::printf("\n");
    } else if (*synth) {
      sl::write_dataset(sl::make_homophily_corpus(spec), synth_out);
      std::printf("wrote %s\n", synth_out.c_str());
    } else if (*graph) {
      sl::BuildDiagnostics diag;
      const auto g = sl::build_graph(sl::load_relations(relations_path), !any_relation, &diag);
      const auto st = sl::graph_stats(g);
      std::printf("{\"nodes\": %zu, \"edges\": %zu, \"avg_in_degree\": %.4f, \"avg_out_degree\": %.4f, "
                  "\"self_loops_dropped\": %zu, \"without_friendship_dropped\": %zu}\n",
                  st.node_count, st.edge_count, st.avg_in_degree, st.avg_out_degree, diag.self_loops_dropped,
                  diag.unconditioned_dropped);
      if (!edges_out.empty()) sl::export_edge_list(g, edges_out);
    } else if (*walks) {
      wcfg.strategy = sl::parse_walk_strategy(strategy);
      const auto g = sl::load_edge_list(graph_path);
      sl::save_walks(sl::generate_walks(g, wcfg), walks_out);
    } else if (*node_embed) {
      const auto res = sl::train_skipgram(sl::load_walks(embed_walks), scfg);
      sl::save_embeddings(res.embedding.table(), embed_out);
      std::printf("%zu nodes, dim %zu, final loss %.6f\n", res.embedding.size(), res.embedding.dim(),
                  res.history.epoch_loss.empty() ? 0.0 : res.history.epoch_loss.back());
    } else if (*validate) {
      const auto g = sl::load_edge_list(graph_path);
      const auto rep = sl::validate_walk_file(walk_file, g, max_length, !no_edge_check);
      for (const auto& e : rep.errors) std::fprintf(stderr, "%s\n", e.c_str());
      std::printf("%zu lines, %zu errors\n", rep.lines, rep.errors.size());
      return rep.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stancelab: %s\n", e.what());
    return 1;
  }
  return 0;
}
