// Command-line front end: dataset generation, training, single-matrix
// ordering and fill-in benchmarking.

#include <glob.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpo/gpo.hpp"

namespace {

std::vector<std::string> expand_globs(std::vector<std::string> const& patterns)
{
  std::vector<std::string> out;
  for (auto const& pat : patterns) {
    glob_t g{};
    int const rc = ::glob(pat.c_str(), GLOB_NOCHECK, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) {
        out.emplace_back(g.gl_pathv[i]);
      }
    }
    ::globfree(&g);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<gpo::Method> parse_methods(std::vector<std::string> const& names)
{
  std::vector<gpo::Method> out;
  for (auto const& item : names) {
    std::stringstream ss(item);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) {
        out.push_back(gpo::method_from_string(name));
      }
    }
  }
  return out;
}

int run_gen(int count, int n_min, int n_max, std::uint64_t seed, std::string const& out_dir)
{
  std::mt19937_64 rng(seed);
  auto const graphs = gpo::generate_training_set(count, n_min, n_max, rng);
  gpo::write_dataset(out_dir, graphs);
  std::cout << "wrote " << graphs.size() << " graphs to " << out_dir << '\n';
  return 0;
}

int run_train(std::string const& data_dir, gpo::TrainerConfig const& cfg, std::string const& out,
              std::string const& log_path)
{
  auto const graphs = gpo::read_dataset(data_dir);
  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) {
      std::cerr << "cannot open log " << log_path << '\n';
      return 1;
    }
  }
  auto const result = gpo::train(graphs, cfg, [&](gpo::TrainLogEntry const& e) {
    if (log_file.is_open()) {
      gpo::write_log_entry(log_file, e);
    }
  });
  std::ofstream ckpt(out);
  if (!ckpt) {
    std::cerr << "cannot write model " << out << '\n';
    return 1;
  }
  gpo::save_checkpoint(ckpt, result.net);
  auto const means = gpo::mean_fill_per_epoch(result.log);
  for (std::size_t e = 0; e < means.size(); ++e) {
    std::cout << "epoch " << (e + 1) << " mean fill " << means[e] << '\n';
  }
  return 0;
}

int run_order(std::string const& matrix, std::string const& method_name,
              std::string const& model, std::uint64_t seed, std::string const& out)
{
  std::ifstream in(matrix);
  if (!in) {
    std::cerr << "cannot open " << matrix << '\n';
    return 1;
  }
  auto const pattern = gpo::load_matrix_market(in);
  auto const method = gpo::method_from_string(method_name);
  std::optional<gpo::PolicyValueNet> net;
  if (method == gpo::Method::gpo) {
    if (model.empty()) {
      std::cerr << "method gpo requires --model\n";
      return 1;
    }
    std::ifstream min(model);
    if (!min) {
      std::cerr << "cannot open model " << model << '\n';
      return 1;
    }
    net = gpo::load_checkpoint(min);
  }
  std::mt19937_64 rng(seed);
  auto const ord = gpo::compute_ordering(method, pattern, net ? &*net : nullptr, rng);
  std::ofstream os(out);
  if (!os) {
    std::cerr << "cannot write " << out << '\n';
    return 1;
  }
  gpo::write_ordering(os, ord);
  std::cout << "fir " << gpo::fill_in_ratio(pattern, ord) << '\n';
  return 0;
}

int run_bench(std::vector<std::string> const& patterns, std::vector<std::string> const& method_names,
              std::string const& model, std::uint64_t seed, std::string const& out)
{
  auto const files = expand_globs(patterns);
  if (files.empty()) {
    std::cerr << "no matrices matched\n";
    return 1;
  }
  auto const methods = parse_methods(method_names);
  if (methods.empty()) {
    std::cerr << "no methods given\n";
    return 1;
  }
  auto const report = gpo::run_benchmark(files, methods,
                                         model.empty() ? std::nullopt : std::optional<std::string>(model),
                                         seed);
  std::ofstream os(out);
  if (!os) {
    std::cerr << "cannot write " << out << '\n';
    return 1;
  }
  gpo::write_report_csv(os, report);
  for (auto const& s : report.summary) {
    std::cout << s.method << " mean FIR " << s.mean_fir << " over " << s.count << " matrices\n";
  }
  auto const errors = report.error_count();
  if (errors == 0) {
    return 0;
  }
  std::cerr << errors << " of " << report.rows.size() << " cells failed\n";
  return errors == report.rows.size() ? 1 : 2;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Fill-reducing sparse matrix ordering with a learned graph policy"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate Delaunay training graphs");
  int count = 200, n_min = 60, n_max = 200;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--count", count, "Number of graphs")->check(CLI::PositiveNumber);
  gen->add_option("--min", n_min, "Smallest node count");
  gen->add_option("--max", n_max, "Largest node count");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train the policy on a generated dataset");
  std::string data_dir, model_out, backbone = "mixhop", reward = "asr", log_path;
  gpo::TrainerConfig cfg;
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--epochs", cfg.epochs, "Passes over the dataset");
  train->add_option("--seed", cfg.seed, "RNG seed");
  train->add_option("--out", model_out, "Checkpoint to write")->required();
  train->add_option("--backbone", backbone, "mixhop|singlehop")
      ->check(CLI::IsMember({"mixhop", "singlehop"}));
  train->add_option("--reward", reward, "asr|raw")->check(CLI::IsMember({"asr", "raw"}));
  train->add_option("--log", log_path, "Training log (epoch,graph_id,total_fill,L_a,L_c)");
  train->add_option("--episodes-per-graph", cfg.episodes_per_graph, "Updates per graph visit");
  train->add_option("--checkpoint-every", cfg.checkpoint_every, "Save every N episodes to --out");

  auto* order = app.add_subcommand("order", "Compute an ordering for one matrix");
  std::string matrix, method, order_model, order_out;
  std::uint64_t order_seed = 0;
  order->add_option("--matrix", matrix, "Matrix Market file")->required();
  order->add_option("--method", method, "natural|random|mindeg|gpo")->required();
  order->add_option("--model", order_model, "Checkpoint for gpo");
  order->add_option("--seed", order_seed, "RNG seed for random");
  order->add_option("--out", order_out, "Ordering file")->required();

  auto* bench = app.add_subcommand("bench", "Fill-in ratio comparison table");
  std::vector<std::string> bench_patterns, bench_methods;
  std::string bench_model, bench_out;
  std::uint64_t bench_seed = 0;
  bench->add_option("--matrices", bench_patterns, "Glob(s) of Matrix Market files")->required();
  bench->add_option("--methods", bench_methods, "Comma-separated methods")->required();
  bench->add_option("--model", bench_model, "Checkpoint for gpo");
  bench->add_option("--seed", bench_seed, "RNG seed");
  bench->add_option("--out", bench_out, "Report CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return run_gen(count, n_min, n_max, gen_seed, gen_out);
    }
    if (train->parsed()) {
      cfg.net = gpo::NetConfig::for_backbone(gpo::backbone_from_string(backbone));
      cfg.reward = gpo::reward_from_string(reward);
      if (cfg.checkpoint_every > 0) {
        cfg.checkpoint_path = model_out;
      }
      return run_train(data_dir, cfg, model_out, log_path);
    }
    if (order->parsed()) {
      return run_order(matrix, method, order_model, order_seed, order_out);
    }
    if (bench->parsed()) {
      return run_bench(bench_patterns, bench_methods, bench_model, bench_seed, bench_out);
    }
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
