// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "gpo/gpo.hpp"
#include "gradient_check.hpp"
#include "test_graphs.hpp"

namespace {

using namespace gpo;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, std::string const& name, std::function<Outcome()> const& check)
{
  auto const start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (std::exception const& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  double const secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) {
    ++failures;
  }
  std::printf("[%s] %d %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

template <class... Args>
std::string cat(Args const&... args)
{
  std::ostringstream ss;
  (ss << ... << args);
  return ss.str();
}

Outcome oracle_equivalence()
{
  std::mt19937_64 rng(1001);
  int const cases = 2000;
  for (int i = 0; i < cases; ++i) {
    std::uniform_int_distribution<node_t> size(1, 10);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    auto const n = size(rng);
    auto const p = testing::random_graph(n, density(rng), rng);
    auto const ord = testing::random_permutation(n, rng);
    if (symbolic_factorize(p, ord).fill != fill_path_oracle(p, ord)) {
      return {false, cat("mismatch on case ", i)};
    }
  }
  return {true, cat(cases, " random cases agree")};
}

// Every ordering obtainable by repeatedly removing a current leaf.
void leaf_peel_orders(std::vector<std::vector<node_t>> const& adj, std::vector<int>& deg,
                      std::vector<bool>& gone, std::vector<node_t>& prefix,
                      std::vector<std::vector<node_t>>& out)
{
  if (prefix.size() == adj.size()) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t v = 0; v < adj.size(); ++v) {
    if (gone[v] || deg[v] > 1) {
      continue;
    }
    gone[v] = true;
    prefix.push_back(static_cast<node_t>(v));
    for (auto u : adj[v]) {
      --deg[static_cast<std::size_t>(u)];
    }
    leaf_peel_orders(adj, deg, gone, prefix, out);
    for (auto u : adj[v]) {
      ++deg[static_cast<std::size_t>(u)];
    }
    prefix.pop_back();
    gone[v] = false;
  }
}

Outcome exhaustive_small_cases()
{
  auto const c4 = testing::cycle_graph(4);
  std::vector<node_t> perm{0, 1, 2, 3};
  int orders = 0;
  do {
    ++orders;
    if (symbolic_factorize(c4, Ordering(perm)).fill.size() != 1) {
      return {false, "a C4 ordering did not give exactly 1 fill edge"};
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::mt19937_64 rng(2002);
  std::vector<SparsityPattern> forests{testing::path_graph(6), testing::star_graph(5)};
  for (int i = 0; i < 10; ++i) {
    forests.push_back(testing::random_tree(7, rng));
  }
  std::size_t peels = 0;
  for (auto const& t : forests) {
    auto const adj = t.adjacency();
    std::vector<int> deg(adj.size());
    for (std::size_t v = 0; v < adj.size(); ++v) {
      deg[v] = static_cast<int>(adj[v].size());
    }
    std::vector<bool> gone(adj.size(), false);
    std::vector<node_t> prefix;
    std::vector<std::vector<node_t>> all;
    leaf_peel_orders(adj, deg, gone, prefix, all);
    for (auto const& o : all) {
      ++peels;
      if (!symbolic_factorize(t, Ordering(o)).fill.empty()) {
        return {false, "a leaf-peeling ordering produced fill"};
      }
    }
  }
  return {orders == 24, cat(orders, " C4 orderings with 1 fill; ", peels, " leaf-peel orderings with 0 fill")};
}

Outcome conservation()
{
  std::mt19937_64 rng(3003);
  PolicyValueNet const net(NetConfig{}, 3003);
  std::size_t steps = 0;
  for (int episode = 0; episode < 200; ++episode) {
    std::uniform_int_distribution<node_t> size(1, 40);
    auto const n = size(rng);
    auto const p = episode % 2 == 0 ? testing::random_graph(n, 0.2, rng)
                                    : generate_delaunay(std::max<node_t>(n, 3), rng);
    // Alternate between random orderings and sampled policy episodes.
    auto const ord = episode % 4 < 2 ? testing::random_permutation(p.size(), rng)
                                     : rollout(net, p, rng, ActionMode::sample, false).ordering;
    EliminationGraph g(p);
    for (auto v : ord.perm()) {
      auto const before = static_cast<long>(g.edge_count());
      auto const deg = static_cast<long>(g.degree(v));
      auto const fill = static_cast<long>(g.eliminate(v).size());
      ++steps;
      if (static_cast<long>(g.edge_count()) != before - deg + fill) {
        return {false, cat("violated at episode ", episode, " node ", v)};
      }
    }
  }
  return {true, cat(steps, " steps conserve edges")};
}

Outcome asr_range()
{
  std::mt19937_64 rng(4004);
  std::size_t checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<node_t> size(1, 50);
    std::uniform_real_distribution<double> density(0.0, 0.6);
    auto const n = size(rng);
    auto const p = testing::random_graph(n, density(rng), rng);
    auto const res = symbolic_factorize(p, testing::random_permutation(n, rng));
    std::vector<std::size_t> edges;
    std::vector<std::int64_t> rewards;
    for (auto const& s : res.trace) {
      edges.push_back(s.edges_before);
      rewards.push_back(s.reward);
    }
    auto const asr = adaptive_saturation_return(edges, rewards);
    auto const ret = returns_to_go(rewards);
    for (std::size_t t = 0; t < asr.size(); ++t) {
      ++checked;
      if (!(asr[t] > -1.0 && asr[t] <= 1.0)) {
        return {false, cat("out of range: ", asr[t])};
      }
      if (edges[t] > 0 && (asr[t] == 1.0) != (ret[t] == 0.0)) {
        return {false, cat("ASR=1 mismatch at E=", edges[t], " R=", ret[t])};
      }
    }
  }
  return {true, cat(checked, " steps within (-1, 1]")};
}

Outcome gradient_check()
{
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  Eigen::Index params = 0;
  for (auto backbone : {Backbone::mixhop, Backbone::singlehop}) {
    PolicyValueNet const net(NetConfig::for_backbone(backbone), 5005);
    auto const p = testing::random_graph(6, 0.5, rng);
    EliminationGraph const g(p);
    auto const prop = build_propagation(g, backbone);
    RowMatrix const x = normalize_features(compute_features(g)).values;
    std::normal_distribution<double> normal;
    Eigen::VectorXd weights(6);
    for (auto& w : weights) {
      w = normal(rng);
    }
    double const value_weight = normal(rng);
    auto const out = forward(net, prop, x);
    auto const grad = backward(net, out.tape, weights, value_weight);
    auto const check = testing::check_gradient(net, prop, x, weights, value_weight, grad, 1e-4, 1e-6);
    if (check.checked != net.parameter_count()) {
      return {false, "not every parameter was checked"};
    }
    worst = std::max(worst, check.max_relative_error);
    params += check.checked;
  }
  return {worst <= 1e-3, cat(params, " parameters, max relative error ", worst)};
}

Outcome equivariance()
{
  std::mt19937_64 rng(6006);
  PolicyValueNet const net(NetConfig{}, 6006);
  double worst_lp = 0.0;
  double worst_v = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<node_t> size(2, 60);
    auto const n = size(rng);
    auto const p = trial % 2 == 0 ? testing::random_graph(n, 0.15, rng)
                                  : generate_delaunay(std::max<node_t>(n, 3), rng);
    auto const relabel = testing::random_permutation(p.size(), rng).perm();
    EliminationGraph const a(p);
    EliminationGraph const b(testing::relabel(p, relabel));
    auto const fa = forward(net, a, normalize_features(compute_features(a)));
    auto const fb = forward(net, b, normalize_features(compute_features(b)));
    for (node_t v = 0; v < p.size(); ++v) {
      worst_lp = std::max(worst_lp, std::abs(fa.log_probs(v) - fb.log_probs(relabel[static_cast<std::size_t>(v)])));
    }
    worst_v = std::max(worst_v, std::abs(fa.value - fb.value));
  }
  return {worst_lp <= 1e-9 && worst_v <= 1e-9,
          cat("max log-prob deviation ", worst_lp, ", max value deviation ", worst_v)};
}

double mean_fir(std::vector<SparsityPattern> const& graphs, std::function<Ordering(SparsityPattern const&)> const& f)
{
  double sum = 0.0;
  for (auto const& p : graphs) {
    sum += fill_in_ratio(p, f(p));
  }
  return sum / static_cast<double>(graphs.size());
}

Outcome learning_signal()
{
  std::mt19937_64 train_rng(7001);
  auto const train_set = generate_training_set(200, 60, 200, train_rng);
  std::mt19937_64 held_rng(7002);
  auto const held_out = generate_training_set(50, 60, 200, held_rng);

  TrainerConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 7003;
  auto const result = train(train_set, cfg);

  std::mt19937_64 order_rng(7004);
  double const natural = mean_fir(held_out, [](auto const& p) { return natural_order(p); });
  double const random = mean_fir(held_out, [&](auto const& p) { return random_order(p, order_rng); });
  double const mindeg = mean_fir(held_out, [](auto const& p) { return min_degree_order(p); });
  double const learned = mean_fir(held_out, [&](auto const& p) { return greedy_policy_order(result.net, p); });
  bool const pass = learned < natural && learned < random && learned <= 1.25 * mindeg;
  return {pass, cat("mean FIR gpo ", learned, ", natural ", natural, ", random ", random, ", mindeg ", mindeg,
                    " (ratio to mindeg ", learned / mindeg, ")")};
}

std::string slurp(fs::path const& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(std::string const& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome cli_determinism()
{
  auto const dir = fs::temp_directory_path() / "gpo_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string const cli = GPO_CLI_PATH;
  auto const d = dir.string();
  if (shell(cli + " gen --count 20 --min 30 --max 60 --seed 81 --out " + d + "/data") != 0 ||
      shell(cli + " gen --count 6 --min 30 --max 60 --seed 82 --out " + d + "/held") != 0) {
    return {false, "gen failed"};
  }
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    auto const tag = std::to_string(run);
    auto const model = d + "/model" + tag + ".ckpt";
    auto const out = d + "/report" + tag + ".csv";
    if (shell(cli + " train --data " + d + "/data --epochs 2 --seed 83 --out " + model) != 0) {
      return {false, "train failed"};
    }
    if (shell(cli + " bench --matrices '" + d + "/held/*.mtx' --methods natural,random,mindeg,gpo --model " +
              model + " --seed 84 --out " + out) != 0) {
      return {false, "bench failed"};
    }
    csv[run] = slurp(out);
  }
  bool const same = !csv[0].empty() && csv[0] == csv[1];
  fs::remove_all(dir);
  return {same, same ? cat("report CSVs identical (", csv[0].size(), " bytes)") : "report CSVs differ"};
}

Outcome path_convergence()
{
  auto const path = testing::path_graph(20);
  TrainerConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 9009;
  auto const result = train({path}, cfg);
  std::mt19937_64 rng(0);
  auto const greedy = rollout(result.net, path, rng, ActionMode::greedy);
  auto const fill = greedy.record.total_fill();
  return {fill == 0, cat("greedy total fill ", fill, " after 200 episodes")};
}

} // namespace

int main()
{
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "exhaustive C4 and leaf-peeling", exhaustive_small_cases);
  report(3, "edge conservation", conservation);
  report(4, "ASR range", asr_range);
  report(5, "gradient check", gradient_check);
  report(6, "permutation equivariance", equivariance);
  report(7, "learning signal", learning_signal);
  report(8, "train/bench determinism", cli_determinism);
  report(9, "path-graph convergence", path_convergence);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
