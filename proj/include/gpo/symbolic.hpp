#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "gpo/error.hpp"
#include "gpo/sparsity.hpp"

namespace gpo {

/// Explicit elimination graph G_k. Node ids stay those of the original
/// pattern; eliminated nodes keep an empty adjacency row.
class EliminationGraph {
public:
  EliminationGraph() = default;

  explicit EliminationGraph(SparsityPattern const& p)
    : adj_(p.adjacency()),
      live_(static_cast<std::size_t>(p.size()), true),
      live_count_(p.size()),
      edge_count_(p.edge_count())
  {}

  node_t n_original() const noexcept { return static_cast<node_t>(adj_.size()); }
  node_t live_count() const noexcept { return live_count_; }
  std::size_t edge_count() const noexcept { return edge_count_; }
  bool empty() const noexcept { return live_count_ == 0; }

  bool is_live(node_t v) const noexcept
  {
    return v >= 0 && v < n_original() && live_[static_cast<std::size_t>(v)];
  }

  std::span<node_t const> neighbors(node_t v) const
  {
    return adj_.at(static_cast<std::size_t>(v));
  }

  std::size_t degree(node_t v) const { return neighbors(v).size(); }

  bool has_edge(node_t a, node_t b) const
  {
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  /// Live nodes in ascending order; this is the row order used for features
  /// and network inputs.
  std::vector<node_t> live_nodes() const
  {
    std::vector<node_t> out;
    out.reserve(static_cast<std::size_t>(live_count_));
    for (node_t v = 0; v < n_original(); ++v) {
      if (live_[static_cast<std::size_t>(v)]) {
        out.push_back(v);
      }
    }
    return out;
  }

  /// Removes v and turns its neighborhood into a clique. Returns the added
  /// edges in canonical form, sorted.
  std::vector<edge_t> eliminate(node_t v)
  {
    if (!is_live(v)) {
      throw invalid_action("node " + std::to_string(v) + " is not live");
    }
    auto const vi = static_cast<std::size_t>(v);
    std::vector<node_t> const nbrs = std::move(adj_[vi]);
    adj_[vi].clear();
    live_[vi] = false;
    --live_count_;
    edge_count_ -= nbrs.size();

    for (auto u : nbrs) {
      auto& row = adj_[static_cast<std::size_t>(u)];
      row.erase(std::lower_bound(row.begin(), row.end(), v));
    }

    std::vector<edge_t> fill;
    std::vector<node_t> missing;
    std::vector<node_t> merged;
    for (auto u : nbrs) {
      auto& row = adj_[static_cast<std::size_t>(u)];
      missing.clear();
      std::set_difference(nbrs.begin(), nbrs.end(), row.begin(), row.end(),
                          std::back_inserter(missing));
      missing.erase(std::remove(missing.begin(), missing.end(), u), missing.end());
      if (missing.empty()) {
        continue;
      }
      // Each missing pair shows up from both endpoints; record it once.
      for (auto w : missing) {
        if (w > u) {
          fill.emplace_back(u, w);
        }
      }
      merged.clear();
      merged.reserve(row.size() + missing.size());
      std::merge(row.begin(), row.end(), missing.begin(), missing.end(),
                 std::back_inserter(merged));
      row.swap(merged);
    }
    edge_count_ += fill.size();
    return fill;
  }

private:
  std::vector<std::vector<node_t>> adj_;
  std::vector<bool> live_;
  node_t live_count_ = 0;
  std::size_t edge_count_ = 0;
};

inline EliminationGraph init_env(SparsityPattern const& p) { return EliminationGraph(p); }

struct TraceStep {
  node_t node = 0;
  std::vector<edge_t> fill;
  std::size_t edges_before = 0;
  std::int64_t reward = 0;  // -|fill|
};

using EliminationTrace = std::vector<TraceStep>;

struct SymbolicResult {
  std::vector<edge_t> fill;  // sorted union of all per-step fill sets
  SparsityPattern filled;    // E_0 plus fill
  EliminationTrace trace;
};

inline void require_ordering_for(SparsityPattern const& p, Ordering const& ord)
{
  if (ord.size() != p.size()) {
    throw validation_error("ordering has " + std::to_string(ord.size()) +
                           " entries, pattern has " + std::to_string(p.size()) +
                           " nodes");
  }
}

inline SymbolicResult symbolic_factorize(SparsityPattern const& p, Ordering const& ord)
{
  require_ordering_for(p, ord);
  EliminationGraph g(p);
  SymbolicResult result;
  result.trace.reserve(static_cast<std::size_t>(p.size()));
  for (auto v : ord.perm()) {
    TraceStep step;
    step.node = v;
    step.edges_before = g.edge_count();
    step.fill = g.eliminate(v);
    step.reward = -static_cast<std::int64_t>(step.fill.size());
    result.fill.insert(result.fill.end(), step.fill.begin(), step.fill.end());
    result.trace.push_back(std::move(step));
  }
  std::sort(result.fill.begin(), result.fill.end());

  std::vector<edge_t> all = p.edges();
  all.insert(all.end(), result.fill.begin(), result.fill.end());
  result.filled = SparsityPattern(p.size(), std::move(all));
  return result;
}

/// Fill computed straight from the fill-path characterization: (i, j) is
/// fill iff it is not an original edge and some path i..j has all interior
/// nodes eliminated before both endpoints. O(n^2 (n + m)); test use only.
inline std::vector<edge_t> fill_path_oracle(SparsityPattern const& p, Ordering const& ord)
{
  require_ordering_for(p, ord);
  auto const n = p.size();
  auto const adj = p.adjacency();
  auto const pos = ord.inverse();

  std::vector<edge_t> fill;
  std::vector<char> seen(static_cast<std::size_t>(n));
  std::queue<node_t> frontier;
  for (node_t i = 0; i < n; ++i) {
    for (node_t j = i + 1; j < n; ++j) {
      auto const& row = adj[static_cast<std::size_t>(i)];
      if (std::binary_search(row.begin(), row.end(), j)) {
        continue;
      }
      auto const limit = std::min(pos[static_cast<std::size_t>(i)],
                                  pos[static_cast<std::size_t>(j)]);
      std::fill(seen.begin(), seen.end(), 0);
      frontier = {};
      seen[static_cast<std::size_t>(i)] = 1;
      frontier.push(i);
      bool found = false;
      while (!frontier.empty() && !found) {
        auto const x = frontier.front();
        frontier.pop();
        for (auto y : adj[static_cast<std::size_t>(x)]) {
          if (y == j) {
            found = true;
            break;
          }
          if (!seen[static_cast<std::size_t>(y)] && pos[static_cast<std::size_t>(y)] < limit) {
            seen[static_cast<std::size_t>(y)] = 1;
            frontier.push(y);
          }
        }
      }
      if (found) {
        fill.emplace_back(i, j);
      }
    }
  }
  return fill;
}

/// Line-oriented trace dump: `step,node,fill_count,edges_before`.
inline void write_trace(std::ostream& out, EliminationTrace const& trace)
{
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out << t << ',' << trace[t].node << ',' << trace[t].fill.size() << ','
        << trace[t].edges_before << '\n';
  }
}

} // namespace gpo
