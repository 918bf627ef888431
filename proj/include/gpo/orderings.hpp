#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "gpo/sparsity.hpp"
#include "gpo/symbolic.hpp"

namespace gpo {

inline Ordering natural_order(SparsityPattern const& p) { return Ordering::identity(p.size()); }

template <class Rng>
Ordering random_order(SparsityPattern const& p, Rng& rng)
{
  std::vector<node_t> perm(static_cast<std::size_t>(p.size()));
  std::iota(perm.begin(), perm.end(), node_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return Ordering(std::move(perm));
}

/// Exact greedy minimum degree on the explicit elimination graph; ties go to
/// the lowest node id.
inline Ordering min_degree_order(SparsityPattern const& p)
{
  EliminationGraph g(p);
  auto const n = static_cast<std::size_t>(p.size());
  std::vector<std::size_t> degree(n);
  for (node_t v = 0; v < p.size(); ++v) {
    degree[static_cast<std::size_t>(v)] = g.degree(v);
  }
  std::vector<node_t> perm;
  perm.reserve(n);
  std::vector<node_t> touched;
  while (!g.empty()) {
    node_t best = -1;
    std::size_t best_deg = n + 1;
    // n is small at the scales this is used for; a linear scan keeps the
    // lowest-index tie-break obvious.
    for (node_t v = 0; v < p.size(); ++v) {
      if (g.is_live(v) && degree[static_cast<std::size_t>(v)] < best_deg) {
        best = v;
        best_deg = degree[static_cast<std::size_t>(v)];
      }
    }
    auto const nb = g.neighbors(best);
    touched.assign(nb.begin(), nb.end());
    g.eliminate(best);
    for (auto u : touched) {
      degree[static_cast<std::size_t>(u)] = g.degree(u);
    }
    perm.push_back(best);
  }
  return Ordering(std::move(perm));
}

} // namespace gpo
