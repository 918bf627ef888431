#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "gpo/symbolic.hpp"

namespace gpo {

/// Per-node state features. Row r describes nodes[r]; column 0 is the
/// current degree and column 1 the collective influence.
struct NodeFeatures {
  std::vector<node_t> nodes;
  Eigen::MatrixXd values;

  Eigen::Index rows() const noexcept { return values.rows(); }
};

/// CI(v) = (deg(v) - 1) * sum_{u in N(v)} (deg(u) - 1), taken as 0 for
/// isolated nodes.
inline double collective_influence(EliminationGraph const& g, node_t v)
{
  auto const deg = static_cast<double>(g.degree(v));
  if (deg == 0.0) {
    return 0.0;
  }
  double sum = 0.0;
  for (auto u : g.neighbors(v)) {
    sum += static_cast<double>(g.degree(u)) - 1.0;
  }
  return (deg - 1.0) * sum;
}

inline NodeFeatures compute_features(EliminationGraph const& g)
{
  NodeFeatures x;
  x.nodes = g.live_nodes();
  x.values.resize(static_cast<Eigen::Index>(x.nodes.size()), 2);
  for (std::size_t r = 0; r < x.nodes.size(); ++r) {
    auto const v = x.nodes[r];
    auto const row = static_cast<Eigen::Index>(r);
    x.values(row, 0) = static_cast<double>(g.degree(v));
    x.values(row, 1) = collective_influence(g, v);
  }
  return x;
}

/// Scales each column by 1 / max(1, column max).
inline NodeFeatures normalize_features(NodeFeatures x)
{
  for (Eigen::Index c = 0; c < x.values.cols(); ++c) {
    double const peak = x.values.rows() > 0 ? x.values.col(c).maxCoeff() : 0.0;
    x.values.col(c) /= std::max(1.0, peak);
  }
  return x;
}

} // namespace gpo
