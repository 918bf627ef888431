#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpo/error.hpp"

namespace gpo {

using node_t = std::int32_t;
using edge_t = std::pair<node_t, node_t>;

/// Canonical (min, max) form of an undirected edge.
inline edge_t canonical_edge(node_t a, node_t b) noexcept
{
  return a < b ? edge_t{a, b} : edge_t{b, a};
}

/// Symmetric nonzero structure of a square matrix, stored as the undirected
/// adjacency graph of its off-diagonal entries. Every node is assumed to carry
/// a structural diagonal; `has_diagonal` only records what the source listed.
class SparsityPattern {
public:
  SparsityPattern() = default;

  /// Edges may be given in any orientation and with duplicates; self-loops
  /// are dropped. Throws validation_error on out-of-range indices.
  SparsityPattern(node_t n, std::vector<edge_t> edges)
    : n_(n), has_diagonal_(static_cast<std::size_t>(n), false)
  {
    if (n < 0) {
      throw validation_error("pattern size must be non-negative");
    }
    edges_.reserve(edges.size());
    for (auto [a, b] : edges) {
      if (a < 0 || a >= n || b < 0 || b >= n) {
        throw validation_error("edge (" + std::to_string(a) + "," +
                               std::to_string(b) + ") out of range for n=" +
                               std::to_string(n));
      }
      if (a != b) {
        edges_.push_back(canonical_edge(a, b));
      }
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  node_t size() const noexcept { return n_; }
  std::vector<edge_t> const& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::vector<bool> const& has_diagonal() const noexcept { return has_diagonal_; }
  void mark_diagonal(node_t i) { has_diagonal_.at(static_cast<std::size_t>(i)) = true; }

  /// Sorted neighbor lists.
  std::vector<std::vector<node_t>> adjacency() const
  {
    std::vector<std::vector<node_t>> adj(static_cast<std::size_t>(n_));
    for (auto [a, b] : edges_) {
      adj[static_cast<std::size_t>(a)].push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
    }
    return adj;
  }

  friend bool operator==(SparsityPattern const& x, SparsityPattern const& y)
  {
    return x.n_ == y.n_ && x.edges_ == y.edges_;
  }

private:
  node_t n_ = 0;
  std::vector<edge_t> edges_;
  std::vector<bool> has_diagonal_;
};

/// nnz of the symmetric pattern with every diagonal entry present.
inline std::size_t nnz_sym(SparsityPattern const& p) noexcept
{
  return 2 * p.edge_count() + static_cast<std::size_t>(p.size());
}

/// Elimination order: perm[k] is the node eliminated at step k.
class Ordering {
public:
  Ordering() = default;

  explicit Ordering(std::vector<node_t> perm) : perm_(std::move(perm))
  {
    std::vector<bool> seen(perm_.size(), false);
    auto const n = static_cast<node_t>(perm_.size());
    for (auto v : perm_) {
      if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
        throw validation_error("ordering is not a permutation of [0, " +
                               std::to_string(n) + ")");
      }
      seen[static_cast<std::size_t>(v)] = true;
    }
  }

  static Ordering identity(node_t n)
  {
    std::vector<node_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), node_t{0});
    return Ordering(std::move(perm));
  }

  node_t size() const noexcept { return static_cast<node_t>(perm_.size()); }
  node_t operator[](std::size_t k) const { return perm_[k]; }
  std::vector<node_t> const& perm() const noexcept { return perm_; }

  /// position[v] = step at which v is eliminated.
  std::vector<node_t> inverse() const
  {
    std::vector<node_t> pos(perm_.size());
    for (std::size_t k = 0; k < perm_.size(); ++k) {
      pos[static_cast<std::size_t>(perm_[k])] = static_cast<node_t>(k);
    }
    return pos;
  }

  friend bool operator==(Ordering const&, Ordering const&) = default;

private:
  std::vector<node_t> perm_;
};

namespace detail {

inline std::string lowercase(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

} // namespace detail

/// Reads a Matrix Market coordinate file and returns the pattern of A + A^T.
/// Values are parsed for well-formedness and then dropped; explicit zeros
/// count as nonzeros and duplicates merge.
inline SparsityPattern load_matrix_market(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw parse_error("empty Matrix Market stream");
  }
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") {
    throw parse_error("missing %%MatrixMarket banner");
  }
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix") {
    throw parse_error("unsupported object '" + object + "'");
  }
  if (format != "coordinate") {
    throw parse_error("only coordinate format is supported, got '" + format + "'");
  }
  int values_per_entry = 0;
  if (field == "real" || field == "integer" || field == "double") {
    values_per_entry = 1;
  } else if (field == "complex") {
    values_per_entry = 2;
  } else if (field != "pattern") {
    throw parse_error("unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" &&
      symmetry != "skew-symmetric" && symmetry != "hermitian") {
    throw parse_error("unsupported symmetry '" + symmetry + "'");
  }

  // Size line follows any number of comment lines.
  long long rows = -1, cols = -1, entries = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') {
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> entries)) {
      throw parse_error("malformed size line " + std::to_string(line_no));
    }
    break;
  }
  if (rows < 0 || cols < 0 || entries < 0) {
    throw parse_error("missing or negative size line");
  }
  if (rows != cols) {
    throw parse_error("matrix is not square (" + std::to_string(rows) + "x" +
                      std::to_string(cols) + ")");
  }

  auto const n = static_cast<node_t>(rows);
  std::vector<edge_t> edges;
  edges.reserve(static_cast<std::size_t>(entries));
  std::vector<node_t> diagonal;
  long long seen = 0;
  while (seen < entries && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%' ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream entry(line);
    long long i = 0, j = 0;
    if (!(entry >> i >> j)) {
      throw parse_error("malformed entry on line " + std::to_string(line_no));
    }
    for (int k = 0; k < values_per_entry; ++k) {
      double value = 0.0;
      if (!(entry >> value)) {
        throw parse_error("missing value on line " + std::to_string(line_no));
      }
    }
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw parse_error("index (" + std::to_string(i) + "," + std::to_string(j) +
                        ") out of range on line " + std::to_string(line_no));
    }
    auto const a = static_cast<node_t>(i - 1);
    auto const b = static_cast<node_t>(j - 1);
    if (a == b) {
      diagonal.push_back(a);
    } else {
      edges.emplace_back(a, b);
    }
    ++seen;
  }
  if (seen < entries) {
    throw parse_error("expected " + std::to_string(entries) + " entries, found " +
                      std::to_string(seen));
  }

  SparsityPattern pattern(n, std::move(edges));
  for (auto d : diagonal) {
    pattern.mark_diagonal(d);
  }
  return pattern;
}

/// Writes the pattern as a symmetric pattern-field Matrix Market file
/// (lower triangle plus the full diagonal).
inline void write_matrix_market(std::ostream& out, SparsityPattern const& p)
{
  out << "%%MatrixMarket matrix coordinate pattern symmetric\n";
  out << p.size() << ' ' << p.size() << ' ' << (p.edge_count() + static_cast<std::size_t>(p.size()))
      << '\n';
  for (node_t i = 0; i < p.size(); ++i) {
    out << (i + 1) << ' ' << (i + 1) << '\n';
  }
  for (auto [a, b] : p.edges()) {
    out << (b + 1) << ' ' << (a + 1) << '\n';
  }
}

/// One 0-based node index per line; line k holds perm[k].
inline void write_ordering(std::ostream& out, Ordering const& ord)
{
  for (auto v : ord.perm()) {
    out << v << '\n';
  }
}

inline Ordering read_ordering(std::istream& in)
{
  std::vector<node_t> perm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream ss(line);
    long long v = 0;
    std::string rest;
    if (!(ss >> v) || (ss >> rest)) {
      throw parse_error("malformed ordering line " + std::to_string(line_no));
    }
    perm.push_back(static_cast<node_t>(v));
  }
  return Ordering(std::move(perm));
}

} // namespace gpo
