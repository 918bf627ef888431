#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gpo/error.hpp"
#include "gpo/sparsity.hpp"

namespace gpo {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(Point const&, Point const&) = default;
};

using PointSet = std::vector<Point>;
using Triangle = std::array<int, 3>;

namespace geometry {

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline long double orient(Point const& a, Point const& b, Point const& c)
{
  return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
         (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

/// Positive when d lies strictly inside the circumcircle of the
/// counter-clockwise triangle (a, b, c).
inline long double in_circle(Point const& a, Point const& b, Point const& c, Point const& d)
{
  long double const adx = static_cast<long double>(a.x) - d.x;
  long double const ady = static_cast<long double>(a.y) - d.y;
  long double const bdx = static_cast<long double>(b.x) - d.x;
  long double const bdy = static_cast<long double>(b.y) - d.y;
  long double const cdx = static_cast<long double>(c.x) - d.x;
  long double const cdy = static_cast<long double>(c.y) - d.y;
  long double const ad = adx * adx + ady * ady;
  long double const bd = bdx * bdx + bdy * bdy;
  long double const cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

/// Strictly convex hull vertices (Andrew's monotone chain), counter-clockwise.
inline std::vector<int> convex_hull(PointSet const& pts)
{
  std::vector<int> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    idx[i] = static_cast<int>(i);
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    auto const& p = pts[static_cast<std::size_t>(a)];
    auto const& q = pts[static_cast<std::size_t>(b)];
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
  if (idx.size() < 3) {
    return idx;
  }
  std::vector<int> hull(2 * idx.size());
  std::size_t k = 0;
  auto const& P = pts;
  auto at = [&](int i) -> Point const& { return P[static_cast<std::size_t>(i)]; };
  for (auto i : idx) {
    while (k >= 2 && orient(at(hull[k - 2]), at(hull[k - 1]), at(i)) <= 0) {
      --k;
    }
    hull[k++] = i;
  }
  for (std::size_t t = idx.size() - 1, lower = k + 1; t-- > 0;) {
    auto const i = idx[t];
    while (k >= lower && orient(at(hull[k - 2]), at(hull[k - 1]), at(i)) <= 0) {
      --k;
    }
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

} // namespace geometry

/// Bowyer-Watson triangulation inside a large enclosing triangle. Returned
/// triangles are counter-clockwise and index into `pts`.
inline std::vector<Triangle> delaunay_triangles(PointSet const& pts)
{
  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
  for (auto const& p : pts) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  double const cx = 0.5 * (min_x + max_x);
  double const cy = 0.5 * (min_y + max_y);
  double const radius = 1e5 * std::max({max_x - min_x, max_y - min_y, 1.0});

  auto const n = static_cast<int>(pts.size());
  PointSet all = pts;
  constexpr double pi = 3.14159265358979323846;
  for (int k = 0; k < 3; ++k) {
    double const theta = pi / 2 + k * 2 * pi / 3;
    all.push_back(Point{cx + radius * std::cos(theta), cy + radius * std::sin(theta)});
  }
  auto at = [&](int i) -> Point const& { return all[static_cast<std::size_t>(i)]; };

  auto inside = [&](Triangle const& t, Point const& p) {
    auto det = geometry::in_circle(at(t[0]), at(t[1]), at(t[2]), p);
    if (det == 0) {
      // Exact cocircular tie: decide with a fixed tiny offset of the query.
      Point const q{p.x + 1e-9, p.y + 0.6180339887e-9};
      det = geometry::in_circle(at(t[0]), at(t[1]), at(t[2]), q);
    }
    return det > 0;
  };

  std::vector<Triangle> tris{{n, n + 1, n + 2}};
  std::vector<Triangle> keep;
  std::vector<std::pair<int, int>> boundary;
  for (int i = 0; i < n; ++i) {
    auto const& p = at(i);
    keep.clear();
    boundary.clear();
    for (auto const& t : tris) {
      if (inside(t, p)) {
        for (int e = 0; e < 3; ++e) {
          boundary.emplace_back(t[static_cast<std::size_t>(e)], t[static_cast<std::size_t>((e + 1) % 3)]);
        }
      } else {
        keep.push_back(t);
      }
    }
    // Edges shared by two removed triangles appear once in each direction.
    std::vector<std::pair<int, int>> sorted = boundary;
    std::sort(sorted.begin(), sorted.end());
    for (auto [a, b] : boundary) {
      if (std::binary_search(sorted.begin(), sorted.end(), std::pair<int, int>{b, a})) {
        continue;
      }
      keep.push_back(Triangle{a, b, i});
    }
    tris.swap(keep);
  }

  std::vector<Triangle> out;
  for (auto const& t : tris) {
    if (t[0] < n && t[1] < n && t[2] < n) {
      out.push_back(t);
    }
  }
  return out;
}

inline SparsityPattern pattern_from_triangles(int n, std::vector<Triangle> const& tris)
{
  std::vector<edge_t> edges;
  edges.reserve(tris.size() * 3);
  for (auto const& t : tris) {
    edges.emplace_back(t[0], t[1]);
    edges.emplace_back(t[1], t[2]);
    edges.emplace_back(t[2], t[0]);
  }
  return SparsityPattern(n, std::move(edges));
}

template <class Rng>
PointSet sample_points(int n, Rng& rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet pts;
  pts.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    Point const p{unit(rng), unit(rng)};
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) {
      pts.push_back(p);
    }
  }
  return pts;
}

/// Delaunay graph of n uniform points in the unit square. A sample whose
/// triangulation misses part of the convex hull (edge count differs from
/// 3n - 3 - h) is redrawn.
template <class Rng>
SparsityPattern generate_delaunay(int n, Rng& rng)
{
  if (n < 3) {
    throw validation_error("Delaunay generation needs n >= 3");
  }
  for (;;) {
    auto const pts = sample_points(n, rng);
    auto const hull = geometry::convex_hull(pts);
    if (hull.size() < 3) {
      continue;  // all collinear
    }
    auto pattern = pattern_from_triangles(n, delaunay_triangles(pts));
    auto const expected = static_cast<std::size_t>(3 * n - 3) - hull.size();
    if (pattern.edge_count() == expected) {
      return pattern;
    }
  }
}

template <class Rng>
std::vector<SparsityPattern> generate_training_set(int count, int n_min, int n_max, Rng& rng)
{
  if (count < 1 || n_min < 3 || n_max < n_min) {
    throw validation_error("need count >= 1 and 3 <= n_min <= n_max");
  }
  std::uniform_int_distribution<int> size(n_min, n_max);
  std::vector<SparsityPattern> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_delaunay(size(rng), rng));
  }
  return out;
}

inline std::string dataset_file_name(std::size_t id)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "graph_%05zu.mtx", id);
  return buf;
}

/// Writes one pattern Matrix Market file per graph plus `manifest.csv`
/// (`id,file,n,edges`).
inline void write_dataset(std::filesystem::path const& dir, std::vector<SparsityPattern> const& graphs)
{
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) {
    throw std::runtime_error("cannot write manifest in " + dir.string());
  }
  manifest << "id,file,n,edges\n";
  for (std::size_t id = 0; id < graphs.size(); ++id) {
    auto const name = dataset_file_name(id);
    std::ofstream out(dir / name);
    if (!out) {
      throw std::runtime_error("cannot write " + (dir / name).string());
    }
    write_matrix_market(out, graphs[id]);
    manifest << id << ',' << name << ',' << graphs[id].size() << ',' << graphs[id].edge_count()
             << '\n';
  }
}

/// Reads a dataset written by write_dataset, in manifest order.
inline std::vector<SparsityPattern> read_dataset(std::filesystem::path const& dir)
{
  std::ifstream manifest(dir / "manifest.csv");
  if (!manifest) {
    throw parse_error("missing manifest.csv in " + dir.string());
  }
  std::string line;
  std::getline(manifest, line);
  if (line != "id,file,n,edges") {
    throw parse_error("unexpected manifest header in " + dir.string());
  }
  std::vector<SparsityPattern> out;
  while (std::getline(manifest, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string id, file;
    std::getline(ss, id, ',');
    std::getline(ss, file, ',');
    std::ifstream in(dir / file);
    if (!in) {
      throw parse_error("cannot open " + (dir / file).string());
    }
    out.push_back(load_matrix_market(in));
  }
  return out;
}

} // namespace gpo
