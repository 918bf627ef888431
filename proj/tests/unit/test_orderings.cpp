#include <random>

#include <gtest/gtest.h>

#include "gpo/datagen.hpp"
#include "gpo/orderings.hpp"
#include "test_graphs.hpp"

namespace gpo {
namespace {

std::size_t fill_of(SparsityPattern const& p, Ordering const& ord)
{
  return symbolic_factorize(p, ord).fill.size();
}

TEST(NaturalOrder, Identity)
{
  EXPECT_EQ(natural_order(testing::path_graph(3)).perm(), (std::vector<node_t>{0, 1, 2}));
  EXPECT_EQ(natural_order(SparsityPattern(1, {})).perm(), (std::vector<node_t>{0}));
  EXPECT_EQ(fill_of(testing::cycle_graph(6), natural_order(testing::cycle_graph(6))), 3u);
}

TEST(RandomOrder, SeededAndBijective)
{
  auto const p = testing::random_graph(50, 0.1, *std::make_unique<std::mt19937_64>(1));
  std::mt19937_64 a(42), b(42), c(43);
  auto const oa = random_order(p, a);
  EXPECT_EQ(oa, random_order(p, b));
  EXPECT_NE(oa, random_order(p, c));
  EXPECT_EQ(oa.size(), 50);  // Ordering's constructor enforces bijectivity
  std::mt19937_64 d(0);
  EXPECT_EQ(random_order(SparsityPattern(1, {}), d).perm(), (std::vector<node_t>{0}));
}

TEST(MinDegreeOrder, Examples)
{
  auto const star = testing::star_graph(3);
  auto const ord = min_degree_order(star);
  EXPECT_EQ(ord.perm(), (std::vector<node_t>{1, 2, 0, 3}));
  EXPECT_EQ(fill_of(star, ord), 0u);

  for (node_t n : {1, 2, 5, 30}) {
    auto const path = testing::path_graph(n);
    EXPECT_EQ(fill_of(path, min_degree_order(path)), 0u);
  }
  EXPECT_EQ(fill_of(testing::cycle_graph(4), min_degree_order(testing::cycle_graph(4))), 1u);
}

TEST(MinDegreeOrder, PicksMinimumCurrentDegree)
{
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto const p = testing::random_graph(25, 0.2, rng);
    auto const ord = min_degree_order(p);
    EliminationGraph g(p);
    for (auto v : ord.perm()) {
      for (auto u : g.live_nodes()) {
        ASSERT_TRUE(g.degree(v) < g.degree(u) || (g.degree(v) == g.degree(u) && v <= u));
      }
      g.eliminate(v);
    }
  }
}

TEST(MinDegreeOrder, BeatsNaturalOnDelaunay)
{
  std::mt19937_64 rng(99);
  int wins = 0;
  int const trials = 40;
  for (int i = 0; i < trials; ++i) {
    auto const p = generate_delaunay(80, rng);
    if (fill_of(p, min_degree_order(p)) <= fill_of(p, natural_order(p))) {
      ++wins;
    }
  }
  EXPECT_GE(wins, static_cast<int>(0.9 * trials));
}

} // namespace
} // namespace gpo
