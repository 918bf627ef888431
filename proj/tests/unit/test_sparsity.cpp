#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gpo/sparsity.hpp"
#include "test_graphs.hpp"

namespace gpo {
namespace {

SparsityPattern load(std::string const& text)
{
  std::istringstream in(text);
  return load_matrix_market(in);
}

TEST(MatrixMarket, GeneralDropsDiagonalAndSymmetrizes)
{
  auto const p = load(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "3 3 3\n"
      "1 1 4.0\n"
      "2 1 -1.5\n"
      "3 3 2.0\n");
  EXPECT_EQ(p.size(), 3);
  EXPECT_EQ(p.edges(), (std::vector<edge_t>{{0, 1}}));
  EXPECT_TRUE(p.has_diagonal()[0]);
  EXPECT_FALSE(p.has_diagonal()[1]);
}

TEST(MatrixMarket, SymmetricLowerTriangleExpands)
{
  auto const p = load(
      "%%MatrixMarket matrix coordinate pattern symmetric\n"
      "3 3 1\n"
      "3 1\n");
  EXPECT_EQ(p.edges(), (std::vector<edge_t>{{0, 2}}));
}

TEST(MatrixMarket, DuplicatesAndBothTrianglesMerge)
{
  auto const p = load(
      "%%MatrixMarket matrix coordinate integer general\n"
      "2 2 3\n"
      "1 2 1\n"
      "2 1 0\n"
      "1 2 7\n");
  EXPECT_EQ(p.edge_count(), 1u);
}

TEST(MatrixMarket, ExplicitZeroCountsAsNonzero)
{
  auto const p = load(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 1\n"
      "2 1 0.0\n");
  EXPECT_EQ(p.edge_count(), 1u);
}

TEST(MatrixMarket, ComplexValuesAreSkipped)
{
  auto const p = load(
      "%%MatrixMarket matrix coordinate complex hermitian\n"
      "2 2 1\n"
      "2 1 1.0 -2.0\n");
  EXPECT_EQ(p.edge_count(), 1u);
}

TEST(MatrixMarket, Errors)
{
  EXPECT_THROW(load("%%MatrixMarket matrix coordinate real general\n3 3 1\n4 1 1.0\n"),
               parse_error);
  EXPECT_THROW(load("%%MatrixMarket matrix coordinate real general\n3 4 0\n"), parse_error);
  EXPECT_THROW(load("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"), parse_error);
  EXPECT_THROW(load("not a header\n"), parse_error);
  EXPECT_THROW(load(""), parse_error);
  EXPECT_THROW(load("%%MatrixMarket matrix coordinate real general\n3 3 2\n1 2 1.0\n"),
               parse_error);
  EXPECT_THROW(load("%%MatrixMarket matrix coordinate real general\n3 3 1\n1 2\n"), parse_error);
  EXPECT_THROW(load("%%MatrixMarket matrix coordinate real general\n3 3 1\n0 2 1\n"), parse_error);
}

TEST(NnzSym, Examples)
{
  EXPECT_EQ(nnz_sym(SparsityPattern(3, {{0, 1}})), 5u);
  EXPECT_EQ(nnz_sym(SparsityPattern(1, {})), 1u);
  EXPECT_EQ(nnz_sym(testing::cycle_graph(4)), 12u);
}

TEST(SparsityPattern, NormalizesEdges)
{
  SparsityPattern const p(3, {{2, 1}, {1, 2}, {1, 1}, {0, 2}});
  EXPECT_EQ(p.edges(), (std::vector<edge_t>{{0, 2}, {1, 2}}));
  EXPECT_THROW(SparsityPattern(2, {{0, 2}}), validation_error);
}

TEST(Ordering, RejectsNonPermutations)
{
  EXPECT_NO_THROW(Ordering({2, 0, 1}));
  EXPECT_THROW(Ordering({0, 0, 1}), validation_error);
  EXPECT_THROW(Ordering({0, 3, 1}), validation_error);
  EXPECT_THROW(Ordering({-1, 0}), validation_error);
}

TEST(Ordering, FileRoundTrip)
{
  Ordering const ord({3, 0, 2, 1});
  std::stringstream ss;
  write_ordering(ss, ord);
  EXPECT_EQ(ss.str(), "3\n0\n2\n1\n");
  EXPECT_EQ(read_ordering(ss), ord);

  std::istringstream bad("0\n0\n");
  EXPECT_THROW(read_ordering(bad), validation_error);
  std::istringstream junk("0\nx\n");
  EXPECT_THROW(read_ordering(junk), parse_error);
}

// Write/reload and re-symmetrization both leave the pattern unchanged.
TEST(MatrixMarket, RoundTripProperty)
{
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<node_t> size(1, 30);
    auto const p = testing::random_graph(size(rng), 0.2, rng);
    std::stringstream ss;
    write_matrix_market(ss, p);
    auto const q = load_matrix_market(ss);
    ASSERT_EQ(p, q);
    std::stringstream again;
    write_matrix_market(again, q);
    ASSERT_EQ(load_matrix_market(again), p);
  }
}

} // namespace
} // namespace gpo
