#include <gtest/gtest.h>

#include <cmath>

#include "aoi/max_weight.hpp"

namespace aoi {
namespace {

TEST(MaxWeight, TopKSelection) {
  const double s[] = {3, 1, 2};
  EXPECT_EQ(max_weight_set(InterferenceModel::k_of_n(3, 2), s), (LinkSet{0, 2}));
}

TEST(MaxWeight, BestIndependentSetOnTriangle) {
  const double s[] = {1, 1, 5};
  EXPECT_EQ(max_weight_set(InterferenceModel::conflict_graph(3, {{0, 1}, {1, 2}, {0, 2}}), s), (LinkSet{2}));
}

TEST(MaxWeight, ExplicitSetsScan) {
  const double s[] = {2, 3};
  auto im = InterferenceModel::explicit_sets(2, {LinkSet{0}, LinkSet{1}, LinkSet{0, 1}});
  EXPECT_EQ(max_weight_set(im, s), (LinkSet{0, 1}));
}

TEST(MaxWeight, AllZeroGivesEmpty) {
  const double s[] = {0, 0, 0};
  EXPECT_TRUE(max_weight_set(InterferenceModel::k_of_n(3, 2), s).empty());
  EXPECT_TRUE(max_weight_set(InterferenceModel::conflict_graph(3, {}), s).empty());
  EXPECT_TRUE(max_weight_set(InterferenceModel::explicit_sets(3, {LinkSet{1}}), s).empty());
}

TEST(MaxWeight, ZeroScoreLinksExcluded) {
  const double s[] = {0, 4, 0, 1};
  EXPECT_EQ(max_weight_set(InterferenceModel::k_of_n(4, 3), s), (LinkSet{1, 3}));
  EXPECT_EQ(max_weight_set(InterferenceModel::conflict_graph(4, {}), s), (LinkSet{1, 3}));
}

TEST(MaxWeight, TiesPreferLexicographicallySmallest) {
  const double s[] = {1, 1, 1, 1};
  EXPECT_EQ(max_weight_set(InterferenceModel::k_of_n(4, 2), s), (LinkSet{0, 1}));
  // {0,2} and {1,3} both weigh 2 on the 4-cycle.
  auto cycle = InterferenceModel::conflict_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  EXPECT_EQ(max_weight_set(cycle, s), (LinkSet{0, 2}));
  const double t[] = {2, 1, 1};
  EXPECT_EQ(max_weight_set(InterferenceModel::explicit_sets(3, {LinkSet{1, 2}, LinkSet{0}}), t), (LinkSet{0}));
}

TEST(MaxWeight, WrongLengthRejected) {
  const double s[] = {1, 2};
  EXPECT_THROW(max_weight_set(InterferenceModel::k_of_n(3, 1), s), InvalidInput);
}

// Independent oracle: scan the full enumeration, keep the best sum with the
// smallest index vector on ties, zero-score members stripped for subset-closed models.
LinkSet exhaustive_argmax(const InterferenceModel& im, std::span<const double> scores) {
  double best = 0.0;
  LinkSet arg;
  for (LinkSet m : enumerate_feasible_sets(im, 1u << 16)) {
    if (im.subset_closed()) {
      LinkSet pos;
      m.for_each([&](std::size_t e) {
        if (scores[e] > 0) pos.insert(e);
      });
      m = pos;
    }
    double s = 0.0;
    for (auto e : m.indices()) s += scores[e];
    if (s > best || (s == best && m.indices() < arg.indices())) {
      best = s;
      arg = m;
    }
  }
  return arg;
}

class MaxWeightOracle : public ::testing::TestWithParam<int> {};

TEST_P(MaxWeightOracle, MatchesExhaustiveSearch) {
  RngStream rng(1000 + GetParam());
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.next() % 12;
    std::vector<double> scores(n);
    const bool integer = rng.uniform() < 0.5;  // integer scores exercise ties
    for (auto& s : scores) {
      if (rng.uniform() < 0.2)
        s = 0.0;
      else
        s = integer ? static_cast<double>(1 + rng.next() % 3) : rng.uniform() * 10.0;
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (rng.uniform() < 0.3) edges.emplace_back(a, b);
    std::vector<LinkSet> listed;
    for (int i = 0; i < 8; ++i) listed.push_back(LinkSet(rng.next() & ((1ULL << n) - 1)));
    const InterferenceModel models[] = {InterferenceModel::k_of_n(n, 1 + rng.next() % n),
                                        InterferenceModel::conflict_graph(n, edges),
                                        InterferenceModel::explicit_sets(n, listed)};
    for (const auto& im : models) {
      const LinkSet got = max_weight_set(im, scores);
      const LinkSet want = exhaustive_argmax(im, scores);
      if (integer || !im.subset_closed()) {
        ASSERT_EQ(got, want) << "n=" << n;
      } else {
        // Real-valued sums can differ in the last bit with summation order.
        double sg = 0, sw = 0;
        for (auto e : got.indices()) sg += scores[e];
        for (auto e : want.indices()) sw += scores[e];
        ASSERT_NEAR(sg, sw, 1e-12);
      }
      ASSERT_TRUE(im.is_feasible(got));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, MaxWeightOracle, ::testing::Range(0, 5));

TEST(MaxWeight, ScaleInvariance) {
  RngStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.next() % 10;
    std::vector<double> s(n), scaled(n);
    const double c = 0.1 + rng.uniform() * 50.0;
    for (std::size_t e = 0; e < n; ++e) {
      s[e] = static_cast<double>(rng.next() % 5);
      scaled[e] = s[e] * c;
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t a = 0; a + 1 < n; ++a) edges.emplace_back(a, a + 1);
    auto path = InterferenceModel::conflict_graph(n, edges);
    auto kofn = InterferenceModel::k_of_n(n, 1 + n / 3);
    EXPECT_EQ(max_weight_set(kofn, s), max_weight_set(kofn, scaled));
    double sa = 0, sb = 0;
    for (auto e : max_weight_set(path, s).indices()) sa += s[e];
    for (auto e : max_weight_set(path, scaled).indices()) sb += s[e];
    EXPECT_EQ(sa, sb);
  }
}

}  // namespace
}  // namespace aoi
