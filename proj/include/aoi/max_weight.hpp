#pragma once

// Max-weight activation: the argmax kernel shared by the channel-aware
// policies and by the Frank-Wolfe linear-minimization steps.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "aoi/link_set.hpp"
#include "aoi/model.hpp"

namespace aoi {

namespace detail {

inline double set_score(LinkSet m, std::span<const double> scores) {
  double s = 0.0;
  m.for_each([&](std::size_t e) { s += scores[e]; });
  return s;
}

inline bool better(double score, LinkSet m, double best_score, LinkSet best) {
  return score > best_score || (score == best_score && lex_less(m, best));
}

inline LinkSet top_k(std::span<const double> scores, std::size_t k) {
  std::size_t order[kMaxLinks];
  std::size_t count = 0;
  for (std::size_t e = 0; e < scores.size(); ++e)
    if (scores[e] > 0.0) order[count++] = e;
  if (count > k) {
    // Larger score first; equal scores prefer the smaller index, which yields
    // the lexicographically smallest maximizing set.
    std::partial_sort(order, order + k, order + count, [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    });
    count = k;
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < count; ++i) bits |= std::uint64_t{1} << order[i];
  return LinkSet(bits);
}

// Branch and bound over independent sets of the positive-score links.
inline LinkSet best_independent_set(const InterferenceModel& im, std::span<const double> scores) {
  std::size_t cand[kMaxLinks];
  std::size_t count = 0;
  for (std::size_t e = 0; e < scores.size(); ++e)
    if (scores[e] > 0.0) cand[count++] = e;
  if (count == 0) return {};

  // suffix[i]: sum of candidate scores from position i on (optimistic bound).
  double suffix[kMaxLinks + 1];
  suffix[count] = 0.0;
  for (std::size_t i = count; i-- > 0;) suffix[i] = suffix[i + 1] + scores[cand[i]];

  double best_score = 0.0;
  LinkSet best;
  auto rec = [&](auto&& self, std::size_t i, std::uint64_t chosen, std::uint64_t blocked,
                 double score) -> void {
    if (i == count) {
      if (better(score, LinkSet(chosen), best_score, best)) {
        best_score = score;
        best = LinkSet(chosen);
      }
      return;
    }
    // Slack keeps exact ties reachable despite rounding in the bound.
    if (score + suffix[i] < best_score * (1.0 - 1e-12)) return;
    const std::size_t e = cand[i];
    const std::uint64_t bit = std::uint64_t{1} << e;
    if (!(blocked & bit)) self(self, i + 1, chosen | bit, blocked | im.neighbours(e), score + scores[e]);
    self(self, i + 1, chosen, blocked, score);
  };
  rec(rec, 0, 0, 0, 0.0);
  return best;
}

inline LinkSet best_listed_set(const ExplicitSets& rule, std::span<const double> scores) {
  double best_score = 0.0;
  LinkSet best;
  for (const auto& m : rule.sets) {
    const double s = set_score(m, scores);
    if (better(s, m, best_score, best)) {
      best_score = s;
      best = m;
    }
  }
  return best;
}

}  // namespace detail

// A feasible set maximizing the sum of nonnegative per-link scores. Ties go to
// the lexicographically smallest index set. For subset-closed models links with
// zero score are never returned; for ExplicitSets the winning listed set is
// returned as stored.
inline LinkSet max_weight_set(const InterferenceModel& im, std::span<const double> scores) {
  if (scores.size() != im.n_links()) throw InvalidInput("score vector length differs from link count");
  return std::visit(
      [&](const auto& rule) -> LinkSet {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, KOfN>) {
          return detail::top_k(scores, rule.k);
        } else if constexpr (std::is_same_v<R, ConflictGraph>) {
          return detail::best_independent_set(im, scores);
        } else {
          return detail::best_listed_set(rule, scores);
        }
      },
      im.rule());
}

}  // namespace aoi
