#pragma once

// Network description, interference structure, and the i.i.d. ON/OFF channel.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "aoi/error.hpp"
#include "aoi/link_set.hpp"
#include "aoi/rng.hpp"

namespace aoi {

// Links with weights w_e > 0 and per-slot ON probabilities gamma_e in (0, 1].
class Network {
 public:
  Network(std::vector<double> weights, std::vector<double> gamma)
      : weights_(std::move(weights)), gamma_(std::move(gamma)) {
    if (weights_.empty()) throw InvalidInput("network needs at least one link");
    if (weights_.size() > kMaxLinks)
      throw InvalidInput("network has " + std::to_string(weights_.size()) + " links; at most " +
                         std::to_string(kMaxLinks) + " are supported");
    if (gamma_.size() != weights_.size())
      throw InvalidInput("weights and gamma lengths differ (" + std::to_string(weights_.size()) +
                         " vs " + std::to_string(gamma_.size()) + ")");
    for (std::size_t e = 0; e < weights_.size(); ++e) {
      if (!(weights_[e] > 0.0) || !std::isfinite(weights_[e]))
        throw InvalidInput("weight of link " + std::to_string(e) + " must be positive");
      if (!(gamma_[e] > 0.0 && gamma_[e] <= 1.0))
        throw InvalidInput("gamma of link " + std::to_string(e) + " must lie in (0, 1]");
    }
  }

  static Network uniform(std::size_t n, double weight, double gamma) {
    return Network(std::vector<double>(n, weight), std::vector<double>(n, gamma));
  }

  // n links, the last n_bad of which use gamma_bad.
  static Network good_bad(std::size_t n, std::size_t n_bad, double gamma_good, double gamma_bad,
                          double weight = 1.0) {
    if (n_bad > n) throw InvalidInput("n_bad exceeds the number of links");
    std::vector<double> gamma(n, gamma_good);
    for (std::size_t e = n - n_bad; e < n; ++e) gamma[e] = gamma_bad;
    return Network(std::vector<double>(n, weight), std::move(gamma));
  }

  std::size_t n_links() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> gamma() const noexcept { return gamma_; }
  double weight(std::size_t e) const { return weights_.at(e); }
  double gamma(std::size_t e) const { return gamma_.at(e); }

  double total_weight() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> gamma_;
};

// Any set of at most k links may be active together.
struct KOfN {
  std::size_t k;
};

// Feasible sets are the independent sets of an undirected conflict graph.
struct ConflictGraph {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

// An arbitrary listed collection (not necessarily subset-closed); the empty set is implicit.
struct ExplicitSets {
  std::vector<LinkSet> sets;
};

class InterferenceModel {
 public:
  using Rule = std::variant<KOfN, ConflictGraph, ExplicitSets>;

  InterferenceModel(std::size_t n_links, Rule rule) : n_(n_links), rule_(std::move(rule)) {
    if (n_ == 0 || n_ > kMaxLinks) throw InvalidInput("interference model: bad link count");
    if (auto* k = std::get_if<KOfN>(&rule_)) {
      if (k->k < 1 || k->k > n_)
        throw InvalidInput("K must satisfy 1 <= K <= N (K=" + std::to_string(k->k) + ")");
    } else if (auto* g = std::get_if<ConflictGraph>(&rule_)) {
      adjacency_.assign(n_, 0);
      for (auto [a, b] : g->edges) {
        if (a >= n_ || b >= n_)
          throw InvalidInput("conflict edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") references an invalid link");
        if (a == b) throw InvalidInput("conflict graph self-loop on link " + std::to_string(a));
        adjacency_[a] |= std::uint64_t{1} << b;
        adjacency_[b] |= std::uint64_t{1} << a;
      }
    } else {
      for (const auto& m : std::get<ExplicitSets>(rule_).sets)
        if (!m.within(n_)) throw InvalidInput("explicit set " + m.to_string() + " has an invalid link index");
    }
  }

  static InterferenceModel k_of_n(std::size_t n, std::size_t k) { return {n, KOfN{k}}; }
  static InterferenceModel conflict_graph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
    return {n, ConflictGraph{std::move(edges)}};
  }
  static InterferenceModel explicit_sets(std::size_t n, std::vector<LinkSet> sets) {
    return {n, ExplicitSets{std::move(sets)}};
  }

  std::size_t n_links() const noexcept { return n_; }
  const Rule& rule() const noexcept { return rule_; }

  // Neighbour mask of link e (conflict graph only).
  std::uint64_t neighbours(std::size_t e) const { return adjacency_.at(e); }

  bool is_feasible(LinkSet m) const {
    if (!m.within(n_)) throw InvalidInput("link set " + m.to_string() + " has an invalid link index");
    if (m.empty()) return true;
    if (auto* k = std::get_if<KOfN>(&rule_)) return m.size() <= k->k;
    if (std::holds_alternative<ConflictGraph>(rule_)) {
      bool ok = true;
      m.for_each([&](std::size_t e) { ok = ok && (adjacency_[e] & m.bits()) == 0; });
      return ok;
    }
    for (const auto& s : std::get<ExplicitSets>(rule_).sets)
      if (s == m) return true;
    return false;
  }

  bool is_feasible(std::span<const std::size_t> m) const {
    LinkSet s;
    for (auto e : m) {
      if (e >= n_) throw InvalidInput("link index " + std::to_string(e) + " out of range");
      s.insert(e);
    }
    return is_feasible(s);
  }

  bool subset_closed() const noexcept { return !std::holds_alternative<ExplicitSets>(rule_); }

 private:
  std::size_t n_;
  Rule rule_;
  std::vector<std::uint64_t> adjacency_;
};

// Sizes first, then lexicographic; the order enumerate_feasible_sets returns.
inline bool size_lex_less(LinkSet a, LinkSet b) noexcept {
  if (a.size() != b.size()) return a.size() < b.size();
  return lex_less(a, b);
}

namespace detail {

// Visits every nonempty subset of `candidates` of size <= max_size that is
// independent in `adjacency` (all of them when adjacency is empty).
template <class F>
void visit_independent(std::span<const std::uint64_t> adjacency, std::uint64_t candidates,
                       std::size_t max_size, F&& visit) {
  auto rec = [&](auto&& self, std::uint64_t chosen, std::uint64_t open, std::size_t depth) -> void {
    while (open) {
      const int e = std::countr_zero(open);
      open &= open - 1;
      const std::uint64_t next = chosen | (std::uint64_t{1} << e);
      visit(LinkSet(next));
      if (depth + 1 < max_size) {
        const std::uint64_t blocked = adjacency.empty() ? 0 : adjacency[static_cast<std::size_t>(e)];
        self(self, next, open & ~blocked, depth + 1);
      }
    }
  };
  if (max_size > 0) rec(rec, 0, candidates, 0);
}

}  // namespace detail

// All nonempty feasible sets, ordered by size then lexicographically. For
// ExplicitSets the stored list is returned (deduplicated, same order).
inline std::vector<LinkSet> enumerate_feasible_sets(const InterferenceModel& im, std::size_t cap) {
  const std::size_t n = im.n_links();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  std::vector<LinkSet> out;
  auto push = [&](LinkSet m) {
    if (out.size() >= cap) throw InstanceTooLarge("instance too large for exhaustive oracle");
    out.push_back(m);
  };
  std::visit(
      [&](const auto& rule) {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, KOfN>) {
          detail::visit_independent({}, all, rule.k, push);
        } else if constexpr (std::is_same_v<R, ConflictGraph>) {
          std::vector<std::uint64_t> adj(n);
          for (std::size_t e = 0; e < n; ++e) adj[e] = im.neighbours(e);
          detail::visit_independent(adj, all, n, push);
        } else {
          for (const auto& m : rule.sets) {
            if (m.empty()) continue;
            bool seen = false;
            for (const auto& o : out) seen = seen || o == m;
            if (!seen) push(m);
          }
        }
      },
      im.rule());
  std::stable_sort(out.begin(), out.end(), size_lex_less);
  return out;
}

// Per-slot channel state S(t); bit e set iff link e is ON.
struct ChannelState {
  LinkSet on;
  std::size_t n_links = 0;

  bool operator[](std::size_t e) const noexcept { return on.contains(e); }
};

// One uniform draw per link, consumed in increasing link index.
inline ChannelState sample_channel(const Network& net, RngStream& rng) {
  ChannelState s{LinkSet{}, net.n_links()};
  const auto gamma = net.gamma();
  std::uint64_t bits = 0;
  for (std::size_t e = 0; e < gamma.size(); ++e)
    if (rng.uniform() < gamma[e]) bits |= std::uint64_t{1} << e;
  s.on = LinkSet(bits);
  return s;
}

}  // namespace aoi
