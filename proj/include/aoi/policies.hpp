#pragma once

// Scheduling policies. Every policy exposes
//
//   LinkSet decide(const ChannelState&, std::span<const std::int64_t> age, RngStream&)
//
// called once per slot with the current channel state and age vector; the
// returned set is activated for that slot. Policies keep only their own state.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aoi/error.hpp"
#include "aoi/link_set.hpp"
#include "aoi/max_weight.hpp"
#include "aoi/model.hpp"
#include "aoi/rng.hpp"

namespace aoi {

template <class P>
concept SchedulingPolicy =
    requires(P& p, const ChannelState& s, std::span<const std::int64_t> age, RngStream& rng) {
      { p.decide(s, age, rng) } -> std::same_as<LinkSet>;
    };

// ---------------------------------------------------------------------------
// Virtual-queue policy

struct VirtualQueueState {
  std::vector<double> q;  // Q_e(t) >= 1
  double v_param;         // V > 0

  VirtualQueueState(std::size_t n, double v) : q(n, 1.0), v_param(v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("V must be positive");
  }
};

// Activates argmax sum w_e Q_e S_e, then applies
// Q_e <- max{Q_e + sqrt(V / Q_e) - U_e S_e, 1}.
inline LinkSet pi_q_step(VirtualQueueState& state, const ChannelState& s, const Network& net,
                         const InterferenceModel& im) {
  const std::size_t n = net.n_links();
  double scores[kMaxLinks];
  const auto w = net.weights();
  for (std::size_t e = 0; e < n; ++e) scores[e] = s[e] ? w[e] * state.q[e] : 0.0;
  const LinkSet decision = max_weight_set(im, std::span<const double>(scores, n));
  for (std::size_t e = 0; e < n; ++e) {
    const double served = (decision.contains(e) && s[e]) ? 1.0 : 0.0;
    const double next = state.q[e] + std::sqrt(state.v_param / state.q[e]) - served;
    state.q[e] = std::max(next, 1.0);
  }
  return decision;
}

class VirtualQueuePolicy {
 public:
  VirtualQueuePolicy(Network net, InterferenceModel im, double v)
      : net_(std::move(net)), im_(std::move(im)), state_(net_.n_links(), v) {}

  LinkSet decide(const ChannelState& s, std::span<const std::int64_t>, RngStream&) {
    return pi_q_step(state_, s, net_, im_);
  }

  const VirtualQueueState& state() const noexcept { return state_; }

 private:
  Network net_;
  InterferenceModel im_;
  VirtualQueueState state_;
};

// ---------------------------------------------------------------------------
// Age-based policy

struct AgeBasedParams {
  double beta = 1.0;
};

// Activates argmax sum w_e S_e max{A_e^2 + beta A_e, 0}. Negative per-link
// values are floored so such links are never chosen.
inline LinkSet pi_a_step(std::span<const std::int64_t> age, const ChannelState& s, const Network& net,
                         const InterferenceModel& im, AgeBasedParams params) {
  const std::size_t n = net.n_links();
  double scores[kMaxLinks];
  const auto w = net.weights();
  for (std::size_t e = 0; e < n; ++e) {
    if (!s[e]) {
      scores[e] = 0.0;
      continue;
    }
    const double a = static_cast<double>(age[e]);
    scores[e] = w[e] * std::max(a * a + params.beta * a, 0.0);
  }
  return max_weight_set(im, std::span<const double>(scores, n));
}

class AgeBasedPolicy {
 public:
  AgeBasedPolicy(Network net, InterferenceModel im, AgeBasedParams params)
      : net_(std::move(net)), im_(std::move(im)), params_(params) {}

  LinkSet decide(const ChannelState& s, std::span<const std::int64_t> age, RngStream&) {
    return pi_a_step(age, s, net_, im_, params_);
  }

 private:
  Network net_;
  InterferenceModel im_;
  AgeBasedParams params_;
};

// ---------------------------------------------------------------------------
// Stationary (channel-blind) policies

struct MixtureEntry {
  LinkSet set;
  double probability;
};

// Activation sets with fixed per-slot probabilities x_m; the remainder idles.
class SetMixture {
 public:
  SetMixture() = default;

  SetMixture(const InterferenceModel& im, std::vector<MixtureEntry> entries)
      : n_(im.n_links()), entries_(std::move(entries)) {
    double total = 0.0;
    for (const auto& [m, x] : entries_) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("mixture probabilities must be nonnegative");
      if (!im.is_feasible(m)) throw InvalidInput("mixture set " + m.to_string() + " is not feasible");
      total += x;
    }
    if (total > 1.0 + 1e-9) throw InvalidInput("mixture probabilities sum to more than 1");
  }

  std::size_t n_links() const noexcept { return n_; }
  std::span<const MixtureEntry> entries() const noexcept { return entries_; }

  double total() const noexcept {
    double t = 0.0;
    for (const auto& en : entries_) t += en.probability;
    return t;
  }

 private:
  std::size_t n_ = 0;
  std::vector<MixtureEntry> entries_;
};

// f_e = sum over sets containing e of x_m.
inline std::vector<double> marginals(const SetMixture& mixture) {
  const std::size_t n_links = mixture.n_links();
  std::vector<double> f(n_links, 0.0);
  for (const auto& [m, x] : mixture.entries())
    m.for_each([&](std::size_t e) {
      if (e < n_links) f[e] += x;
    });
  for (double& v : f) v = std::min(v, 1.0);
  return f;
}

inline LinkSet stationary_step(const SetMixture& mixture, RngStream& rng) {
  double u = rng.uniform();
  for (const auto& [m, x] : mixture.entries()) {
    if (u < x) return m;
    u -= x;
  }
  return {};
}

class StationaryPolicy {
 public:
  explicit StationaryPolicy(SetMixture mixture) : mixture_(std::move(mixture)) {}

  LinkSet decide(const ChannelState&, std::span<const std::int64_t>, RngStream& rng) {
    return stationary_step(mixture_, rng);
  }

  const SetMixture& mixture() const noexcept { return mixture_; }

 private:
  SetMixture mixture_;
};

// ---------------------------------------------------------------------------
// S-only policies, stored as a mixture of max-weight direction rules

struct DirectionRule {
  std::vector<double> direction;  // c, nonnegative
  double weight;                  // lambda
};

// Applies rule c to state S: argmax over feasible m of sum_{e in m, S_e = 1} c_e.
inline LinkSet apply_direction_rule(const DirectionRule& rule, const ChannelState& s,
                                    const InterferenceModel& im) {
  const std::size_t n = im.n_links();
  double scores[kMaxLinks];
  for (std::size_t e = 0; e < n; ++e) scores[e] = s[e] ? rule.direction[e] : 0.0;
  return max_weight_set(im, std::span<const double>(scores, n));
}

class SOnlyPolicy {
 public:
  SOnlyPolicy(InterferenceModel im, std::vector<DirectionRule> rules)
      : im_(std::move(im)), rules_(std::move(rules)) {
    if (rules_.empty()) throw InvalidInput("S-only policy needs at least one rule");
    double total = 0.0;
    for (const auto& r : rules_) {
      if (r.direction.size() != im_.n_links()) throw InvalidInput("direction length differs from link count");
      for (double c : r.direction)
        if (!(c >= 0.0)) throw InvalidInput("direction entries must be nonnegative");
      if (!(r.weight >= 0.0)) throw InvalidInput("rule weights must be nonnegative");
      total += r.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("rule weights must sum to 1");
  }

  std::span<const DirectionRule> rules() const noexcept { return rules_; }
  const InterferenceModel& interference() const noexcept { return im_; }

  LinkSet decide(const ChannelState& s, std::span<const std::int64_t>, RngStream& rng) {
    return s_only_step(*this, s, rng);
  }

  friend LinkSet s_only_step(const SOnlyPolicy& policy, const ChannelState& s, RngStream& rng) {
    double u = rng.uniform();
    const auto& rules = policy.rules_;
    std::size_t pick = rules.size() - 1;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (u < rules[i].weight) {
        pick = i;
        break;
      }
      u -= rules[i].weight;
    }
    return apply_direction_rule(rules[pick], s, policy.im_);
  }

 private:
  InterferenceModel im_;
  std::vector<DirectionRule> rules_;
};

// ---------------------------------------------------------------------------
// Priority policy

// Greedily adds ON links in priority order while the set stays feasible, then
// fills remaining room with OFF links in the same order.
inline LinkSet priority_step(std::span<const std::size_t> order, const ChannelState& s,
                             const InterferenceModel& im) {
  LinkSet m;
  for (int pass = 0; pass < 2; ++pass) {
    const bool want_on = pass == 0;
    for (std::size_t e : order) {
      if (s[e] != want_on || m.contains(e)) continue;
      LinkSet trial = m | LinkSet::single(e);
      if (im.is_feasible(trial)) m = trial;
    }
  }
  return m;
}

class PriorityPolicy {
 public:
  PriorityPolicy(InterferenceModel im, std::vector<std::size_t> order)
      : im_(std::move(im)), order_(std::move(order)) {
    const std::size_t n = im_.n_links();
    if (order_.size() != n) throw InvalidInput("priority order must list every link once");
    std::vector<bool> seen(n, false);
    for (auto e : order_) {
      if (e >= n || seen[e]) throw InvalidInput("priority order is not a permutation");
      seen[e] = true;
    }
  }

  LinkSet decide(const ChannelState& s, std::span<const std::int64_t>, RngStream&) {
    return priority_step(order_, s, im_);
  }

 private:
  InterferenceModel im_;
  std::vector<std::size_t> order_;
};

// Activates the same set every slot (empty set: never schedule).
class FixedSetPolicy {
 public:
  explicit FixedSetPolicy(LinkSet set = {}) : set_(set) {}

  LinkSet decide(const ChannelState&, std::span<const std::int64_t>, RngStream&) { return set_; }

 private:
  LinkSet set_;
};

// ---------------------------------------------------------------------------

// Runtime-selected policy.
class AnyPolicy {
 public:
  using Variant = std::variant<VirtualQueuePolicy, AgeBasedPolicy, StationaryPolicy, SOnlyPolicy,
                               PriorityPolicy, FixedSetPolicy>;

  template <class P>
    requires std::constructible_from<Variant, P&&>
  AnyPolicy(P&& p) : impl_(std::forward<P>(p)) {}

  LinkSet decide(const ChannelState& s, std::span<const std::int64_t> age, RngStream& rng) {
    return std::visit([&](auto& p) { return p.decide(s, age, rng); }, impl_);
  }

  const Variant& get() const noexcept { return impl_; }

 private:
  Variant impl_;
};

static_assert(SchedulingPolicy<VirtualQueuePolicy>);
static_assert(SchedulingPolicy<AgeBasedPolicy>);
static_assert(SchedulingPolicy<StationaryPolicy>);
static_assert(SchedulingPolicy<SOnlyPolicy>);
static_assert(SchedulingPolicy<PriorityPolicy>);
static_assert(SchedulingPolicy<FixedSetPolicy>);
static_assert(SchedulingPolicy<AnyPolicy>);

}  // namespace aoi
