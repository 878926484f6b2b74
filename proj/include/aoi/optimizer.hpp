#pragma once

// Peak-age optimization over the stationary (channel-blind) rate region and
// over the S-only region Lambda_S(gamma), plus the closed-form K-of-N solution
// and the age bounds built on those optima.
//
// Both solvers minimize g(a) = sum_e coef_e / a_e over the convex hull of a
// vertex family whose linear-minimization oracle is a max-weight activation.
// The iterate is kept as an explicit convex combination of vertices, so the
// result is directly an executable randomized policy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aoi/error.hpp"
#include "aoi/link_set.hpp"
#include "aoi/max_weight.hpp"
#include "aoi/model.hpp"
#include "aoi/policies.hpp"

namespace aoi {

enum class StepRule {
  // Pairwise Frank-Wolfe with exact line search (linear rate on polytopes).
  pairwise_line_search,
  // Classic 2/(k+2) steps, halved until the objective does not increase.
  open_loop,
};

struct SolverSettings {
  std::size_t max_iterations = 20000;
  double gap_tolerance = 1e-7;
  std::size_t state_enumeration_cap = 16;
  StepRule step_rule = StepRule::pairwise_line_search;
  // Oracle-free pairwise steps over the active atoms after each iteration.
  std::size_t corrective_steps = 50;

  void validate() const {
    if (!(gap_tolerance > 0.0)) throw InvalidInput("gap tolerance must be positive");
    if (max_iterations == 0) throw InvalidInput("max_iterations must be positive");
  }
};

inline constexpr double kRateFloor = 1e-12;

// g(a) = sum coef_e / a_e; +inf when some a_e = 0 with coef_e > 0.
inline double inverse_rate_objective(std::span<const double> coef, std::span<const double> rate) {
  double g = 0.0;
  for (std::size_t e = 0; e < coef.size(); ++e) {
    if (coef[e] == 0.0) continue;
    if (rate[e] <= 0.0) return std::numeric_limits<double>::infinity();
    g += coef[e] / rate[e];
  }
  return g;
}

template <class Payload>
struct Atom {
  Payload payload;
  std::vector<double> rate;
  double weight = 0.0;
};

template <class Payload>
struct FrankWolfeResult {
  std::vector<Atom<Payload>> atoms;
  std::vector<double> rate;
  double value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;  // objective after each iteration
};

namespace detail {

inline double floored_objective(std::span<const double> coef, std::span<const double> rate) {
  double g = 0.0;
  for (std::size_t e = 0; e < coef.size(); ++e) g += coef[e] / std::max(rate[e], kRateFloor);
  return g;
}

template <class Payload>
std::vector<double> combine(const std::vector<Atom<Payload>>& atoms, std::size_t n) {
  std::vector<double> r(n, 0.0);
  for (const auto& a : atoms)
    for (std::size_t e = 0; e < n; ++e) r[e] += a.weight * a.rate[e];
  return r;
}

// Minimizes phi(t) = g(x + t d) on [0, t_max]; phi is convex with phi'(0) < 0.
inline double line_search(std::span<const double> coef, std::span<const double> x,
                          std::span<const double> d, double t_max) {
  auto slope = [&](double t) {
    double s = 0.0;
    for (std::size_t e = 0; e < coef.size(); ++e) {
      if (d[e] == 0.0) continue;
      const double r = std::max(x[e] + t * d[e], kRateFloor);
      s -= coef[e] * d[e] / (r * r);
    }
    return s;
  };
  if (slope(t_max) <= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * t_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? hi : lo) = mid;
  }
  return lo;
}

// Pairwise steps restricted to the active atoms (no oracle calls), until the
// gap over the active face drops below `tol`.
template <class Payload>
void correct_weights(std::span<const double> coef, std::vector<Atom<Payload>>& atoms, std::vector<double>& x,
                     std::size_t max_steps, double tol) {
  const std::size_t n = coef.size();
  std::vector<double> scores(n), d(n);
  for (std::size_t step = 0; step < max_steps && atoms.size() > 1; ++step) {
    for (std::size_t e = 0; e < n; ++e) {
      const double r = std::max(x[e], kRateFloor);
      scores[e] = coef[e] / (r * r);
    }
    std::size_t best = 0, worst = 0;
    double best_s = -std::numeric_limits<double>::infinity(), worst_s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      double s = 0.0;
      for (std::size_t e = 0; e < n; ++e) s += scores[e] * atoms[i].rate[e];
      if (s > best_s) best_s = s, best = i;
      if (s < worst_s) worst_s = s, worst = i;
    }
    if (best_s - worst_s <= tol) break;
    for (std::size_t e = 0; e < n; ++e) d[e] = atoms[best].rate[e] - atoms[worst].rate[e];
    const double t_max = atoms[worst].weight;
    const double t = line_search(coef, x, d, t_max);
    if (t <= 0.0) break;
    atoms[best].weight += t;
    atoms[worst].weight = (t == t_max) ? 0.0 : atoms[worst].weight - t;
    std::erase_if(atoms, [](const Atom<Payload>& a) { return !(a.weight > 0.0); });
    x = combine(atoms, n);
  }
}

}  // namespace detail

// Frank-Wolfe on g over conv{vertex rates}. `oracle(scores)` returns the
// vertex maximizing <scores, rate>; scores are -grad g = coef / a^2.
// `atoms` must start as a convex combination with every a_e > 0.
template <class Payload, class Oracle>
FrankWolfeResult<Payload> minimize_inverse_rate(std::span<const double> coef,
                                                std::vector<Atom<Payload>> atoms, Oracle&& oracle,
                                                const SolverSettings& settings) {
  settings.validate();
  const std::size_t n = coef.size();
  FrankWolfeResult<Payload> res;
  std::vector<double> x = detail::combine(atoms, n);
  std::vector<double> scores(n), d(n), trial(n);
  double g = detail::floored_objective(coef, x);
  double gap = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0;; ++k) {
    for (std::size_t e = 0; e < n; ++e) {
      const double r = std::max(x[e], kRateFloor);
      scores[e] = coef[e] / (r * r);
    }
    Atom<Payload> v = oracle(std::span<const double>(scores));
    gap = 0.0;
    for (std::size_t e = 0; e < n; ++e) gap += scores[e] * (v.rate[e] - x[e]);
    if (gap <= settings.gap_tolerance) {
      res.iterations = k;
      break;
    }
    if (k == settings.max_iterations) {
      throw SolverNonConvergence("Frank-Wolfe did not reach the gap tolerance in " +
                                     std::to_string(settings.max_iterations) + " iterations",
                                 gap);
    }

    auto find_atom = [&](const std::vector<double>& rate) -> Atom<Payload>* {
      for (auto& a : atoms)
        if (a.rate == rate) return &a;
      return nullptr;
    };

    if (settings.step_rule == StepRule::pairwise_line_search) {
      std::size_t away = 0;
      double away_score = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        double s = 0.0;
        for (std::size_t e = 0; e < n; ++e) s += scores[e] * atoms[i].rate[e];
        if (s < away_score) {
          away_score = s;
          away = i;
        }
      }
      for (std::size_t e = 0; e < n; ++e) d[e] = v.rate[e] - atoms[away].rate[e];
      const double t_max = atoms[away].weight;
      const double t = detail::line_search(coef, x, d, t_max);
      atoms[away].weight = (t == t_max) ? 0.0 : atoms[away].weight - t;
      if (auto* a = find_atom(v.rate)) {
        a->weight += t;
      } else {
        v.weight = t;
        atoms.push_back(std::move(v));
      }
    } else {
      double step = 2.0 / (static_cast<double>(k) + 2.0);
      for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
        for (std::size_t e = 0; e < n; ++e) trial[e] = (1.0 - step) * x[e] + step * v.rate[e];
        if (detail::floored_objective(coef, trial) <= g) break;
      }
      if (detail::floored_objective(coef, trial) > g) step = 0.0;
      for (auto& a : atoms) a.weight *= (1.0 - step);
      if (auto* a = find_atom(v.rate)) {
        a->weight += step;
      } else {
        v.weight = step;
        atoms.push_back(std::move(v));
      }
    }
    std::erase_if(atoms, [](const Atom<Payload>& a) { return !(a.weight > 0.0); });
    x = detail::combine(atoms, n);
    if (settings.step_rule == StepRule::pairwise_line_search)
      detail::correct_weights(coef, atoms, x, settings.corrective_steps, 0.1 * settings.gap_tolerance);
    g = detail::floored_objective(coef, x);
    res.history.push_back(g);
  }

  for (std::size_t e = 0; e < n; ++e)
    if (coef[e] > 0.0 && x[e] < kRateFloor)
      throw std::logic_error("rate floor active at the Frank-Wolfe solution");
  res.atoms = std::move(atoms);
  res.rate = std::move(x);
  res.value = inverse_rate_objective(coef, res.rate);
  res.gap = gap;
  return res;
}

// ---------------------------------------------------------------------------
// Channel-blind optimum: minimize sum w_e / (gamma_e f_e) over f = Mx, 1'x <= 1.

struct UnknownPeakSolution {
  SetMixture mixture;
  std::vector<double> f;
  double value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;
};

namespace detail {

// For each link, one feasible set containing it.
inline std::vector<LinkSet> covering_sets(const InterferenceModel& im) {
  const std::size_t n = im.n_links();
  std::vector<LinkSet> cover(n);
  if (const auto* listed = std::get_if<ExplicitSets>(&im.rule())) {
    for (std::size_t e = 0; e < n; ++e) {
      bool found = false;
      for (const auto& m : listed->sets)
        if (m.contains(e) && (!found || size_lex_less(m, cover[e]))) {
          cover[e] = m;
          found = true;
        }
      if (!found) throw UnschedulableLink(e);
    }
  } else {
    for (std::size_t e = 0; e < n; ++e) cover[e] = LinkSet::single(e);
  }
  return cover;
}

inline std::vector<double> indicator(LinkSet m, std::size_t n) {
  std::vector<double> r(n, 0.0);
  m.for_each([&](std::size_t e) { r[e] = 1.0; });
  return r;
}

inline void check_sizes(const Network& net, const InterferenceModel& im) {
  if (net.n_links() != im.n_links()) throw InvalidInput("network and interference model disagree on N");
}

}  // namespace detail

inline UnknownPeakSolution solve_unknown_peak(const Network& net, const InterferenceModel& im,
                                              const SolverSettings& settings = {}) {
  detail::check_sizes(net, im);
  const std::size_t n = net.n_links();
  std::vector<double> coef(n);
  for (std::size_t e = 0; e < n; ++e) coef[e] = net.weight(e) / net.gamma(e);

  std::vector<Atom<LinkSet>> atoms;
  for (LinkSet m : detail::covering_sets(im)) {
    auto it = std::find_if(atoms.begin(), atoms.end(), [&](const auto& a) { return a.payload == m; });
    if (it == atoms.end()) atoms.push_back({m, detail::indicator(m, n), 0.0});
  }
  for (auto& a : atoms) a.weight = 1.0 / static_cast<double>(atoms.size());

  auto oracle = [&](std::span<const double> scores) {
    const LinkSet m = max_weight_set(im, scores);
    return Atom<LinkSet>{m, detail::indicator(m, n), 0.0};
  };
  auto fw = minimize_inverse_rate<LinkSet>(coef, std::move(atoms), oracle, settings);

  std::vector<MixtureEntry> entries;
  for (const auto& a : fw.atoms) entries.push_back({a.payload, a.weight});
  std::sort(entries.begin(), entries.end(),
            [](const MixtureEntry& a, const MixtureEntry& b) { return size_lex_less(a.set, b.set); });
  UnknownPeakSolution out;
  out.mixture = SetMixture(im, std::move(entries));
  out.f = marginals(out.mixture);
  out.value = inverse_rate_objective(coef, out.f);
  out.gap = fw.gap;
  out.iterations = fw.iterations;
  out.history = std::move(fw.history);
  return out;
}

// ---------------------------------------------------------------------------
// K-of-N closed form: f_e = min(1, nu sqrt(w_e / gamma_e)) with sum f = min(K, N).

struct KOfNSolution {
  std::vector<double> f;
  double value = 0.0;
};

inline KOfNSolution solve_kofn_closed_form(const Network& net, std::size_t k) {
  const std::size_t n = net.n_links();
  if (k < 1) throw InvalidInput("K must be at least 1");
  std::vector<double> root(n);
  for (std::size_t e = 0; e < n; ++e) root[e] = std::sqrt(net.weight(e) / net.gamma(e));

  auto alloc = [&](double nu, std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      f[e] = std::min(1.0, nu * root[e]);
      s += f[e];
    }
    return s;
  };

  KOfNSolution out;
  out.f.assign(n, 1.0);
  if (k < n) {
    const double target = static_cast<double>(k);
    double lo = 0.0;
    double hi = 1.0 / *std::min_element(root.begin(), root.end());  // every f_e = 1
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (alloc(mid, out.f) < target ? lo : hi) = mid;
    }
    alloc(0.5 * (lo + hi), out.f);
  }
  for (std::size_t e = 0; e < n; ++e) out.value += net.weight(e) / (net.gamma(e) * out.f[e]);
  return out;
}

// ---------------------------------------------------------------------------
// Channel-aware optimum: minimize sum w_e / a_e over a in Lambda_S(gamma).

// Probability of every channel state, indexed by its ON mask.
inline std::vector<double> state_probabilities(const Network& net) {
  const std::size_t n = net.n_links();
  std::vector<double> p(std::size_t{1} << n, 1.0);
  for (std::size_t s = 0; s < p.size(); ++s)
    for (std::size_t e = 0; e < n; ++e) p[s] *= ((s >> e) & 1U) ? net.gamma(e) : 1.0 - net.gamma(e);
  return p;
}

// Exact success rates a_e = sum_S Pr(S) 1{e in m(S), S_e = 1} of one direction rule.
inline std::vector<double> direction_rule_rates(const InterferenceModel& im, std::span<const double> state_prob,
                                                std::span<const double> direction) {
  const std::size_t n = im.n_links();
  std::vector<double> rate(n, 0.0);
  double scores[kMaxLinks];
  for (std::uint64_t s = 1; s < state_prob.size(); ++s) {
    if (state_prob[s] == 0.0) continue;
    for (std::size_t e = 0; e < n; ++e) scores[e] = ((s >> e) & 1U) ? direction[e] : 0.0;
    const LinkSet m = max_weight_set(im, std::span<const double>(scores, n));
    (m & LinkSet(s)).for_each([&](std::size_t e) { rate[e] += state_prob[s]; });
  }
  return rate;
}

inline std::vector<double> s_only_rates(const Network& net, const SOnlyPolicy& policy) {
  const auto prob = state_probabilities(net);
  std::vector<double> rate(net.n_links(), 0.0);
  for (const auto& rule : policy.rules()) {
    const auto r = direction_rule_rates(policy.interference(), prob, rule.direction);
    for (std::size_t e = 0; e < rate.size(); ++e) rate[e] += rule.weight * r[e];
  }
  return rate;
}

struct KnownPeakSolution {
  SOnlyPolicy policy;
  std::vector<double> alpha;
  double value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;
};

inline KnownPeakSolution solve_known_peak(const Network& net, const InterferenceModel& im,
                                          const SolverSettings& settings = {}) {
  detail::check_sizes(net, im);
  settings.validate();
  const std::size_t n = net.n_links();
  if (n > settings.state_enumeration_cap)
    throw InstanceTooLarge("exact Lambda_S solve limited to small instances (N=" + std::to_string(n) +
                           " exceeds cap " + std::to_string(settings.state_enumeration_cap) + ")");
  detail::covering_sets(im);  // throws on unschedulable links

  const auto prob = state_probabilities(net);
  const std::vector<double> coef(net.weights().begin(), net.weights().end());

  // Start from the uniform mixture of single-link priority rules.
  std::vector<Atom<std::vector<double>>> atoms;
  for (std::size_t e = 0; e < n; ++e) {
    std::vector<double> c(n, 0.0);
    c[e] = 1.0;
    auto rate = direction_rule_rates(im, prob, c);
    atoms.push_back({std::move(c), std::move(rate), 1.0 / static_cast<double>(n)});
  }
  auto oracle = [&](std::span<const double> scores) {
    std::vector<double> c(scores.begin(), scores.end());
    auto rate = direction_rule_rates(im, prob, c);
    return Atom<std::vector<double>>{std::move(c), std::move(rate), 0.0};
  };
  auto fw = minimize_inverse_rate<std::vector<double>>(coef, std::move(atoms), oracle, settings);

  std::vector<DirectionRule> rules;
  double total = 0.0;
  for (const auto& a : fw.atoms) total += a.weight;
  for (auto& a : fw.atoms) rules.push_back({std::move(a.payload), a.weight / total});
  return KnownPeakSolution{SOnlyPolicy(im, std::move(rules)), fw.rate, fw.value, fw.gap, fw.iterations,
                           std::move(fw.history)};
}

// ---------------------------------------------------------------------------
// Bounds

inline double c1_beta(double beta) { return (10.0 + 2.0 * beta - beta * beta) / 4.0; }
inline double c2_beta(double beta) { return (4.0 + 2.0 * beta - beta * beta) / 2.0; }

inline double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Lower bound on the optimal average age from the optimal success rates.
inline double average_age_lower_bound(std::span<const double> alpha_star, std::span<const double> weights) {
  if (alpha_star.size() != weights.size()) throw InvalidInput("rate and weight lengths differ");
  double s = 0.0;
  for (std::size_t e = 0; e < weights.size(); ++e) {
    if (!(alpha_star[e] > 0.0)) throw InvalidInput("optimal rates must be positive");
    s += weights[e] / alpha_star[e];
  }
  return 0.5 * s + 0.5 * sum_of(weights);
}

// Peak-age guarantee of the virtual-queue policy with parameter V.
inline double virtual_queue_peak_bound(double peak_opt, std::span<const double> weights, double v) {
  if (!(v > 0.0)) throw InvalidInput("V must be positive");
  const double w = sum_of(weights);
  return peak_opt + 0.5 * w + w / (2.0 * v);
}

struct AgeBasedBounds {
  double peak_bound;
  double avg_bound;
};

// Factor-4 guarantees of the age-based policy. avg_reference may be the
// simulated average age of any policy, since it upper-bounds the optimum.
inline AgeBasedBounds age_based_bounds(double peak_opt, double avg_reference, std::span<const double> weights,
                                      double beta) {
  const double w = sum_of(weights);
  return {4.0 * peak_opt - c2_beta(beta) * w, 4.0 * avg_reference - c1_beta(beta) * w};
}

struct BoundReport {
  double peak_opt_unknown = 0.0;
  std::optional<double> peak_opt_known;
  double avg_age_lower_bound = 0.0;        // from the known-channel optimum when available
  double avg_age_lower_bound_unknown = 0.0; // same formula at the channel-blind optimum
  std::optional<double> virtual_queue_peak_bound;
  std::optional<double> age_based_peak_bound;
  std::optional<double> age_based_avg_bound;
  double c1 = 0.0;
  double c2 = 0.0;
  double v_param = 1.0;
  double beta = 1.0;
};

}  // namespace aoi
