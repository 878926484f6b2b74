#pragma once

// Slotted-time simulation of the age process
//   A_e(t+1) = 1 + A_e(t) - U_e(t) S_e(t) A_e(t),  A_e(0) = 0,
// with ratio-of-sums peak-age and time-average age estimators, and the exact
// pathwise identities those estimators satisfy.
//
// Within a slot: sample channel -> policy decides -> successes U_e S_e ->
// sums accumulate the pre-update age A_e(t) -> ages update.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "aoi/error.hpp"
#include "aoi/model.hpp"
#include "aoi/policies.hpp"
#include "aoi/rng.hpp"

namespace aoi {

// Sums stay below T^2, so 64-bit integers are exact for T up to this horizon.
inline constexpr std::int64_t kMaxHorizon = std::int64_t{1} << 31;

struct LinkTotals {
  std::int64_t sum_age = 0;          // sum A(t)
  std::int64_t sum_peak = 0;         // sum U S A(t)
  std::int64_t sum_peak_sq = 0;      // sum U S A(t)^2
  std::int64_t successes = 0;        // sum U S
  std::int64_t peak_samples = 0;     // sum U S 1{A(t) >= 1}
  std::int64_t final_age = 0;        // A(T)
};

// Network-level running estimates after the first t slots.
struct Checkpoint {
  std::int64_t t = 0;
  double peak_age = 0.0;
  double avg_age = 0.0;
};

struct Trajectory {
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<LinkTotals> links;
  std::vector<Checkpoint> checkpoints;
};

struct MetricsReport {
  std::vector<double> peak_age;       // per link; +inf when the link never succeeded
  std::vector<double> peak_age_se;    // standard error of the per-link peak estimate
  std::vector<double> avg_age;        // per link
  std::vector<double> success_rate;   // per link
  std::vector<bool> no_success;
  double peak_age_total = 0.0;        // sum w_e peak_e
  double avg_age_total = 0.0;         // sum w_e avg_e

  bool any_flagged() const {
    for (bool b : no_success)
      if (b) return true;
    return false;
  }
};

struct SimulationResult {
  Trajectory trajectory;
  MetricsReport metrics;
};

struct RunOptions {
  std::vector<std::int64_t> checkpoints;  // slot counts at which to record running estimates
  bool check_feasibility = true;
};

namespace detail {

inline double peak_ratio(const LinkTotals& l) {
  // A success at age 0 (only possible in slot 0) is not an age peak.
  return l.peak_samples > 0 ? static_cast<double>(l.sum_peak) / static_cast<double>(l.peak_samples)
                            : std::numeric_limits<double>::infinity();
}

inline double network_peak(const std::vector<LinkTotals>& links, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t e = 0; e < links.size(); ++e) s += w[e] * peak_ratio(links[e]);
  return s;
}

}  // namespace detail

inline MetricsReport compute_metrics(const Trajectory& tr, const Network& net) {
  const std::size_t n = tr.links.size();
  const auto w = net.weights();
  const double horizon = static_cast<double>(tr.horizon);
  MetricsReport m;
  m.peak_age.resize(n);
  m.peak_age_se.resize(n);
  m.avg_age.resize(n);
  m.success_rate.resize(n);
  m.no_success.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    const auto& l = tr.links[e];
    m.peak_age[e] = detail::peak_ratio(l);
    m.no_success[e] = l.peak_samples == 0;
    if (l.peak_samples > 1) {
      const double k = static_cast<double>(l.peak_samples);
      const double mean = m.peak_age[e];
      const double var = std::max(static_cast<double>(l.sum_peak_sq) / k - mean * mean, 0.0);
      m.peak_age_se[e] = std::sqrt(var / (k - 1.0));
    } else {
      m.peak_age_se[e] = std::numeric_limits<double>::infinity();
    }
    m.avg_age[e] = static_cast<double>(l.sum_age) / horizon;
    m.success_rate[e] = static_cast<double>(l.successes) / horizon;
    m.peak_age_total += w[e] * m.peak_age[e];
    m.avg_age_total += w[e] * m.avg_age[e];
  }
  return m;
}

// Simulates T slots. Channel states come from stream 0 of `seed`, policy
// randomization from stream 1, so every policy sees the same channel path.
template <SchedulingPolicy Policy>
SimulationResult run(const Network& net, const InterferenceModel& im, Policy& policy, std::int64_t horizon,
                     std::uint64_t seed, const RunOptions& options = {}) {
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  if (horizon > kMaxHorizon) throw InvalidInput("horizon too large for exact 64-bit sums");
  if (net.n_links() != im.n_links()) throw InvalidInput("network and interference model disagree on N");
  const std::size_t n = net.n_links();

  RngStream channel_rng = RngStream::derive(seed, 0);
  RngStream policy_rng = RngStream::derive(seed, 1);

  Trajectory tr;
  tr.horizon = horizon;
  tr.seed = seed;
  tr.links.assign(n, {});
  std::vector<std::int64_t> age(n, 0);
  std::size_t next_cp = 0;
  const auto& cps = options.checkpoints;

  for (std::int64_t t = 0; t < horizon; ++t) {
    while (next_cp < cps.size() && cps[next_cp] <= t) {
      if (cps[next_cp] == t && t > 0) {
        double avg = 0.0;
        for (std::size_t e = 0; e < n; ++e)
          avg += net.weight(e) * static_cast<double>(tr.links[e].sum_age) / static_cast<double>(t);
        tr.checkpoints.push_back({t, detail::network_peak(tr.links, net.weights()), avg});
      }
      ++next_cp;
    }
    const ChannelState s = sample_channel(net, channel_rng);
    const LinkSet decision = policy.decide(s, std::span<const std::int64_t>(age), policy_rng);
    if (options.check_feasibility && !im.is_feasible(decision))
      throw std::logic_error("policy returned infeasible set " + decision.to_string());
    const LinkSet success = decision & s.on;
    for (std::size_t e = 0; e < n; ++e) {
      auto& l = tr.links[e];
      const std::int64_t a = age[e];
      l.sum_age += a;
      if (success.contains(e)) {
        l.sum_peak += a;
        l.sum_peak_sq += a * a;
        ++l.successes;
        if (a >= 1) ++l.peak_samples;
        age[e] = 1;
      } else {
        age[e] = a + 1;
      }
    }
  }
  for (std::size_t e = 0; e < n; ++e) tr.links[e].final_age = age[e];
  for (; next_cp < cps.size(); ++next_cp) {
    if (cps[next_cp] != horizon) continue;
    double avg = 0.0;
    for (std::size_t e = 0; e < n; ++e)
      avg += net.weight(e) * static_cast<double>(tr.links[e].sum_age) / static_cast<double>(horizon);
    tr.checkpoints.push_back({horizon, detail::network_peak(tr.links, net.weights()), avg});
  }

  SimulationResult out;
  out.metrics = compute_metrics(tr, net);
  out.trajectory = std::move(tr);
  return out;
}

// ---------------------------------------------------------------------------
// Pathwise identities (exact integer arithmetic)

// sum U S A + A(T) - T; zero on every path started from A(0) = 0.
inline std::vector<std::int64_t> check_conservation(const Trajectory& tr) {
  std::vector<std::int64_t> r;
  for (const auto& l : tr.links) r.push_back(l.sum_peak + l.final_age - tr.horizon);
  return r;
}

// T + 2 sum A - sum U S A^2 - 2 sum U S A - A(T)^2; zero on every path from A(0) = 0.
inline std::vector<std::int64_t> check_squared_identity(const Trajectory& tr) {
  std::vector<std::int64_t> r;
  for (const auto& l : tr.links)
    r.push_back(tr.horizon + 2 * l.sum_age - l.sum_peak_sq - 2 * l.sum_peak - l.final_age * l.final_age);
  return r;
}

// avg_e - [ (1/2T) sum U S (A^2 + beta A) + (1 - beta)/2 ]; a boundary term of order A(T)^2 / T.
inline std::vector<double> boundary_term_check(const Trajectory& tr, double beta) {
  const double horizon = static_cast<double>(tr.horizon);
  std::vector<double> gap;
  for (const auto& l : tr.links) {
    const double avg = static_cast<double>(l.sum_age) / horizon;
    const double b = static_cast<double>(l.sum_peak_sq) + beta * static_cast<double>(l.sum_peak);
    gap.push_back(avg - (0.5 * b / horizon + 0.5 * (1.0 - beta)));
  }
  return gap;
}

// 2 avg - sum w - peak; nonnegative in the long run for every policy.
inline double peak_average_slack(const MetricsReport& m, std::span<const double> weights) {
  double w = 0.0;
  for (double x : weights) w += x;
  return 2.0 * m.avg_age_total - w - m.peak_age_total;
}

struct DiagnosticsReport {
  std::vector<std::int64_t> conservation;
  std::vector<std::int64_t> squared_identity;
  std::vector<double> boundary_term_gap;
  double peak_avg_slack = 0.0;
  double beta = 0.0;
};

inline DiagnosticsReport diagnose(const SimulationResult& r, const Network& net, double beta) {
  return {check_conservation(r.trajectory), check_squared_identity(r.trajectory),
          boundary_term_check(r.trajectory, beta), peak_average_slack(r.metrics, net.weights()), beta};
}

}  // namespace aoi
