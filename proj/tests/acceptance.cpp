// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "aoi/config.hpp"
#include "aoi/experiment.hpp"
#include "aoi/optimizer.hpp"
#include "aoi/policies.hpp"
#include "aoi/presets.hpp"
#include "aoi/simulator.hpp"

using namespace aoi;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

double se(const std::vector<double>& v) { return sd(v) / std::sqrt(static_cast<double>(v.size())); }

// Peak/average slacks (2 avg - sum w - peak) of every simulated run, grouped by (experiment, sweep value, policy).
std::map<std::string, std::vector<double>> g_slack;

void record_slack(const std::string& tag, const ExperimentResult& r) {
  for (const auto& row : r.rows)
    if (row.flagged.empty())
      g_slack[tag + "/" + format_number(row.sweep_value) + "/" + row.policy].push_back(row.peak_avg_slack);
}

// Seed-averaged column for one (sweep value, policy).
std::vector<double> column(const ExperimentResult& r, double sweep, const std::string& policy,
                           double ResultRow::*field) {
  std::vector<double> out;
  for (const auto& row : r.rows)
    if (row.policy == policy && (std::isnan(sweep) ? std::isnan(row.sweep_value) : row.sweep_value == sweep))
      out.push_back(row.*field);
  return out;
}

// Exact water-filling for the K-of-N channel-blind problem: f_e = min(1, nu r_e),
// r_e = sqrt(w_e / gamma_e), sum f = K. Saturates links in decreasing r order.
std::vector<double> water_filling(const std::vector<double>& w, const std::vector<double>& g, std::size_t k) {
  const std::size_t n = w.size();
  std::vector<double> r(n), f(n, 1.0);
  for (std::size_t e = 0; e < n; ++e) r[e] = std::sqrt(w[e] / g[e]);
  if (k >= n) return f;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return r[a] > r[b]; });
  for (std::size_t sat = 0; sat < k; ++sat) {
    double rest = 0.0;
    for (std::size_t i = sat; i < n; ++i) rest += r[order[i]];
    const double nu = (static_cast<double>(k) - sat) / rest;
    if (nu * r[order[sat]] <= 1.0) {
      for (std::size_t i = sat; i < n; ++i) f[order[i]] = nu * r[order[i]];
      return f;
    }
  }
  return f;
}

// Best two-link channel-aware peak age over the contention probability q.
double two_link_grid_oracle() {
  double best = 1e300;
  for (int i = 0; i <= 100000; ++i) {
    const double q = i * 1e-5;
    best = std::min(best, 1.0 / (0.25 + 0.25 * q) + 1.0 / (0.5 - 0.25 * q));
  }
  return best;
}

// ---------------------------------------------------------------------------

Outcome c1_two_link_unknown() {
  const auto net = Network::uniform(2, 1.0, 0.5);
  const auto fw = solve_unknown_peak(net, InterferenceModel::k_of_n(2, 1));
  const auto cf = solve_kofn_closed_form(net, 1);
  const bool ok = std::abs(fw.value - 8) < 1e-4 && std::abs(cf.value - 8) < 1e-4 && std::abs(fw.f[0] - 0.5) < 1e-4 &&
                  std::abs(fw.f[1] - 0.5) < 1e-4 && std::abs(cf.f[0] - 0.5) < 1e-4 && std::abs(cf.f[1] - 0.5) < 1e-4;
  return {ok, fmt("solver %.8g, closed form %.8g, f = (%.6g, %.6g)", fw.value, cf.value, fw.f[0], fw.f[1])};
}

Outcome c2_two_link_priority() {
  const auto net = Network::uniform(2, 1.0, 0.5);
  const auto im = InterferenceModel::k_of_n(2, 1);
  std::vector<double> peaks;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PriorityPolicy p(im, {0, 1});
    peaks.push_back(run(net, im, p, 100000, seed).metrics.peak_age_total);
  }
  const double m = mean(peaks);
  return {std::abs(m - 6.0) <= 0.02 * 6.0, fmt("10-seed mean peak %.6g (target 6, 2%%)", m)};
}

Outcome c3_two_link_known() {
  const auto sol = solve_known_peak(Network::uniform(2, 1.0, 0.5), InterferenceModel::k_of_n(2, 1));
  const double oracle = two_link_grid_oracle();
  const bool ok = std::abs(sol.value - 16.0 / 3.0) < 1e-3 && std::abs(sol.value - oracle) < 1e-3;
  return {ok, fmt("solver %.8g, grid oracle %.8g, 16/3 = %.8g", sol.value, oracle, 16.0 / 3.0)};
}

Outcome c4_identities() {
  std::mt19937_64 gen(20240601);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); };
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen); };
  std::size_t violations = 0, by_policy[5] = {0, 0, 0, 0, 0};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = pick(1, 6);
    std::vector<double> w(n), g(n);
    for (std::size_t e = 0; e < n; ++e) {
      w[e] = uni(0.1, 5.0);
      g[e] = pick(0, 9) == 0 ? 1.0 : uni(0.05, 1.0);
    }
    const Network net(w, g);
    InterferenceModel im = InterferenceModel::k_of_n(n, pick(1, n));
    if (pick(0, 1) == 1) {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (uni(0, 1) < 0.4) edges.emplace_back(a, b);
      im = InterferenceModel::conflict_graph(n, edges);
    }
    const std::size_t kind = pick(0, 4);
    ++by_policy[kind];
    AnyPolicy policy = FixedSetPolicy{};
    if (kind == 0) {
      policy = VirtualQueuePolicy(net, im, std::exp(uni(std::log(0.01), std::log(100.0))));
    } else if (kind == 1) {
      policy = AgeBasedPolicy(net, im, AgeBasedParams{uni(-5.0, 5.0)});
    } else if (kind == 2) {
      const auto sets = enumerate_feasible_sets(im, 1u << 12);
      std::vector<MixtureEntry> entries;
      double total = 0.0;
      for (auto m : sets) {
        entries.push_back({m, uni(0, 1)});
        total += entries.back().probability;
      }
      const double scale = uni(0.5, 1.0) / total;
      for (auto& en : entries) en.probability *= scale;
      policy = StationaryPolicy(SetMixture(im, entries));
    } else if (kind == 3) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), gen);
      policy = PriorityPolicy(im, order);
    }
    const auto horizon = static_cast<std::int64_t>(pick(1, 1000));
    const auto r = run(net, im, policy, horizon, gen());
    for (auto v : check_conservation(r.trajectory)) violations += v != 0;
    for (auto v : check_squared_identity(r.trajectory)) violations += v != 0;
  }
  return {violations == 0,
          fmt("1000 trials (pi_Q %.0f, pi_A %.0f, stationary %.0f, priority %.0f", by_policy[0], by_policy[1],
              by_policy[2], by_policy[3]) +
              fmt(", never %.0f), nonzero residuals: %.0f", by_policy[4], violations)};
}

Outcome c5_stationary() {
  auto cfg = *preset("mixed-n20");
  cfg.policies = {{PolicyKind::stationary_optimal, 1.0, 1.0, {}}};
  cfg.seeds = {1};
  const auto point = expand_sweep(cfg).front();
  const auto sol = solve_point(point, cfg.solver);
  StationaryPolicy pc(sol.unknown.mixture);
  const auto r = run(point.network, point.interference, pc, cfg.horizon, 1);
  const std::vector<double> w(point.network.weights().begin(), point.network.weights().end());
  const std::vector<double> g(point.network.gamma().begin(), point.network.gamma().end());
  const auto f = water_filling(w, g, 5);
  double oracle = 0.0, worst_z = 0.0;
  std::size_t outside = 0;
  for (std::size_t e = 0; e < w.size(); ++e) {
    const double expected = 1.0 / (g[e] * f[e]);
    oracle += w[e] * expected;
    const double z = std::abs(r.metrics.peak_age[e] - expected) / r.metrics.peak_age_se[e];
    worst_z = std::max(worst_z, z);
    outside += z > 3.0;
  }
  const double rel = std::abs(r.metrics.peak_age_total - 200.0) / 200.0;
  return {outside == 0 && rel < 0.02 && std::abs(oracle - 200.0) < 1e-6,
          fmt("links outside 3 SE: %.0f (worst %.2f SE); network %.6g vs oracle %.6g", outside, worst_z,
              r.metrics.peak_age_total, oracle)};
}

Outcome c6_channel_gain() {
  auto cfg = *preset("fig6-7");
  cfg.sweep_values = {1.0};
  cfg.policies = {{PolicyKind::virtual_queue, 1.0, 1.0, {}}, {PolicyKind::stationary_optimal, 1.0, 1.0, {}}};
  const auto r = run_experiment(cfg);
  record_slack("theta1", r);
  const double pc = mean(column(r, 1.0, "pi_C", &ResultRow::peak_per_link));
  const double pq = mean(column(r, 1.0, "pi_Q(V=1)", &ResultRow::peak_per_link));
  const double ratio = pc / pq;
  return {ratio >= 3.5 && ratio <= 4.5, fmt("pi_C %.6g / pi_Q %.6g = %.4g (want [3.5, 4.5])", pc, pq, ratio)};
}

Outcome c7_gap_vs_k(const ExperimentResult& r) {
  std::vector<double> gaps;
  for (double k : {1.0, 5.0, 20.0})
    gaps.push_back(mean(column(r, k, "pi_C", &ResultRow::peak)) - mean(column(r, k, "pi_Q(V=1)", &ResultRow::peak)));
  return {gaps[0] > gaps[1] && gaps[1] > gaps[2],
          fmt("peak gap pi_C - pi_Q: K=1 %.6g, K=5 %.6g, K=20 %.6g", gaps[0], gaps[1], gaps[2])};
}

// Random small instances for the guarantee certifications.
std::vector<ExperimentConfig> certification_instances() {
  std::mt19937_64 gen(777);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); };
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen); };
  std::vector<ExperimentConfig> out;
  for (int i = 0; i < 50; ++i) {
    ExperimentConfig c;
    const std::size_t n = pick(2, 12);
    c.network.n_links = n;
    c.network.gamma = std::vector<double>(n);
    for (std::size_t e = 0; e < n; ++e) {
      c.network.weights.push_back(uni(0.5, 2.0));
      (*c.network.gamma)[e] = uni(0.1, 1.0);
    }
    if (i % 2 == 0) {
      c.interference.kind = InterferenceKind::k_of_n;
      c.interference.k = pick(1, std::max<std::size_t>(1, n / 2));
    } else {
      c.interference.kind = InterferenceKind::conflict_graph;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (uni(0, 1) < 0.3) c.interference.edges.emplace_back(a, b);
    }
    const double v = std::exp(uni(std::log(0.1), std::log(10.0)));
    c.policies = {{PolicyKind::virtual_queue, v, 1.0, {}},
                  {PolicyKind::age_based, 1.0, 0.0, {}},
                  {PolicyKind::age_based, 1.0, 1.0, {}},
                  {PolicyKind::stationary_optimal, 1.0, 1.0, {}}};
    c.horizon = 100000;
    c.seeds = detail::seed_range(10);
    out.push_back(std::move(c));
  }
  return out;
}

struct CertRun {
  ExperimentConfig cfg;
  ExperimentResult result;
};

Outcome c8_virtual_queue_guarantee(const std::vector<CertRun>& runs) {
  std::size_t fails = 0;
  double worst = -1e300;
  for (const auto& [cfg, r] : runs) {
    const std::string q = policy_label(cfg.policies[0]);
    const auto peaks = column(r, NAN, q, &ResultRow::peak);
    const auto it = std::find_if(r.rows.begin(), r.rows.end(), [&](const ResultRow& row) { return row.policy == q; });
    const double bound = *it->vq_peak_bound;
    const double excess = mean(peaks) - bound - 3.0 * se(peaks);
    worst = std::max(worst, (mean(peaks) - bound) / bound);
    fails += excess > 0;
  }
  return {fails == 0, fmt("%.0f of %.0f instances violate; worst (peak - bound)/bound = %.4g", fails,
                          static_cast<double>(runs.size()), worst)};
}

Outcome c9_age_based_guarantees(const std::vector<CertRun>& runs) {
  std::size_t peak_fails = 0, avg_fails = 0, avg_checks = 0;
  double worst_peak = -1e300, worst_avg = -1e300;
  for (const auto& [cfg, r] : runs) {
    const double peak_opt_aware = *r.rows.front().peak_opt_aware;
    const double sw = sum_of(r.points.front().network.weights());
    for (double beta : {0.0, 1.0}) {
      const std::string a = policy_label({PolicyKind::age_based, 1.0, beta, {}});
      const auto peaks = column(r, NAN, a, &ResultRow::peak);
      const double pb = 4.0 * peak_opt_aware - c2_beta(beta) * sw;
      worst_peak = std::max(worst_peak, (mean(peaks) - pb) / pb);
      peak_fails += mean(peaks) > pb + 3.0 * se(peaks);
      const auto avg_a = column(r, NAN, a, &ResultRow::avg);
      for (const auto& ref : cfg.policies) {
        const std::string name = policy_label(ref);
        if (name == a) continue;
        const auto avg_ref = column(r, NAN, name, &ResultRow::avg);
        // Paired by seed: d = avg_A - (4 avg_ref - c1 sum w) must not be significantly positive.
        std::vector<double> d;
        for (std::size_t s = 0; s < avg_a.size(); ++s) d.push_back(avg_a[s] - (4.0 * avg_ref[s] - c1_beta(beta) * sw));
        const double bound = 4.0 * mean(avg_ref) - c1_beta(beta) * sw;
        worst_avg = std::max(worst_avg, mean(d) / bound);
        ++avg_checks;
        avg_fails += mean(d) > 3.0 * se(d);
      }
    }
  }
  return {peak_fails == 0 && avg_fails == 0,
          fmt("peak: %.0f/100 violate (worst rel %.4g); average: %.0f/", peak_fails, worst_peak, avg_fails) +
              fmt("%.0f violate (worst rel %.4g)", static_cast<double>(avg_checks), worst_avg)};
}

Outcome c10_peak_average_slack() {
  std::size_t runs = 0, fails = 0;
  double worst = 1e300;
  for (const auto& [key, slacks] : g_slack) {
    const double tol = 3.0 * sd(slacks);
    for (double s : slacks) {
      ++runs;
      fails += s < -tol;
      worst = std::min(worst, s + tol);
    }
  }
  return {fails == 0 && runs > 0, fmt("%.0f runs in %.0f groups, %.0f below -3 SE (min slack + 3 SE = %.4g)",
                                      static_cast<double>(runs), static_cast<double>(g_slack.size()), fails, worst)};
}

Outcome c11_beta(const ExperimentResult& r) {
  const double neg = mean(column(r, -10.0, "pi_A(beta=-10)", &ResultRow::avg_per_link));
  const double one = mean(column(r, 1.0, "pi_A(beta=1)", &ResultRow::avg_per_link));
  return {neg > one, fmt("avg/N beta=-10: %.6g, beta=1: %.6g", neg, one)};
}

Outcome c12_v(const ExperimentResult& r) {
  auto at_end = [&](double v) {
    std::vector<double> x;
    for (const auto& c : r.convergence)
      if (c.sweep_value == v && c.t == 100000) x.push_back(c.peak_per_link);
    return mean(x);
  };
  const double a = at_end(0.1), b = at_end(100.0);
  const double rel = std::abs(a - b) / std::min(a, b);
  return {rel < 0.10, fmt("running peak/N at t=1e5: V=0.1 %.6g, V=100 %.6g, rel diff %.3g", a, b, rel)};
}

}  // namespace

int main() {
  int failed = 0;
  auto check = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) {
      o.pass = false;
      o.detail += fmt(" [runtime over %.0f s]", limit_s);
    }
    failed += !o.pass;
    std::printf("%s  %2d  %-34s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  check(1, "two-link channel-blind optimum", 1, c1_two_link_unknown);
  check(2, "two-link priority policy", 1, c2_two_link_priority);
  check(3, "two-link channel-aware optimum", 5, c3_two_link_known);
  check(4, "pathwise identities", 0, c4_identities);
  check(5, "stationary consistency", 10, c5_stationary);
  check(6, "channel-state gain at theta=1", 0, c6_channel_gain);

  ExperimentResult fig45;
  check(7, "gap shrinks with K", 0, [&] {
    fig45 = run_experiment(*preset("fig4-5"));
    record_slack("fig4-5", fig45);
    return c7_gap_vs_k(fig45);
  });

  std::vector<CertRun> cert;
  check(8, "virtual-queue peak guarantee", 0, [&] {
    for (auto& cfg : certification_instances()) {
      auto r = run_experiment(cfg);
      record_slack("cert" + std::to_string(cert.size()), r);
      cert.push_back({std::move(cfg), std::move(r)});
    }
    return c8_virtual_queue_guarantee(cert);
  });
  check(9, "age-based factor-4 guarantees", 0, [&] { return c9_age_based_guarantees(cert); });

  ExperimentResult fig9, fig8;
  check(11, "beta degradation", 0, [&] {
    fig9 = run_experiment(*preset("fig9"));
    record_slack("fig9", fig9);
    return c11_beta(fig9);
  });
  check(12, "V insensitivity", 0, [&] {
    fig8 = run_experiment(*preset("fig8"));
    record_slack("fig8", fig8);
    return c12_v(fig8);
  });
  check(10, "peak/average slack on every run", 0, c10_peak_average_slack);

  std::printf("%s: %d criteria failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 1 : 0;
}
