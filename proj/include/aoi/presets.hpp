#pragma once

// Built-in experiment configs. presets/<name>.json holds the same documents;
// a test keeps the two in sync.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoi/config.hpp"

namespace aoi {

namespace detail {

inline std::vector<std::uint64_t> seed_range(std::uint64_t k) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 1; i <= k; ++i) s.push_back(i);
  return s;
}

inline ExperimentConfig twenty_links(std::size_t n_bad, std::size_t k) {
  ExperimentConfig c;
  c.network.n_links = 20;
  c.network.weights = {1.0};
  c.network.good_bad = GoodBadTemplate{0.9, 0.1, n_bad};
  c.interference.kind = InterferenceKind::k_of_n;
  c.interference.k = k;
  c.horizon = 100000;
  c.seeds = seed_range(10);
  return c;
}

inline PolicySpec virtual_queue(double v) { return {PolicyKind::virtual_queue, v, 1.0, {}}; }
inline PolicySpec age_based(double beta) { return {PolicyKind::age_based, 1.0, beta, {}}; }
inline PolicySpec of_kind(PolicyKind k) { return {k, 1.0, 1.0, {}}; }

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"two-link", "mixed-n20", "fig4-5", "fig6-7", "fig8", "fig9"};
}

inline std::optional<ExperimentConfig> preset(const std::string& name) {
  using namespace detail;
  if (name == "two-link") {
    ExperimentConfig c;
    c.description =
        "Two unit-weight links, gamma 0.5 each, one transmission per slot. Channel-blind optimum 8; "
        "the priority rule (link 0 first when both are ON) reaches 6.";
    c.network.n_links = 2;
    c.network.weights = {1.0};
    c.network.gamma = std::vector<double>{0.5, 0.5};
    c.interference.kind = InterferenceKind::k_of_n;
    c.interference.k = 1;
    c.policies = {virtual_queue(1.0), age_based(1.0), of_kind(PolicyKind::stationary_optimal),
                  of_kind(PolicyKind::s_only_optimal), of_kind(PolicyKind::priority)};
    c.horizon = 100000;
    c.seeds = seed_range(10);
    return c;
  }
  if (name == "mixed-n20") {
    auto c = twenty_links(5, 5);
    c.description = "N=20, K=5, 15 links with gamma 0.9 and 5 with gamma 0.1. Channel-blind optimum 200.";
    c.policies = {virtual_queue(1.0), age_based(1.0), of_kind(PolicyKind::stationary_optimal)};
    return c;
  }
  if (name == "fig4-5") {
    auto c = twenty_links(5, 5);
    c.description =
        "Per-link peak and average age versus K. N=20 with n_bad=5 (gamma 0.9 good, 0.1 bad); "
        "n_bad=5 is a chosen default shared with the V and beta studies.";
    c.policies = {virtual_queue(1.0), age_based(1.0), of_kind(PolicyKind::stationary_optimal)};
    c.sweep = SweepVariable::K;
    c.sweep_values = {1, 2, 3, 5, 10, 20};
    return c;
  }
  if (name == "fig6-7") {
    auto c = twenty_links(5, 5);
    c.description =
        "Per-link peak and average age versus the bad-channel fraction theta = n_bad/N, "
        "n_bad in {0, 5, 10, 15, 20}, N=20, K=5.";
    c.policies = {virtual_queue(1.0), age_based(1.0), of_kind(PolicyKind::stationary_optimal)};
    c.sweep = SweepVariable::theta;
    c.sweep_values = {0.0, 0.25, 0.5, 0.75, 1.0};
    return c;
  }
  if (name == "fig8") {
    auto c = twenty_links(5, 5);
    c.description = "Running per-link peak age of the virtual-queue policy for V=0.1 and V=100. N=20, K=5, n_bad=5.";
    c.policies = {virtual_queue(1.0)};
    c.sweep = SweepVariable::V;
    c.sweep_values = {0.1, 100.0};
    c.checkpoints = {100, 1000, 10000, 100000};
    return c;
  }
  if (name == "fig9") {
    auto c = twenty_links(5, 5);
    c.description =
        "Age-based policy versus beta. N=20, K=5, n_bad=5. The beta grid {-10,-5,-2,0,1,2,5} is a chosen "
        "default spanning the negative range where performance degrades.";
    c.policies = {age_based(1.0)};
    c.sweep = SweepVariable::beta;
    c.sweep_values = {-10, -5, -2, 0, 1, 2, 5};
    return c;
  }
  return std::nullopt;
}

}  // namespace aoi
