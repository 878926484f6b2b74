#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aoi {

// Base for every error the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instance or argument (bad index, bad probability, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A positive-weight link that no feasible activation set contains.
class UnschedulableLink : public Error {
 public:
  explicit UnschedulableLink(std::size_t link)
      : Error("unschedulable link " + std::to_string(link) +
              ": it belongs to no feasible activation set (peak age is infinite)"),
        link_(link) {}

  std::size_t link() const noexcept { return link_; }

 private:
  std::size_t link_;
};

// Exhaustive enumeration or exact state enumeration exceeded its cap.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

class SolverNonConvergence : public Error {
 public:
  SolverNonConvergence(const std::string& what, double last_gap)
      : Error(what + " (last duality gap " + std::to_string(last_gap) + ")"),
        last_gap_(last_gap) {}

  double last_gap() const noexcept { return last_gap_; }

 private:
  double last_gap_;
};

// Experiment configuration problem; line is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line ? "config error at line " + std::to_string(line) + ": " + what
                   : "config error: " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace aoi
