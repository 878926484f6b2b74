#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "aoi/error.hpp"

namespace aoi {

inline constexpr std::size_t kMaxLinks = 64;

// A set of link indices in [0, 64), stored as a bitmask.
class LinkSet {
 public:
  constexpr LinkSet() noexcept = default;
  explicit constexpr LinkSet(std::uint64_t bits) noexcept : bits_(bits) {}

  LinkSet(std::initializer_list<std::size_t> links) {
    for (auto e : links) insert(e);
  }

  static LinkSet from_indices(std::span<const std::size_t> links) {
    LinkSet s;
    for (auto e : links) s.insert(e);
    return s;
  }

  static constexpr LinkSet single(std::size_t e) noexcept { return LinkSet(std::uint64_t{1} << e); }

  void insert(std::size_t e) {
    if (e >= kMaxLinks) throw InvalidInput("link index " + std::to_string(e) + " out of range");
    bits_ |= std::uint64_t{1} << e;
  }
  constexpr void erase(std::size_t e) noexcept { bits_ &= ~(std::uint64_t{1} << e); }

  constexpr bool contains(std::size_t e) const noexcept { return e < kMaxLinks && ((bits_ >> e) & 1U); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr std::uint64_t bits() const noexcept { return bits_; }

  // True iff every member is < n.
  constexpr bool within(std::size_t n) const noexcept {
    return n >= kMaxLinks || (bits_ >> n) == 0;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    return out;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b; b &= b - 1) f(static_cast<std::size_t>(std::countr_zero(b)));
  }

  constexpr LinkSet operator|(LinkSet o) const noexcept { return LinkSet(bits_ | o.bits_); }
  constexpr LinkSet operator&(LinkSet o) const noexcept { return LinkSet(bits_ & o.bits_); }
  constexpr bool operator==(const LinkSet&) const noexcept = default;

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for_each([&](std::size_t e) {
      if (!first) s += ",";
      s += std::to_string(e);
      first = false;
    });
    return s + "}";
  }

 private:
  std::uint64_t bits_ = 0;
};

// Lexicographic order on the increasing index sequences: {0,2} < {1}, {0} < {0,1}.
constexpr bool lex_less(LinkSet a, LinkSet b) noexcept {
  const std::uint64_t diff = a.bits() ^ b.bits();
  if (diff == 0) return false;
  const int i = std::countr_zero(diff);
  // Both share every member below i. The one holding i wins unless the other
  // continues past i (then its next element is larger than i).
  if ((a.bits() >> i) & 1U) {
    return (b.bits() >> i) != 0;
  }
  return (a.bits() >> i) == 0;
}

}  // namespace aoi
