#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statedex/navmesh.hpp"
#include "statedex/records.hpp"

namespace statedex {

/// Per-place player counts for one side, indexed by token position.
struct SideToken {
  std::vector<std::uint16_t> counts;

  std::uint32_t total() const;
  friend bool operator==(const SideToken&, const SideToken&) = default;
};

/// T(s): the T side's counts followed by the CT side's counts.
struct Token {
  SideToken t_side;
  SideToken ct_side;

  std::size_t place_count() const noexcept { return t_side.counts.size(); }
  const SideToken& side(Side s) const noexcept { return s == Side::T ? t_side : ct_side; }
  SideToken& side(Side s) noexcept { return s == Side::T ? t_side : ct_side; }

  /// "0 2 0 3 0|1 1 0 2 1": T counts then CT counts, space separated.
  std::string render() const;
  /// Inverse of render(). Throws TokenError on anything render() would not produce.
  static Token parse(std::string_view text);

  friend bool operator==(const Token&, const Token&) = default;
};

SideToken tokenize_side(const NavMesh& mesh, std::span<const Vec3> positions);

/// Tokenizes the alive players of `state`. Dead players do not count.
Token tokenize_state(const NavMesh& mesh, const GameState& state);

/// Sum of absolute count differences over both sides.
std::uint32_t hamming_mod(const Token& a, const Token& b);

/// Directed closest-player distance: for every alive player of `from`, the
/// Euclidean distance to the nearest alive same-side player of `to`, summed.
/// Throws TokenError("unmatched side") when `from` has alive players on a
/// side where `to` has none.
double state_distance(const GameState& from, const GameState& to);

}  // namespace statedex
