#include "statedex/types.hpp"

namespace statedex {

std::string_view to_string(Side side) { return side == Side::T ? "T" : "CT"; }

std::optional<Side> parse_side(std::string_view text) {
  if (text == "T") return Side::T;
  if (text == "CT") return Side::CT;
  return std::nullopt;
}

}  // namespace statedex
