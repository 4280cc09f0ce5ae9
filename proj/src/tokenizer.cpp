#include "statedex/tokenizer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <limits>

#include "statedex/error.hpp"

namespace statedex {

std::uint32_t SideToken::total() const {
  std::uint32_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

namespace {

void render_side(const SideToken& side, std::string& out) {
  char buf[8];
  for (std::size_t i = 0; i < side.counts.size(); ++i) {
    if (i) out.push_back(' ');
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, side.counts[i]);
    out.append(buf, end);
  }
}

SideToken parse_side_counts(std::string_view text) {
  SideToken side;
  if (text.empty()) throw TokenError("empty side in token");
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = std::min(text.find(' ', pos), text.size());
    const std::string_view field = text.substr(pos, end - pos);
    if (field.empty()) throw TokenError("malformed token: empty count");
    if (field.size() > 1 && field[0] == '0') throw TokenError("malformed token: leading zero");
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() ||
        value > std::numeric_limits<std::uint16_t>::max())
      throw TokenError("malformed token: bad count '" + std::string(field) + "'");
    side.counts.push_back(static_cast<std::uint16_t>(value));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return side;
}

}  // namespace

std::string Token::render() const {
  std::string out;
  out.reserve(4 * place_count());
  render_side(t_side, out);
  out.push_back('|');
  render_side(ct_side, out);
  return out;
}

Token Token::parse(std::string_view text) {
  const auto bar = text.find('|');
  if (bar == std::string_view::npos || text.find('|', bar + 1) != std::string_view::npos)
    throw TokenError("malformed token: expected exactly one '|'");
  Token token{parse_side_counts(text.substr(0, bar)), parse_side_counts(text.substr(bar + 1))};
  if (token.t_side.counts.size() != token.ct_side.counts.size())
    throw TokenError("malformed token: sides have different place counts");
  return token;
}

SideToken tokenize_side(const NavMesh& mesh, std::span<const Vec3> positions) {
  SideToken side;
  side.counts.assign(mesh.place_count(), 0);
  for (const auto& p : positions) ++side.counts[mesh.token_position(p)];
  return side;
}

Token tokenize_state(const NavMesh& mesh, const GameState& state) {
  if (state.map != mesh.map_name())
    throw TokenError("state map '" + state.map + "' does not match mesh map '" +
                     mesh.map_name() + "'");
  Token token;
  token.t_side.counts.assign(mesh.place_count(), 0);
  token.ct_side.counts.assign(mesh.place_count(), 0);
  for (const auto& p : state.players) {
    if (!p.alive) continue;
    ++token.side(p.side).counts[mesh.token_position(p.position)];
  }
  return token;
}

std::uint32_t hamming_mod(const Token& a, const Token& b) {
  if (a.t_side.counts.size() != b.t_side.counts.size() ||
      a.ct_side.counts.size() != b.ct_side.counts.size())
    throw TokenError("tokens have different place counts");
  std::uint32_t d = 0;
  for (std::size_t i = 0; i < a.t_side.counts.size(); ++i)
    d += static_cast<std::uint32_t>(std::abs(int(a.t_side.counts[i]) - int(b.t_side.counts[i])));
  for (std::size_t i = 0; i < a.ct_side.counts.size(); ++i)
    d += static_cast<std::uint32_t>(
        std::abs(int(a.ct_side.counts[i]) - int(b.ct_side.counts[i])));
  return d;
}

double state_distance(const GameState& from, const GameState& to) {
  double total = 0.0;
  for (const auto& p : from.players) {
    if (!p.alive) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to.players) {
      if (!q.alive || q.side != p.side) continue;
      best = std::min(best, distance(p.position, q.position));
    }
    if (best == std::numeric_limits<double>::infinity())
      throw TokenError("unmatched side: " + std::string(to_string(p.side)) +
                       " has no alive players in the target state");
    total += best;
  }
  return total;
}

}  // namespace statedex
