#include "statedex/query_json.hpp"

#include <fstream>
#include <set>

#include "statedex/error.hpp"

namespace statedex {

using nlohmann::json;

namespace {

void only_keys(const json& obj, std::initializer_list<const char*> keys, const char* what) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ParseError(std::string(what) + ": unknown field '" + k + "'");
}

template <typename E, typename Parse>
std::vector<E> enum_list(const json& v, Parse parse, const char* what) {
  if (!v.is_array()) throw ParseError(std::string(what) + " must be an array");
  std::vector<E> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ParseError(std::string(what) + " entries must be strings");
    auto parsed = parse(item.get<std::string>());
    if (!parsed) throw ParseError(std::string("unknown ") + what + " '" + item.get<std::string>() + "'");
    out.push_back(*parsed);
  }
  return out;
}

template <typename E>
json names(const std::vector<E>& values) {
  json arr = json::array();
  for (auto v : values) arr.push_back(to_string(v));
  return arr;
}

std::string string_field(const json& v, const char* what) {
  if (!v.is_string()) throw ParseError(std::string(what) + " must be a string");
  return v.get<std::string>();
}

int int_field(const json& v, const char* what) {
  if (!v.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
  return v.get<int>();
}

double number_field(const json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ParseError(std::string("position is missing '") + key + "'");
    return 0.0;
  }
  if (!it->is_number()) throw ParseError(std::string("position '") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

FilterSpec filters_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("filters must be an object");
  only_keys(doc,
            {"team", "team_side", "ct_buy", "t_buy", "min_grenades_ct", "min_grenades_t",
             "end_reasons", "bomb_planted", "date_range"},
            "filters");
  FilterSpec f;
  for (const auto& [key, v] : doc.items()) {
    if (v.is_null()) continue;
    if (key == "team") {
      f.team = string_field(v, "team");
    } else if (key == "team_side") {
      auto side = parse_side(string_field(v, "team_side"));
      if (!side) throw ParseError("team_side must be T or CT");
      f.team_side = side;
    } else if (key == "ct_buy") {
      f.ct_buy = enum_list<BuyType>(v, parse_buy_type, "ct_buy");
    } else if (key == "t_buy") {
      f.t_buy = enum_list<BuyType>(v, parse_buy_type, "t_buy");
    } else if (key == "min_grenades_ct") {
      f.min_grenades_ct = int_field(v, "min_grenades_ct");
    } else if (key == "min_grenades_t") {
      f.min_grenades_t = int_field(v, "min_grenades_t");
    } else if (key == "end_reasons") {
      f.end_reasons = enum_list<EndReason>(v, parse_end_reason, "end_reasons");
    } else if (key == "bomb_planted") {
      if (!v.is_boolean()) throw ParseError("bomb_planted must be a boolean");
      f.bomb_planted = v.get<bool>();
    } else if (key == "date_range") {
      if (!v.is_object()) throw ParseError("date_range must be an object");
      only_keys(v, {"from", "to"}, "date_range");
      if (v.contains("from") && !v["from"].is_null()) f.date_from = string_field(v["from"], "date_range.from");
      if (v.contains("to") && !v["to"].is_null()) f.date_to = string_field(v["to"], "date_range.to");
    }
  }
  if (f.team_side && !f.team) throw ParseError("team_side requires team");
  return f;
}

json filters_to_json(const FilterSpec& f) {
  json out = json::object();
  if (f.team) out["team"] = *f.team;
  if (f.team_side) out["team_side"] = to_string(*f.team_side);
  if (f.ct_buy) out["ct_buy"] = names(*f.ct_buy);
  if (f.t_buy) out["t_buy"] = names(*f.t_buy);
  if (f.min_grenades_ct) out["min_grenades_ct"] = *f.min_grenades_ct;
  if (f.min_grenades_t) out["min_grenades_t"] = *f.min_grenades_t;
  if (f.end_reasons) out["end_reasons"] = names(*f.end_reasons);
  if (f.bomb_planted) out["bomb_planted"] = *f.bomb_planted;
  if (f.date_from || f.date_to) {
    json range = json::object();
    if (f.date_from) range["from"] = *f.date_from;
    if (f.date_to) range["to"] = *f.date_to;
    out["date_range"] = range;
  }
  return out;
}

QuerySpec query_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("query must be an object");
  only_keys(doc, {"map", "mode", "positions", "filters", "k_nearest"}, "query");
  QuerySpec q;
  if (!doc.contains("map")) throw ParseError("query is missing 'map'");
  q.map = string_field(doc["map"], "map");
  if (doc.contains("mode")) {
    const auto mode = string_field(doc["mode"], "mode");
    if (mode == "full") q.mode = QueryMode::full;
    else if (mode == "partial") q.mode = QueryMode::partial;
    else throw ParseError("mode must be 'full' or 'partial'");
  }
  if (doc.contains("positions")) {
    const auto& positions = doc["positions"];
    if (!positions.is_array()) throw ParseError("positions must be an array");
    for (const auto& p : positions) {
      if (!p.is_object()) throw ParseError("position entries must be objects");
      only_keys(p, {"side", "x", "y", "z"}, "position");
      if (!p.contains("side")) throw ParseError("position is missing 'side'");
      auto side = parse_side(string_field(p["side"], "side"));
      if (!side) throw ParseError("position side must be T or CT");
      q.sketch.push_back({*side, {number_field(p, "x", true), number_field(p, "y", true),
                                  number_field(p, "z", false)}});
    }
  }
  if (doc.contains("filters") && !doc["filters"].is_null())
    q.filters = filters_from_json(doc["filters"]);
  if (doc.contains("k_nearest") && !doc["k_nearest"].is_null())
    q.k_nearest = int_field(doc["k_nearest"], "k_nearest");
  return q;
}

json query_to_json(const QuerySpec& q) {
  json positions = json::array();
  for (const auto& p : q.sketch)
    positions.push_back({{"side", to_string(p.side)},
                         {"x", p.position.x},
                         {"y", p.position.y},
                         {"z", p.position.z}});
  json out = {{"map", q.map},
              {"mode", q.mode == QueryMode::full ? "full" : "partial"},
              {"positions", positions},
              {"filters", filters_to_json(q.filters)}};
  if (q.k_nearest) out["k_nearest"] = *q.k_nearest;
  return out;
}

QuerySpec load_sketch_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sketch file " + path.string());
  try {
    return query_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace statedex
