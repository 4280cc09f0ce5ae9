#include "statedex/api.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "statedex/error.hpp"
#include "statedex/query.hpp"
#include "statedex/query_json.hpp"
#include "statedex/summarize.hpp"

namespace statedex {

using nlohmann::json;

namespace {

constexpr std::size_t kSeriesCacheLimit = 8192;

class HttpError : public Error {
 public:
  HttpError(int status, std::string code, const std::string& message)
      : Error(std::move(code), message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ApiResponse json_response(int status, const json& body) {
  return {status, body.dump()};
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, {{"error", {{"code", code}, {"message", message}}}});
}

std::vector<std::string_view> split_path(std::string_view path) {
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

json parse_body(std::string_view body) {
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) throw HttpError(400, "malformed_document", "request body must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw HttpError(400, "malformed_document", std::string("invalid JSON: ") + e.what());
  }
}

json vec_json(const Vec3& p) { return {{"x", p.x}, {"y", p.y}, {"z", p.z}}; }

json player_json(const PlayerSnapshot& p) {
  return {{"player_id", p.player_id},
          {"side", to_string(p.side)},
          {"x", p.position.x},
          {"y", p.position.y},
          {"z", p.position.z},
          {"hp", p.hp},
          {"armor", p.armor},
          {"equipment_value", p.equipment_value},
          {"grenade_count", p.grenade_count},
          {"alive", p.alive}};
}

json event_json(const EventRecord& e) {
  json out = {{"kind", to_string(e.kind)}, {"t", e.t}, {"actor_id", e.actor_id},
              {"position", vec_json(e.position)}};
  out["victim_id"] = e.victim_id ? json(*e.victim_id) : json(nullptr);
  return out;
}

json events_json(std::vector<EventRecord> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.t < b.t; });
  json arr = json::array();
  for (const auto& e : events) arr.push_back(event_json(e));
  return arr;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

struct ApiService::Engine {
  std::shared_ptr<const StateStore> store;
  std::shared_ptr<const WinProbModel> model;
  mutable std::mutex cache_mu;
  mutable std::unordered_map<std::uint32_t, std::shared_ptr<const WinSeries>> series_cache;

  std::shared_ptr<const WinSeries> series(std::uint32_t round) const {
    if (!model) return std::make_shared<WinSeries>();
    {
      std::lock_guard lock(cache_mu);
      if (auto it = series_cache.find(round); it != series_cache.end()) return it->second;
    }
    auto computed = std::make_shared<const WinSeries>(round_series(*model, store->round_record(round)));
    std::lock_guard lock(cache_mu);
    if (series_cache.size() >= kSeriesCacheLimit) series_cache.clear();
    return series_cache.emplace(round, std::move(computed)).first->second;
  }

  std::uint32_t round_index(std::string_view match_id, std::string_view round_number) const {
    auto number = parse_int(round_number);
    std::optional<std::uint32_t> r;
    if (number) r = store->find_round(match_id, *number);
    if (!r)
      throw HttpError(404, "unknown_round",
                      "no round " + std::string(round_number) + " in match '" + std::string(match_id) + "'");
    return *r;
  }

  json card(const QueryHit& hit) const {
    const auto& s = *store;
    const StateIndex i = hit.state;
    const auto& row = s.row(i);
    const auto& round = s.round_of(i);
    const auto& match = s.match_of(round);
    const GameState state = s.state(i);

    json players = json::array();
    for (const auto& p : state.players) players.push_back(player_json(p));
    json series = json::array();
    for (const auto& pt : this->series(row.round)->points) series.push_back({pt.t, pt.p_ct});

    return {{"state_ref", {{"match_id", match.match_id}, {"round_number", round.round_number}, {"t", row.t}}},
            {"match_id", match.match_id},
            {"map", state.map},
            {"date", match.date},
            {"competition_name", match.competition_name},
            {"ct_team", s.team(round.ct_team)},
            {"t_team", s.team(round.t_team)},
            {"round_score", {{"ct", round.score_ct}, {"t", round.score_t}}},
            {"ct_buy", to_string(round.ct_buy)},
            {"t_buy", to_string(round.t_buy)},
            {"end_reason", to_string(round.end_reason)},
            {"winner", to_string(round.winner)},
            {"state_t", row.t},
            {"bomb_planted", row.bomb_planted},
            {"bomb_plant_t", optional_number(round.bomb_plant_t)},
            {"token", s.token_string(i)},
            {"hamming", hit.hamming ? json(*hit.hamming) : json(nullptr)},
            {"distance", optional_number(hit.distance)},
            {"players", players},
            {"win_series", series}};
  }

  ApiResponse query(std::string_view body) const {
    json doc = parse_body(body);
    int page_size = kDefaultPageSize;
    std::string cursor;
    if (auto it = doc.find("page_size"); it != doc.end()) {
      if (!it->is_number_integer() || it->get<long long>() < 1 || it->get<long long>() > kMaxPageSize)
        throw HttpError(400, "malformed_document",
                        "page_size must be an integer in [1, " + std::to_string(kMaxPageSize) + "]");
      page_size = it->get<int>();
      doc.erase(it);
    }
    if (auto it = doc.find("cursor"); it != doc.end()) {
      if (!it->is_null()) {
        if (!it->is_string()) throw HttpError(400, "invalid_cursor", "cursor must be a string");
        cursor = it->get<std::string>();
      }
      doc.erase(it);
    }
    const QuerySpec spec = query_from_json(doc);
    const std::string fingerprint = hex16(fnv1a(query_to_json(spec).dump()));

    std::size_t offset = 0;
    if (!cursor.empty()) {
      const auto dot = cursor.find('.');
      std::size_t parsed = 0;
      const char* first = cursor.data();
      const char* last = cursor.data() + (dot == std::string::npos ? 0 : dot);
      auto [ptr, ec] = std::from_chars(first, last, parsed);
      if (dot == std::string::npos || ec != std::errc() || ptr != last ||
          cursor.substr(dot + 1) != fingerprint)
        throw HttpError(400, "invalid_cursor", "cursor does not belong to this query");
      offset = parsed;
    }

    const auto hits = run_query(*store, spec);
    json cards = json::array();
    const std::size_t end = std::min(hits.size(), offset + std::size_t(page_size));
    for (std::size_t k = offset; k < end; ++k) cards.push_back(card(hits[k]));
    json next = end < hits.size() ? json(std::to_string(end) + "." + fingerprint) : json(nullptr);
    return json_response(200, {{"total", hits.size()}, {"offset", offset}, {"cards", cards}, {"next_cursor", next}});
  }

  ApiResponse heatmap(std::string_view body) const {
    json doc = parse_body(body);
    for (const auto& [key, v] : doc.items())
      if (key != "query" && key != "side" && key != "resolution")
        throw HttpError(400, "malformed_document", "heatmap request: unknown field '" + key + "'");
    if (!doc.contains("query")) throw HttpError(400, "malformed_document", "heatmap request needs 'query'");
    const QuerySpec spec = query_from_json(doc["query"]);
    Side side = Side::T;
    if (auto it = doc.find("side"); it != doc.end()) {
      auto parsed = it->is_string() ? parse_side(it->get<std::string>()) : std::nullopt;
      if (!parsed) throw HttpError(400, "malformed_document", "side must be T or CT");
      side = *parsed;
    }
    std::uint32_t nx = 64, ny = 64;
    if (auto it = doc.find("resolution"); it != doc.end()) {
      auto dim = [](const json& v) {
        if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 4096)
          throw HttpError(400, "malformed_document", "resolution values must be integers in [1, 4096]");
        return v.get<std::uint32_t>();
      };
      if (it->is_array() && it->size() == 2) {
        nx = dim((*it)[0]);
        ny = dim((*it)[1]);
      } else {
        nx = ny = dim(*it);
      }
    }
    const auto hits = run_query(*store, spec);
    std::vector<StateIndex> refs;
    refs.reserve(hits.size());
    for (const auto& h : hits) refs.push_back(h.state);
    json out = statedex::heatmap(*store, spec.map, refs, side, nx, ny).to_json();
    out["states"] = refs.size();
    return json_response(200, out);
  }

  ApiResponse frames(std::string_view match_id, std::string_view round_number) const {
    const auto r = round_index(match_id, round_number);
    const RoundRecord round = store->round_record(r);
    json frames = json::array();
    for (const auto& f : round.frames) {
      json players = json::array();
      for (const auto& p : f.players) players.push_back(player_json(p));
      frames.push_back({{"t", f.t}, {"bomb_planted", f.bomb_planted}, {"players", players}});
    }
    const auto& meta = store->data().rounds[r];
    return json_response(200, {{"match_id", round.match_id},
                                {"round_number", round.round_number},
                                {"map", store->mesh(store->match_of(meta).map).map_name()},
                                {"frames", frames}});
  }

  ApiResponse events(std::string_view match_id, std::string_view round_number) const {
    const RoundRecord round = store->round_record(round_index(match_id, round_number));
    return json_response(200, {{"match_id", round.match_id},
                                {"round_number", round.round_number},
                                {"kills", events_json(round.kills)},
                                {"grenades", events_json(round.grenades)},
                                {"damages", events_json(round.damages)},
                                {"bomb_plants", events_json(round.bomb_plants)}});
  }

  ApiResponse winprob(std::string_view match_id, std::string_view round_number) const {
    const auto r = round_index(match_id, round_number);
    const auto s = series(r);
    json points = json::array();
    for (const auto& pt : s->points) points.push_back({{"t", pt.t}, {"p_ct", pt.p_ct}, {"p_t", pt.p_t()}});
    return json_response(200, {{"match_id", std::string(match_id)},
                                {"round_number", store->data().rounds[r].round_number},
                                {"bomb_plant_t", optional_number(s->bomb_plant_t)},
                                {"points", points}});
  }

  ApiResponse maps() const {
    const auto& d = store->data();
    std::vector<std::size_t> matches(d.meshes.size()), rounds(d.meshes.size()), states(d.meshes.size());
    for (const auto& m : d.matches) {
      ++matches[m.map];
      for (auto r = m.first_round; r < m.end_round; ++r) {
        ++rounds[m.map];
        states[m.map] += d.rounds[r].end_state - d.rounds[r].first_state;
      }
    }
    json arr = json::array();
    for (std::size_t i = 0; i < d.meshes.size(); ++i) {
      const auto e = d.meshes[i].extent();
      arr.push_back({{"name", d.meshes[i].map_name()},
                     {"places", d.meshes[i].places().size()},
                     {"bounds", {{"x_min", e.x_min}, {"y_min", e.y_min}, {"x_max", e.x_max}, {"y_max", e.y_max}}},
                     {"matches", matches[i]},
                     {"rounds", rounds[i]},
                     {"states", states[i]}});
    }
    return json_response(200, {{"maps", arr}});
  }

  ApiResponse teams() const {
    std::vector<bool> used(store->data().teams.size(), false);
    for (const auto& r : store->data().rounds) used[r.ct_team] = used[r.t_team] = true;
    json arr = json::array();
    for (std::size_t i = 0; i < used.size(); ++i)
      if (used[i]) arr.push_back(store->data().teams[i]);
    return json_response(200, {{"teams", arr}});
  }

  ApiResponse mesh(std::string_view map) const { return json_response(200, store->mesh(map).to_json()); }

  ApiResponse route(std::string_view method, std::string_view path, std::string_view body) const {
    const auto p = split_path(path);
    if (p.empty() || p[0] != "v1") throw HttpError(404, "not_found", "no such endpoint");
    auto expect = [&](std::string_view m) {
      if (method != m) throw HttpError(405, "method_not_allowed", std::string(m) + " required");
    };
    if (p.size() == 2 && p[1] == "query") return expect("POST"), query(body);
    if (p.size() == 2 && p[1] == "heatmap") return expect("POST"), heatmap(body);
    if (p.size() == 2 && p[1] == "maps") return expect("GET"), maps();
    if (p.size() == 2 && p[1] == "teams") return expect("GET"), teams();
    if (p.size() == 4 && p[1] == "maps" && p[3] == "mesh") return expect("GET"), mesh(p[2]);
    if (p.size() == 5 && p[1] == "rounds") {
      expect("GET");
      if (p[4] == "frames") return frames(p[2], p[3]);
      if (p[4] == "events") return events(p[2], p[3]);
      if (p[4] == "winprob") return winprob(p[2], p[3]);
    }
    throw HttpError(404, "not_found", "no such endpoint");
  }
};

ApiService::ApiService(std::shared_ptr<const StateStore> store, std::shared_ptr<const WinProbModel> model) {
  swap(std::move(store), std::move(model));
}

ApiService::~ApiService() = default;

void ApiService::swap(std::shared_ptr<const StateStore> store, std::shared_ptr<const WinProbModel> model) {
  if (!store) store = std::make_shared<const StateStore>();
  auto next = std::make_shared<Engine>();
  next->store = std::move(store);
  next->model = std::move(model);
  std::lock_guard lock(mu_);
  engine_ = std::move(next);
}

std::shared_ptr<const ApiService::Engine> ApiService::engine() const {
  std::lock_guard lock(mu_);
  return engine_;
}

std::shared_ptr<const StateStore> ApiService::store() const { return engine()->store; }

ApiResponse ApiService::handle(std::string_view method, std::string_view path, std::string_view body) const {
  const auto e = engine();
  try {
    return e->route(method, path, body);
  } catch (const HttpError& err) {
    return error_response(err.status(), err.code(), err.what());
  } catch (const UnknownMapError& err) {
    return error_response(404, err.code(), err.what());
  } catch (const QueryError& err) {
    return error_response(err.code() == "impossible_sketch" ? 422 : 400, err.code(), err.what());
  } catch (const ParseError& err) {
    return error_response(400, err.code(), err.what());
  } catch (const json::exception& err) {
    return error_response(400, "malformed_document", err.what());
  } catch (const Error& err) {
    return error_response(500, err.code(), err.what());
  } catch (const std::exception& err) {
    return error_response(500, "internal", err.what());
  }
}

ListenAddress parse_listen(std::string_view text) {
  ListenAddress out;
  std::string_view port = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) out.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  auto p = parse_int(port);
  if (!p || *p < 0 || *p > 65535) throw Error("invalid_listen", "expected host:port, got '" + std::string(text) + "'");
  out.port = *p;
  return out;
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const ApiService& service) : impl_(std::make_unique<Impl>()) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  auto& server = impl_->server;
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const ListenAddress& address) {
  const int port = address.port == 0 ? impl_->server.bind_to_any_port(address.host)
                                     : (impl_->server.bind_to_port(address.host, address.port) ? address.port : -1);
  if (port < 0)
    throw Error("listen_failed", "cannot listen on " + address.host + ":" + std::to_string(address.port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void serve_http(const ApiService& service, const ListenAddress& address) {
  HttpServer server(service);
  server.bind(address);
  server.run();
}

}  // namespace statedex
