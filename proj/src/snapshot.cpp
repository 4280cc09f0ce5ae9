#include "statedex/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "statedex/error.hpp"

namespace statedex {

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'T', 'D', 'X', 'S', 'N', 'A', 'P'};
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

[[noreturn]] void corrupt(const std::string& what) {
  throw Error("corrupt_snapshot", "corrupt snapshot: " + what);
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) hash_ = (hash_ ^ c[i]) * kFnvPrime;
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename T>
  void pod(T v) {
    static_assert(std::is_arithmetic_v<T>);
    bytes(&v, sizeof v);
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void vec3(const Vec3& v) {
    pod(v.x);
    pod(v.y);
    pod(v.z);
  }
  std::uint64_t hash() const { return hash_; }

 private:
  std::ostream& out_;
  std::uint64_t hash_ = kFnvOffset;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) corrupt("truncated file");
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) hash_ = (hash_ ^ c[i]) * kFnvPrime;
  }
  template <typename T>
  T pod() {
    T v;
    bytes(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 30)) corrupt("string length out of range");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Vec3 vec3() {
    Vec3 v;
    v.x = pod<double>();
    v.y = pod<double>();
    v.z = pod<double>();
    return v;
  }
  template <typename E>
  E enumeration(std::uint8_t limit) {
    const auto v = pod<std::uint8_t>();
    if (v > limit) corrupt("enum value out of range");
    return static_cast<E>(v);
  }
  std::size_t count(std::size_t limit = std::size_t(1) << 34) {
    const auto n = pod<std::uint64_t>();
    if (n > limit) corrupt("element count out of range");
    return static_cast<std::size_t>(n);
  }
  std::uint64_t hash() const { return hash_; }

 private:
  std::istream& in_;
  std::uint64_t hash_ = kFnvOffset;
};

void write_events(Writer& w, const std::vector<EventRecord>& events) {
  w.pod<std::uint64_t>(events.size());
  for (const auto& e : events) {
    w.pod(static_cast<std::uint8_t>(e.kind));
    w.pod(e.t);
    w.str(e.actor_id);
    w.pod<std::uint8_t>(e.victim_id ? 1 : 0);
    if (e.victim_id) w.str(*e.victim_id);
    w.vec3(e.position);
  }
}

std::vector<EventRecord> read_events(Reader& r) {
  std::vector<EventRecord> events(r.count(1u << 24));
  for (auto& e : events) {
    e.kind = r.enumeration<EventKind>(3);
    e.t = r.pod<double>();
    e.actor_id = r.str();
    if (r.pod<std::uint8_t>()) e.victim_id = r.str();
    e.position = r.vec3();
  }
  return events;
}

}  // namespace

void write_snapshot(const StateStore& store, std::ostream& out) {
  const StoreData& d = store.data();
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t version = kSnapshotVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);

  Writer w(out);
  w.pod<std::uint64_t>(d.meshes.size());
  for (const auto& m : d.meshes) w.str(m.to_json().dump());
  w.pod<std::uint64_t>(d.teams.size());
  for (const auto& t : d.teams) w.str(t);

  w.pod<std::uint64_t>(d.matches.size());
  for (const auto& m : d.matches) {
    w.str(m.match_id);
    w.str(m.date);
    w.str(m.competition_name);
    w.str(m.team_ct_start);
    w.str(m.team_t_start);
    w.pod(m.map);
    w.pod(m.first_round);
    w.pod(m.end_round);
  }

  w.pod<std::uint64_t>(d.rounds.size());
  for (const auto& r : d.rounds) {
    w.pod(r.match);
    w.pod(r.round_number);
    w.pod(static_cast<std::uint8_t>(r.winner));
    w.pod(static_cast<std::uint8_t>(r.end_reason));
    w.pod(r.ct_team);
    w.pod(r.t_team);
    w.pod(static_cast<std::uint8_t>(r.ct_buy));
    w.pod(static_cast<std::uint8_t>(r.t_buy));
    w.pod(r.score_ct);
    w.pod(r.score_t);
    w.pod<std::uint8_t>(r.bomb_plant_t ? 1 : 0);
    w.pod(r.bomb_plant_t.value_or(0.0));
    w.pod(r.first_state);
    w.pod(r.end_state);
    w.pod<std::uint64_t>(r.roster.size());
    for (const auto& id : r.roster) w.str(id);
    write_events(w, r.kills);
    write_events(w, r.grenades);
    write_events(w, r.damages);
    write_events(w, r.bomb_plants);
  }

  w.pod<std::uint64_t>(d.states.size());
  for (const auto& s : d.states) {
    w.pod(s.t);
    w.pod(s.round);
    w.pod(s.token);
    w.pod(s.first_player);
    w.pod(s.player_count);
    w.pod<std::uint8_t>(s.bomb_planted ? 1 : 0);
  }

  w.pod<std::uint64_t>(d.players.size());
  for (const auto& p : d.players) {
    w.vec3(p.position);
    w.pod(p.roster_slot);
    w.pod(p.equipment_value);
    w.pod(p.hp);
    w.pod(p.armor);
    w.pod(static_cast<std::uint8_t>(p.side));
    w.pod(p.grenade_count);
  }

  w.pod<std::uint64_t>(d.tokens.size());
  for (const auto& t : d.tokens) {
    w.pod(t.map);
    w.pod<std::uint64_t>(t.counts.size());
    for (auto c : t.counts) w.pod(c);
  }

  const std::uint64_t checksum = w.hash();
  out.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
  if (!out) throw Error("io_error", "failed to write snapshot");
}

void save_snapshot(const StateStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot create " + path.string());
  write_snapshot(store, out);
  out.close();
  if (!out) throw Error("io_error", "failed to write " + path.string());
}

StateStore read_snapshot(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof magic) != 0)
    corrupt("bad magic");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (in.gcount() != sizeof version) corrupt("truncated header");
  if (version != kSnapshotVersion)
    throw Error("snapshot_version", "unsupported snapshot version " + std::to_string(version) +
                                        " (expected " + std::to_string(kSnapshotVersion) + ")");

  Reader r(in);
  StoreData d;
  const auto n_meshes = r.count(1u << 16);
  for (std::size_t i = 0; i < n_meshes; ++i) {
    try {
      d.meshes.push_back(NavMesh::from_json(nlohmann::json::parse(r.str())));
    } catch (const nlohmann::json::exception& e) {
      corrupt(std::string("mesh: ") + e.what());
    }
  }
  d.teams.resize(r.count(1u << 24));
  for (auto& t : d.teams) t = r.str();

  d.matches.resize(r.count(1u << 26));
  for (auto& m : d.matches) {
    m.match_id = r.str();
    m.date = r.str();
    m.competition_name = r.str();
    m.team_ct_start = r.str();
    m.team_t_start = r.str();
    m.map = r.pod<std::uint32_t>();
    m.first_round = r.pod<std::uint32_t>();
    m.end_round = r.pod<std::uint32_t>();
  }

  d.rounds.resize(r.count(1u << 28));
  for (auto& rm : d.rounds) {
    rm.match = r.pod<std::uint32_t>();
    rm.round_number = r.pod<std::int32_t>();
    rm.winner = r.enumeration<Side>(1);
    rm.end_reason = r.enumeration<EndReason>(4);
    rm.ct_team = r.pod<std::uint32_t>();
    rm.t_team = r.pod<std::uint32_t>();
    rm.ct_buy = r.enumeration<BuyType>(3);
    rm.t_buy = r.enumeration<BuyType>(3);
    rm.score_ct = r.pod<std::int32_t>();
    rm.score_t = r.pod<std::int32_t>();
    const bool has_plant = r.pod<std::uint8_t>() != 0;
    const double plant = r.pod<double>();
    if (has_plant) rm.bomb_plant_t = plant;
    rm.first_state = r.pod<std::uint32_t>();
    rm.end_state = r.pod<std::uint32_t>();
    rm.roster.resize(r.count(1u << 16));
    for (auto& id : rm.roster) id = r.str();
    rm.kills = read_events(r);
    rm.grenades = read_events(r);
    rm.damages = read_events(r);
    rm.bomb_plants = read_events(r);
  }

  d.states.resize(r.count(std::numeric_limits<std::uint32_t>::max()));
  for (auto& s : d.states) {
    s.t = r.pod<double>();
    s.round = r.pod<std::uint32_t>();
    s.token = r.pod<std::uint32_t>();
    s.first_player = r.pod<std::uint32_t>();
    s.player_count = r.pod<std::uint8_t>();
    s.bomb_planted = r.pod<std::uint8_t>() != 0;
  }

  d.players.resize(r.count(std::numeric_limits<std::uint32_t>::max()));
  for (auto& p : d.players) {
    p.position = r.vec3();
    p.roster_slot = r.pod<std::uint32_t>();
    p.equipment_value = r.pod<std::int32_t>();
    p.hp = r.pod<std::int16_t>();
    p.armor = r.pod<std::int16_t>();
    p.side = r.enumeration<Side>(1);
    p.grenade_count = r.pod<std::uint8_t>();
  }

  d.tokens.resize(r.count(std::numeric_limits<std::uint32_t>::max()));
  for (auto& t : d.tokens) {
    t.map = r.pod<std::uint32_t>();
    t.counts.resize(r.count(1u << 20));
    for (auto& c : t.counts) c = r.pod<std::uint16_t>();
  }

  const std::uint64_t expected = r.hash();
  std::uint64_t checksum = 0;
  in.read(reinterpret_cast<char*>(&checksum), sizeof checksum);
  if (in.gcount() != sizeof checksum) corrupt("missing checksum");
  if (checksum != expected) corrupt("checksum mismatch");
  if (in.peek() != std::char_traits<char>::eof()) corrupt("trailing bytes");

  try {
    return StateStore(std::move(d));
  } catch (const MeshError& e) {
    corrupt(e.what());
  }
}

StateStore load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open snapshot " + path.string());
  return read_snapshot(in);
}

}  // namespace statedex
