#include <doctest.h>

#include <chrono>
#include <csignal>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "fixtures.hpp"
#include "statedex/ingest.hpp"
#include "statedex/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("statedex_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(STATEDEX_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const fs::path& fixtures_snapshot() {
  static const fs::path snap = [] {
    const auto p = work_dir() / "fixtures.sdx";
    const Run r = run("ingest " + q(fixtures::source_dir() / "data" / "fixtures") + " --mesh-dir " +
                      q(fixtures::mesh_dir()) + " --out " + q(p));
    REQUIRE(r.code == 0);
    return p;
  }();
  return snap;
}

// Sketch reproducing frame `frame` of round `round` of a fixture replay.
fs::path sketch_from(const std::string& file, int round, int frame, const std::string& mode, const std::string& name) {
  const json d = json::parse(slurp(fixtures::source_dir() / "data" / "fixtures" / file));
  const json& f = d["rounds"][round - 1]["frames"][frame];
  json positions = json::array();
  for (const auto& p : f["players"])
    if (p["hp"].get<int>() > 0) positions.push_back({{"side", p["side"]}, {"x", p["x"]}, {"y", p["y"]}, {"z", p["z"]}});
  const auto path = work_dir() / name;
  std::ofstream(path) << json{{"map", d["map"]}, {"mode", mode}, {"positions", positions}}.dump(2);
  return path;
}

}  // namespace

TEST_CASE("help documents every command") {
  const Run r = run("--help");
  CHECK(r.code == 0);
  for (const char* cmd : {"ingest", "synth", "query", "train-wp", "heatmap", "serve"})
    CHECK_MESSAGE(r.out.find(cmd) != std::string::npos, cmd);
  CHECK(run("").code != 0);
}

TEST_CASE("ingest reports exact counts and is reproducible") {
  std::size_t rounds = 0, states = 0, matches = 0;
  for (const auto& entry : fs::directory_iterator(fixtures::source_dir() / "data" / "fixtures")) {
    if (entry.path().extension() != ".json") continue;
    const auto parsed = statedex::parse_match_file(entry.path());
    ++matches;
    rounds += parsed.match.rounds.size();
    for (const auto& r : parsed.match.rounds) states += r.frames.size();
  }
  const auto a = work_dir() / "a.sdx", b = work_dir() / "b.sdx";
  const std::string inputs = q(fixtures::source_dir() / "data" / "fixtures") + " --mesh-dir " + q(fixtures::mesh_dir());
  const Run r = run("ingest " + inputs + " --out " + q(a) + " --format json");
  REQUIRE(r.code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["matches"] == matches);
  CHECK(summary["rounds"] == rounds);
  CHECK(summary["states"] == states);
  CHECK(run("ingest " + inputs + " --out " + q(b)).code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("corrupt inputs fail the run but valid files are kept") {
  const auto out = work_dir() / "mixed.sdx";
  const Run r = run("ingest " + q(fixtures::source_dir() / "data" / "fixtures") + " " +
                    q(fixtures::source_dir() / "data" / "fixtures" / "corrupt") + " --mesh-dir " +
                    q(fixtures::mesh_dir()) + " --out " + q(out) + " --format json");
  CHECK(r.code != 0);
  CHECK(r.err.find("truncated.json") != std::string::npos);
  CHECK(r.err.find("winner/end_reason mismatch") != std::string::npos);
  const json summary = json::parse(r.out);
  CHECK(summary["failed_files"] == 1);
  CHECK(summary["rejected_rounds"] == 1);
  CHECK(summary["matches"] == 3);
  CHECK(statedex::load_snapshot(out).match_count() == 3);
}

TEST_CASE("synth is deterministic and validates its config") {
  const auto cfg = fixtures::source_dir() / "data" / "config" / "fixtures.json";
  const auto d1 = work_dir() / "synth1", d2 = work_dir() / "synth2";
  const Run r1 = run("synth --config " + q(cfg) + " --seed 2024 --mesh-dir " + q(fixtures::mesh_dir()) + " --out " + q(d1));
  const Run r2 = run("synth --config " + q(cfg) + " --seed 2024 --mesh-dir " + q(fixtures::mesh_dir()) + " --out " + q(d2));
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(r1.out == r2.out);
  for (const char* f : {"m000000.json", "m000001.json"}) {
    CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(slurp(d1 / f) == slurp(fixtures::source_dir() / "data" / "fixtures" / f));
  }
  const auto bad = work_dir() / "bad_config.json";
  std::ofstream(bad) << R"({"matches": 2, "rounds_per_match": 99})";
  const Run r3 = run("synth --config " + q(bad) + " --mesh-dir " + q(fixtures::mesh_dir()));
  CHECK(r3.code != 0);
  CHECK(r3.err.find("rounds_per_match") != std::string::npos);
}

TEST_CASE("query retrieves the sketched state first") {
  const auto snap = fixtures_snapshot();
  const auto full = sketch_from("m000001.json", 3, 25, "full", "full.json");
  const Run table = run("query --snapshot " + q(snap) + " --sketch " + q(full));
  REQUIRE(table.code == 0);
  const Run js = run("query --snapshot " + q(snap) + " --sketch " + q(full) + " --format json");
  REQUIRE(js.code == 0);
  const json doc = json::parse(js.out);
  REQUIRE(doc["results"].size() >= 1);
  const json& top = doc["results"][0];
  CHECK(top["match_id"] == "m000001");
  CHECK(top["round_number"] == 3);
  CHECK(top["t"] == 25.0);
  CHECK(top["distance"] == 0.0);

  // Table rows carry the same content as the JSON listing.
  std::istringstream lines(table.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "total\t" + std::to_string(doc["total"].get<int>()));
  std::getline(lines, line);
  for (const json& res : doc["results"]) {
    REQUIRE(std::getline(lines, line));
    const std::string expected = std::to_string(res["rank"].get<int>()) + "\t" + res["match_id"].get<std::string>() +
                                 "\t" + std::to_string(res["round_number"].get<int>()) + "\t" + res["t"].dump() + "\t" +
                                 res["token"].get<std::string>() + "\t" + res["hamming"].dump() + "\t" +
                                 res["distance"].dump() + "\t" + res["winner"].get<std::string>() + "\t" +
                                 res["end_reason"].get<std::string>();
    CHECK(line == expected);
  }

  const auto partial = sketch_from("m000001.json", 3, 25, "partial", "partial.json");
  const Run p = run("query --snapshot " + q(snap) + " --sketch " + q(partial) + " --format json");
  REQUIRE(p.code == 0);
  std::set<std::string> wide;
  const json partial_doc = json::parse(p.out);
  for (const json& res : partial_doc["results"])
    wide.insert(res["match_id"].get<std::string>() + "/" + res["round_number"].dump() + "/" + res["t"].dump());
  for (const json& res : doc["results"])
    CHECK(wide.count(res["match_id"].get<std::string>() + "/" + res["round_number"].dump() + "/" + res["t"].dump()));

  const Run missing = run("query --snapshot " + q(work_dir() / "nope.sdx") + " --sketch " + q(full));
  CHECK(missing.code != 0);
  CHECK(missing.out.empty());
}

TEST_CASE("train-wp is reproducible") {
  const auto snap = fixtures_snapshot();
  const auto m1 = work_dir() / "m1.json", m2 = work_dir() / "m2.json";
  REQUIRE(run("train-wp --snapshot " + q(snap) + " --seed 5 --out " + q(m1)).code == 0);
  REQUIRE(run("train-wp --snapshot " + q(snap) + " --seed 5 --out " + q(m2)).code == 0);
  CHECK(slurp(m1) == slurp(m2));
  CHECK(json::parse(slurp(m1))["format"] == "statedex-winprob");
}

TEST_CASE("heatmap export matches the requested resolution") {
  const auto snap = fixtures_snapshot();
  const auto sketch = sketch_from("m000000.json", 2, 10, "partial", "heat.json");
  const auto png = work_dir() / "heat.png", grid = work_dir() / "heat_grid.json";
  const Run r = run("heatmap --snapshot " + q(snap) + " --sketch " + q(sketch) + " --side CT --resolution 48x30 --out " +
                    q(grid) + " --png " + q(png));
  REQUIRE(r.code == 0);
  const json g = json::parse(slurp(grid));
  CHECK(g["nx"] == 48);
  CHECK(g["ny"] == 30);
  CHECK(g["density"].size() == 48 * 30);
  const std::string bytes = slurp(png);
  REQUIRE(bytes.size() > 24);
  auto be32 = [&](std::size_t off) {
    return (std::uint32_t(std::uint8_t(bytes[off])) << 24) | (std::uint32_t(std::uint8_t(bytes[off + 1])) << 16) |
           (std::uint32_t(std::uint8_t(bytes[off + 2])) << 8) | std::uint32_t(std::uint8_t(bytes[off + 3]));
  };
  CHECK(be32(16) == 48);
  CHECK(be32(20) == 30);
  CHECK(run("heatmap --snapshot " + q(snap) + " --sketch " + q(sketch) + " --resolution 0").code != 0);
}

TEST_CASE("serve answers /v1/maps from the snapshot") {
  const auto snap = fixtures_snapshot();
  const auto log = work_dir() / "serve.log", pidfile = work_dir() / "serve.pid";
  const std::string cmd = "sh -c '" + std::string(STATEDEX_CLI) + " serve --snapshot " + snap.string() +
                          " --listen 127.0.0.1:0 2>" + log.string() + " & echo $! >" + pidfile.string() + "'";
  REQUIRE(std::system(cmd.c_str()) == 0);
  int port = 0;
  for (int k = 0; k < 300 && !port; ++k) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const std::string text = slurp(log);
    const auto at = text.find("listening on 127.0.0.1:");
    if (at != std::string::npos && text.find('\n', at) != std::string::npos)
      port = std::stoi(text.substr(at + std::string("listening on 127.0.0.1:").size()));
  }
  const int pid = std::stoi(slurp(pidfile));
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/v1/maps");
  ::kill(pid, SIGTERM);
  REQUIRE(res);
  CHECK(res->status == 200);
  const json maps = json::parse(res->body)["maps"];
  const auto store = statedex::load_snapshot(snap);
  REQUIRE(maps.size() == store.data().meshes.size());
  std::size_t states = 0, matches = 0;
  for (const json& m : maps) {
    states += m["states"].get<std::size_t>();
    matches += m["matches"].get<std::size_t>();
  }
  CHECK(states == store.state_count());
  CHECK(matches == store.match_count());
}
