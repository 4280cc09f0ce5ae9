#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "statedex/error.hpp"
#include "statedex/snapshot.hpp"

using namespace statedex;

namespace {

std::string bytes_of(const StateStore& store) {
  std::ostringstream out;
  write_snapshot(store, out);
  return out.str();
}

StateStore from_bytes(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_snapshot(in);
}

std::string code_of(const std::string& bytes) {
  try {
    from_bytes(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("snapshots round-trip byte for byte") {
  const auto corpus = fixtures::synth(3, 5, 77);
  const StateStore a = index_states(fixtures::meshes(), corpus);
  const StateStore b = index_states(fixtures::meshes(), corpus);
  const std::string bytes = bytes_of(a);
  CHECK(bytes == bytes_of(b));
  CHECK(bytes.substr(0, 8) == "STDXSNAP");

  const StateStore loaded = from_bytes(bytes);
  CHECK(bytes_of(loaded) == bytes);
  CHECK(loaded.state_count() == a.state_count());
  CHECK(loaded.token_count() == a.token_count());
  CHECK(loaded.verify_tokens() == 0);
  for (std::uint32_t r = 0; r < a.round_count(); ++r) CHECK(loaded.round_record(r) == a.round_record(r));
  for (StateIndex i = 0; i < a.state_count(); i += 97) {
    const auto& map = a.mesh(a.match_of(a.round_of(i)).map).map_name();
    const auto x = a.lookup(map, a.token_string(i)), y = loaded.lookup(map, loaded.token_string(i));
    CHECK(std::vector<StateIndex>(x.begin(), x.end()) == std::vector<StateIndex>(y.begin(), y.end()));
  }

  const auto path = std::filesystem::temp_directory_path() / "statedex_test.sdx";
  save_snapshot(a, path);
  CHECK(bytes_of(load_snapshot(path)) == bytes);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_snapshot(path), Error);
}

TEST_CASE("empty store snapshot") {
  const StateStore empty = index_states(fixtures::meshes(), {});
  const StateStore again = from_bytes(bytes_of(empty));
  CHECK(again.state_count() == 0);
  CHECK(again.data().meshes.size() == 2);
}

TEST_CASE("damaged snapshots are refused") {
  const std::string bytes = bytes_of(index_states(fixtures::meshes(), fixtures::synth(1, 2, 3)));
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x20;
  CHECK(code_of(flipped) == "corrupt_snapshot");
  CHECK(code_of(bytes.substr(0, bytes.size() - 9)) == "corrupt_snapshot");
  CHECK(code_of(bytes.substr(0, 5)) == "corrupt_snapshot");
  CHECK(code_of(bytes + "x") == "corrupt_snapshot");
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK(code_of(magic) == "corrupt_snapshot");
  std::string version = bytes;
  version[8] = 9;
  CHECK(code_of(version) == "snapshot_version");
  CHECK(code_of("") == "corrupt_snapshot");
}
