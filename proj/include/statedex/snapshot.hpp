#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "statedex/store.hpp"

namespace statedex {

/// On-disk snapshot of a StateStore.
///
/// Layout (all integers little-endian, doubles IEEE-754):
///   magic    8 bytes  "STDXSNAP"
///   version  u32      kSnapshotVersion
///   payload  meshes, teams, matches, rounds, states, players, tokens
///   checksum u64      FNV-1a over the payload bytes
///
/// Identical stores serialize to identical bytes. Posting lists are not
/// stored; they are rebuilt on load.
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const StateStore& store, std::ostream& out);
void save_snapshot(const StateStore& store, const std::filesystem::path& path);

/// Throws Error("snapshot_version") on a version mismatch and
/// Error("corrupt_snapshot") on bad magic, truncation, or checksum failure.
StateStore read_snapshot(std::istream& in);
StateStore load_snapshot(const std::filesystem::path& path);

}  // namespace statedex
