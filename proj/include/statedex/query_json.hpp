#pragma once

#include <filesystem>

#include <json.hpp>

#include "statedex/query.hpp"

namespace statedex {

/// Query document, shared by sketch files and the HTTP API:
///
///   {"map": "de_dust_s", "mode": "full" | "partial",
///    "positions": [{"side": "T", "x": 1.0, "y": 2.0, "z": 0.0}, ...],
///    "filters": {"team": "Astra", "team_side": "CT", "ct_buy": ["full_buy"],
///                "t_buy": [...], "min_grenades_ct": 2, "min_grenades_t": 1,
///                "end_reasons": ["bomb_defused"], "bomb_planted": true,
///                "date_range": {"from": "2020-04-01", "to": "2020-05-01"}},
///    "k_nearest": 10}
///
/// "mode" defaults to full, "z" to 0, and "filters" and "k_nearest" are
/// optional. Unknown keys are rejected. Throws ParseError.
QuerySpec query_from_json(const nlohmann::json& doc);
nlohmann::json query_to_json(const QuerySpec& query);

FilterSpec filters_from_json(const nlohmann::json& doc);
nlohmann::json filters_to_json(const FilterSpec& filters);

QuerySpec load_sketch_file(const std::filesystem::path& path);

}  // namespace statedex
