#pragma once

#include <filesystem>

#include "statedex/summarize.hpp"

namespace statedex {

/// Writes the grid as an 8-bit RGB PNG, one pixel per cell, with y_max at
/// the top of the image. Zero density is black; the ramp runs through red
/// and yellow to white.
void write_heatmap_png(const HeatmapGrid& grid, const std::filesystem::path& path);

}  // namespace statedex
