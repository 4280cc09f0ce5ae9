#include "statedex/png_writer.hpp"

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "statedex/error.hpp"

namespace statedex {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

std::array<unsigned char, 3> ramp(double v) {
  v = std::clamp(v, 0.0, 1.0);
  auto byte = [](double x) { return static_cast<unsigned char>(std::clamp(x, 0.0, 1.0) * 255.0 + 0.5); };
  return {byte(v * 3.0), byte(v * 3.0 - 1.0), byte(v * 3.0 - 2.0)};
}

}  // namespace

void write_heatmap_png(const HeatmapGrid& grid, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("io_error", "cannot create " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_error", "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_error", "png_create_info_struct failed");
  }
  std::vector<unsigned char> row(std::size_t(grid.nx) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png_error", "failed to encode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, grid.nx, grid.ny, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::uint32_t r = 0; r < grid.ny; ++r) {
    const std::uint32_t iy = grid.ny - 1 - r;
    for (std::uint32_t ix = 0; ix < grid.nx; ++ix) {
      const auto rgb = ramp(grid.density[std::size_t(iy) * grid.nx + ix]);
      std::copy(rgb.begin(), rgb.end(), row.begin() + std::ptrdiff_t(ix) * 3);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace statedex
