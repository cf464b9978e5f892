#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "fieldreg/gridmap.hpp"
#include "fieldreg/keyvalue.hpp"

namespace fieldreg {

namespace {

void write_png16(const std::filesystem::path& path, int width, int height, const std::vector<std::uint16_t>& pixels) {
  // Image row 0 is the north edge (max y).
  std::vector<png_uint_16> flipped(pixels.size());
  for (int y = 0; y < height; ++y) {
    std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(y) * width, width,
                flipped.begin() + static_cast<std::ptrdiff_t>(height - 1 - y) * width);
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&image, path.c_str(), 0, flipped.data(), 0, nullptr)) {
    const std::string reason = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "': " + reason);
  }
}

std::vector<std::uint16_t> quantize(const Raster& r, double lo, double hi) {
  std::vector<std::uint16_t> out(r.values.size());
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const double t = std::clamp((r.values[i] - lo) / span, 0.0, 1.0);
    out[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }
  return out;
}

}  // namespace

void dump_grid_png(const MultimodalGridMap& map, const std::filesystem::path& prefix) {
  const Raster exg_r = map.exg_channel();
  const Raster height_r = map.height_channel();
  const auto [hmin, hmax] = std::minmax_element(height_r.values.begin(), height_r.values.end());

  const std::string base = prefix.string();
  write_png16(base + "_exg.png", map.width(), map.height(), quantize(exg_r, -2.0, 2.0));
  write_png16(base + "_height.png", map.width(), map.height(), quantize(height_r, *hmin, *hmax));

  std::ofstream manifest(base + "_manifest.txt", std::ios::trunc);
  if (!manifest) throw Error(ErrorCode::kIo, "cannot write '" + base + "_manifest.txt'");
  manifest << "width=" << map.width() << "\n"
           << "height=" << map.height() << "\n"
           << "cell_size=" << format_double(map.cell_size()) << "\n"
           << "origin_x=" << format_double(map.origin().x()) << "\n"
           << "origin_y=" << format_double(map.origin().y()) << "\n"
           << "exg_min=-2\nexg_max=2\n"
           << "height_min=" << format_double(*hmin) << "\n"
           << "height_max=" << format_double(*hmax) << "\n"
           << "row_order=north_first\n";
}

}  // namespace fieldreg
