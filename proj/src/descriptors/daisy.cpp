#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "fieldreg/descriptors.hpp"

namespace fieldreg {

namespace {

using Layer = std::vector<double>;

std::vector<double> gaussian_kernel(double sigma) {
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * half + 1);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    k[i + half] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + half];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with zero padding.
Layer blur(const Layer& in, int w, int h, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int half = static_cast<int>(k.size() / 2);
  Layer tmp(in.size(), 0.0);
  Layer out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + static_cast<std::size_t>(y) * w;
    double* dst = tmp.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(-half, -x);
      const int hi = std::min(half, w - 1 - x);
      double acc = 0.0;
      for (int i = lo; i <= hi; ++i) acc += k[i + half] * row[x + i];
      dst[x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(-half, -y);
    const int hi = std::min(half, h - 1 - y);
    double* dst = out.data() + static_cast<std::size_t>(y) * w;
    for (int i = lo; i <= hi; ++i) {
      const double kv = k[i + half];
      const double* src = tmp.data() + static_cast<std::size_t>(y + i) * w;
      for (int x = 0; x < w; ++x) dst[x] += kv * src[x];
    }
  }
  return out;
}

// Bilinear tap pattern for a fixed sub-cell offset.
struct Tap {
  int dx0, dy0;
  double w00, w10, w01, w11;
};

Tap make_tap(double ox, double oy) {
  const double fx = std::floor(ox);
  const double fy = std::floor(oy);
  const double ax = ox - fx;
  const double ay = oy - fy;
  return {static_cast<int>(fx), static_cast<int>(fy), (1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
}

double sample(const Layer& layer, int w, int h, int x, int y, const Tap& t) {
  const auto value = [&](int px, int py) {
    return (px >= 0 && py >= 0 && px < w && py < h) ? layer[static_cast<std::size_t>(py) * w + px] : 0.0;
  };
  const int x0 = x + t.dx0;
  const int y0 = y + t.dy0;
  return t.w00 * value(x0, y0) + t.w10 * value(x0 + 1, y0) + t.w01 * value(x0, y0 + 1) +
         t.w11 * value(x0 + 1, y0 + 1);
}

void normalize_group(float* values, int count) {
  double norm_sq = 0.0;
  for (int i = 0; i < count; ++i) norm_sq += static_cast<double>(values[i]) * values[i];
  const double norm = std::sqrt(norm_sq);
  if (norm < 1e-9) {
    std::fill(values, values + count, 0.0f);
    return;
  }
  for (int i = 0; i < count; ++i) values[i] = static_cast<float>(values[i] / norm);
}

}  // namespace

DaisyField daisy_field(const Raster& exg, const DaisyConfig& config) {
  const int w = exg.width;
  const int h = exg.height;
  const int footprint = 2 * config.radius + 1;
  if (config.radius < kDaisyRings) {
    throw Error(ErrorCode::kInvalidArgument, "DAISY radius must be at least " + std::to_string(kDaisyRings));
  }
  if (w < footprint || h < footprint) {
    throw Error(ErrorCode::kInvalidArgument,
                "map of " + std::to_string(w) + "x" + std::to_string(h) + " cells is smaller than the DAISY footprint of " +
                    std::to_string(footprint) + " cells; pad the grid bounds");
  }

  // Gradient orientation layers (positive directional derivative).
  constexpr int H = kDaisyOrientationBins;
  std::array<Layer, H> orient;
  for (Layer& l : orient) l.assign(static_cast<std::size_t>(w) * h, 0.0);
  std::array<double, H> cos_o{}, sin_o{};
  for (int o = 0; o < H; ++o) {
    cos_o[o] = std::cos(2.0 * std::numbers::pi * o / H);
    sin_o[o] = std::sin(2.0 * std::numbers::pi * o / H);
  }
  const auto value = [&](int x, int y) { return exg.inside(x, y) ? exg.at(x, y) : 0.0; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (value(x + 1, y) - value(x - 1, y));
      const double gy = 0.5 * (value(x, y + 1) - value(x, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      for (int o = 0; o < H; ++o) orient[o][i] = std::max(0.0, gx * cos_o[o] + gy * sin_o[o]);
    }
  }

  // Incremental smoothing: ring q uses sigma_q = radius * (q + 1) / (2 * rings).
  std::array<std::array<Layer, H>, kDaisyRings> smoothed;
  double prev_sigma = 0.0;
  for (int q = 0; q < kDaisyRings; ++q) {
    const double sigma = config.radius * (q + 1.0) / (2.0 * kDaisyRings);
    const double step = std::sqrt(sigma * sigma - prev_sigma * prev_sigma);
    for (int o = 0; o < H; ++o) smoothed[q][o] = blur(q == 0 ? orient[o] : smoothed[q - 1][o], w, h, step);
    prev_sigma = sigma;
  }
  for (Layer& l : orient) Layer().swap(l);

  std::array<std::array<Tap, kDaisyAnglesPerRing>, kDaisyRings> taps;
  for (int q = 0; q < kDaisyRings; ++q) {
    const double ring_radius = config.radius * (q + 1.0) / kDaisyRings;
    for (int a = 0; a < kDaisyAnglesPerRing; ++a) {
      const double angle = 2.0 * std::numbers::pi * a / kDaisyAnglesPerRing;
      taps[q][a] = make_tap(ring_radius * std::cos(angle), ring_radius * std::sin(angle));
    }
  }

  DaisyField field(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* d = field.at(x, y).data();
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      for (int o = 0; o < H; ++o) d[o] = static_cast<float>(smoothed[0][o][i]);
      normalize_group(d, H);
      for (int q = 0; q < kDaisyRings; ++q) {
        float* ring = d + H + q * kDaisyAnglesPerRing * H;
        for (int a = 0; a < kDaisyAnglesPerRing; ++a) {
          for (int o = 0; o < H; ++o) {
            ring[a * H + o] = static_cast<float>(sample(smoothed[q][o], w, h, x, y, taps[q][a]));
          }
        }
        normalize_group(ring, kDaisyAnglesPerRing * H);
      }
    }
  }
  return field;
}

DaisyField daisy_field(const MultimodalGridMap& map, const DaisyConfig& config) {
  if (map.occupied_count() == 0) throw Error(ErrorCode::kInvalidArgument, "grid map has no occupied cell");
  return daisy_field(map.exg_channel(), config);
}

}  // namespace fieldreg
