#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "fieldreg/gridmap.hpp"

using namespace fieldreg;

namespace {

std::shared_ptr<ColoredGeoCloud> make_cloud(std::vector<GeoPoint> points) {
  auto c = std::make_shared<ColoredGeoCloud>();
  c->points = std::move(points);
  return c;
}

}  // namespace

TEST(Exg, Examples) {
  EXPECT_NEAR(exg(0.2, 0.5, 0.1), 0.7, 1e-15);
  EXPECT_EQ(exg(0.4, 0.4, 0.4), 0.0);
  EXPECT_EQ(exg(1, 0, 1), -2.0);
}

TEST(Rasterize, SinglePoint) {
  GridMapParams p;
  p.bounds = GridBounds{0, 0, 0.1, 0.1};
  const auto cloud = make_cloud({{0.01, 0.01, 0.5, 0.2, 0.5, 0.1}});
  const MultimodalGridMap m = rasterize(cloud, p);
  EXPECT_EQ(m.width(), 5);
  EXPECT_DOUBLE_EQ(m.cell(0, 0).height, 0.5);
  EXPECT_DOUBLE_EQ(m.cell(0, 0).exg, exg(0.2, 0.5, 0.1));
  EXPECT_EQ(m.cell(0, 0).anchor, 0);
  EXPECT_FALSE(m.cell(4, 4).has_anchor());
}

TEST(Rasterize, TwoEquidistantPoints) {
  GridMapParams p;
  p.bounds = GridBounds{0, 0, 0.1, 0.1};
  // Cell (2, 2) is centered at (0.05, 0.05).
  const auto cloud = make_cloud({{0.04, 0.05, 0.0, 0, 0, 0}, {0.06, 0.05, 1.0, 0, 0, 0}});
  const MultimodalGridMap m = rasterize(cloud, p);
  EXPECT_NEAR(m.cell(2, 2).height, 0.5, 1e-12);
}

TEST(Rasterize, ConstantPlane) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back({u(rng), u(rng), 0.3, u(rng), u(rng), u(rng)});
  const auto cloud = make_cloud(pts);
  const MultimodalGridMap m = rasterize(cloud, GridMapParams{});
  std::size_t occupied = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.cell(x, y).weight_sum < kMinCellWeight) continue;
      ++occupied;
      EXPECT_NEAR(m.cell(x, y).height, 0.3, 1e-6);
    }
  }
  EXPECT_EQ(occupied, m.occupied_count());
  EXPECT_GT(occupied, 2000u);
}

TEST(Rasterize, MatchesBruteForceWeightedMean) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
  const auto cloud = make_cloud(pts);
  GridMapParams p;
  p.bounds = GridBounds{-0.05, -0.05, 0.35, 0.35};
  const MultimodalGridMap m = rasterize(cloud, p);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const Vec2 c = m.cell_center(x, y);
      double ws = 0, hz = 0, he = 0;
      for (const GeoPoint& q : pts) {
        const double d2 = (Vec2(q.x, q.y) - c).squaredNorm();
        if (d2 > 9 * p.sigma_avg * p.sigma_avg) continue;
        const double w = std::exp(-d2 / (2 * p.sigma_avg * p.sigma_avg));
        ws += w;
        hz += w * q.z;
        he += w * (2 * q.g - q.r - q.b);
      }
      if (ws < kMinCellWeight) continue;
      EXPECT_NEAR(m.cell(x, y).height, hz / ws, 1e-12);
      EXPECT_NEAR(m.cell(x, y).exg, he / ws, 1e-12);
    }
  }
}

TEST(Rasterize, DegenerateBounds) {
  const auto cloud = make_cloud({{1, 1, 0, 0, 0, 0}});
  try {
    rasterize(cloud, GridMapParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateBounds);
  }
}

TEST(RasterizeProperty, ConvexCombinationBounds) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<GeoPoint> pts;
    const int n = 20 + static_cast<int>(u(rng) * 200);
    for (int i = 0; i < n; ++i) pts.push_back({0.3 * u(rng), 0.3 * u(rng), 2 * u(rng) - 1, u(rng), u(rng), u(rng)});
    const auto cloud = make_cloud(pts);
    GridMapParams p;
    p.bounds = GridBounds{0, 0, 0.3, 0.3};
    const MultimodalGridMap m = rasterize(cloud, p);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        const GridCell& c = m.cell(x, y);
        if (c.weight_sum < kMinCellWeight) continue;
        double zlo = 1e9, zhi = -1e9, elo = 1e9, ehi = -1e9;
        for (const GeoPoint& q : pts) {
          if ((Vec2(q.x, q.y) - m.cell_center(x, y)).norm() > 3 * p.sigma_avg) continue;
          zlo = std::min(zlo, q.z);
          zhi = std::max(zhi, q.z);
          elo = std::min(elo, exg(q.r, q.g, q.b));
          ehi = std::max(ehi, exg(q.r, q.g, q.b));
        }
        ASSERT_GE(c.height, zlo - 1e-12);
        ASSERT_LE(c.height, zhi + 1e-12);
        ASSERT_GE(c.exg, elo - 1e-12);
        ASSERT_LE(c.exg, ehi + 1e-12);
      }
    }
  }
}

TEST(RasterizeProperty, IntegerShiftEquivariance) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> sh(-4, 4);
  for (int k = 0; k < 100; ++k) {
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({0.1 + 0.2 * u(rng), 0.1 + 0.2 * u(rng), u(rng), u(rng), u(rng), u(rng)});
    const int dx = sh(rng), dy = sh(rng);
    std::vector<GeoPoint> moved = pts;
    for (GeoPoint& q : moved) {
      q.x += dx * 0.02;
      q.y += dy * 0.02;
    }
    GridMapParams p;
    p.bounds = GridBounds{-0.1, -0.1, 0.5, 0.5};
    const MultimodalGridMap a = rasterize(make_cloud(pts), p);
    const MultimodalGridMap b = rasterize(make_cloud(moved), p);
    for (int y = 6; y < a.height() - 6; ++y) {
      for (int x = 6; x < a.width() - 6; ++x) {
        ASSERT_NEAR(a.cell(x, y).height, b.cell(x + dx, y + dy).height, 1e-9);
        ASSERT_NEAR(a.cell(x, y).exg, b.cell(x + dx, y + dy).exg, 1e-9);
        ASSERT_NEAR(a.cell(x, y).weight_sum, b.cell(x + dx, y + dy).weight_sum, 1e-9);
      }
    }
  }
}

TEST(RasterizeProperty, AnchorLiesInItsCell) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 100; ++i) pts.push_back({0.4 * u(rng), 0.4 * u(rng), u(rng), u(rng), u(rng), u(rng)});
    const auto cloud = make_cloud(pts);
    const MultimodalGridMap m = rasterize(cloud, GridMapParams{});
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        const GridCell& c = m.cell(x, y);
        if (!c.has_anchor()) continue;
        const GeoPoint& q = pts[static_cast<std::size_t>(c.anchor)];
        ASSERT_EQ(m.cell_of(q.x, q.y), std::make_pair(x, y));
        // Nearest among the points stored in this cell.
        const double d = (Vec2(q.x, q.y) - m.cell_center(x, y)).norm();
        for (const GeoPoint& o : pts) {
          if (m.cell_of(o.x, o.y) == std::make_pair(x, y)) ASSERT_LE(d, (Vec2(o.x, o.y) - m.cell_center(x, y)).norm());
        }
      }
    }
  }
}
