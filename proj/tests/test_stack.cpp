#include <gtest/gtest.h>

#include "support.hpp"
#include "tafp/error.hpp"
#include "tafp/stack.hpp"

namespace tafp {
namespace {

using test::small_stack;
using test::unit;

TEST(StackGrid, ReferenceGeometryIs40By35) {
  StackSpec s;
  s.layers.assign(4, LayerSpec{});
  const CellGrid g = build_grid(s);
  EXPECT_EQ(g.nx, 40);
  EXPECT_EQ(g.ny, 35);
  EXPECT_EQ(g.layers, 4);
  EXPECT_EQ(g.levels.size(), 12u);
}

TEST(StackGrid, SingleCell) {
  const CellGrid g = build_grid(small_stack(1, 1, 1));
  EXPECT_EQ(g.nx, 1);
  EXPECT_EQ(g.ny, 1);
  EXPECT_EQ(g.levels.size(), 3u);
}

TEST(StackGrid, RejectsNonMultipleWidth) {
  StackSpec s = small_stack(40, 35, 1);
  s.width_um = 12001.0;
  try {
    build_grid(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionNotMultiple);
  }
}

TEST(StackGrid, ZeroTopEpoxyIsDropped) {
  StackSpec s = small_stack(2, 2, 2);
  s.layers.back().epoxy_height_um = 0.0;
  const CellGrid g = build_grid(s);
  EXPECT_EQ(g.levels.size(), 5u);
  EXPECT_EQ(g.level_of(1, Slab::kEpoxy), -1);
}

TEST(StackGrid, ZeroInnerHeightIsInvalid) {
  StackSpec s = small_stack(2, 2, 2);
  s.layers.front().epoxy_height_um = 0.0;
  EXPECT_THROW(s.validate(), Error);
}

class Topology : public ::testing::Test {
 protected:
  Floorplan fp;
  std::vector<FunctionalUnit> units = {unit(0, 2, 2, 1.0), unit(1, 2, 2, 1.0)};
  void SetUp() override { fp.stack = small_stack(40, 35, 2); }
};

TEST_F(Topology, OutOfBoundsAtRightEdge) {
  EXPECT_GE(check_topology({0, 39, 0, 0, false}, fp, units), 1);
}

TEST_F(Topology, EmptyGridIsFree) { EXPECT_EQ(check_topology({0, 5, 5, 0, false}, fp, units), 0); }

TEST_F(Topology, FullOverlapCountsOnce) {
  fp.placements.push_back({0, 3, 3, 0, false});
  EXPECT_EQ(check_topology({1, 3, 3, 0, false}, fp, units), 1);
  EXPECT_EQ(check_topology({1, 3, 3, 1, false}, fp, units), 0);
}

TEST_F(Topology, TsvAndWallCount) {
  fp.tsvs.push_back({4, 4, 0});
  AirWall w;
  w.layer = 0;
  w.position_um = 300.0 * 4;
  fp.air_walls.push_back(w);
  EXPECT_EQ(check_topology({1, 3, 3, 0, false}, fp, units), 2);
}

// Exhaustive cell-by-cell oracle on small grids.
TEST(TopologyProperty, MatchesCellOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int nx = 2 + static_cast<int>(rng.index(7));
    const int ny = 2 + static_cast<int>(rng.index(7));
    const int layers = 1 + static_cast<int>(rng.index(4));
    Floorplan fp;
    fp.stack = small_stack(nx, ny, layers);
    std::vector<FunctionalUnit> units;
    for (int i = 0; i < 4; ++i) {
      units.push_back(unit(i, 1 + static_cast<int>(rng.index(3)), 1 + static_cast<int>(rng.index(3)), 1.0));
    }
    for (int i = 0; i < 3; ++i) {
      fp.placements.push_back({i, static_cast<int>(rng.index(nx)), static_cast<int>(rng.index(ny)),
                               static_cast<int>(rng.index(layers)), rng.coin()});
    }
    const Placement probe{3, static_cast<int>(rng.index(nx + 1)) - 1, static_cast<int>(rng.index(ny)),
                          static_cast<int>(rng.index(layers)), rng.coin()};
    const FunctionalUnit& pu = units[3];
    bool outside = false;
    bool collide = false;
    for (int dy = 0; dy < pu.span_y(probe.rotated); ++dy) {
      for (int dx = 0; dx < pu.span_x(probe.rotated); ++dx) {
        const int x = probe.x + dx;
        const int y = probe.y + dy;
        if (x < 0 || y < 0 || x >= nx || y >= ny) {
          outside = true;
          continue;
        }
        for (const auto& p : fp.placements) {
          const auto& u = units[p.fu_id];
          if (p.z == probe.z && x >= p.x && x < p.x + u.span_x(p.rotated) && y >= p.y &&
              y < p.y + u.span_y(p.rotated)) {
            collide = true;
          }
        }
      }
    }
    EXPECT_EQ(check_topology(probe, fp, units) == 0, !outside && !collide) << "trial " << trial;
  }
}

TEST(Wirelength, CenterArithmetic) {
  Floorplan fp;
  fp.stack = small_stack(10, 10, 3);
  const std::vector<FunctionalUnit> units = {unit(0, 2, 2, 0), unit(1, 2, 2, 0)};
  fp.placements = {{0, 0, 0, 0, false}, {1, 3, 4, 0, false}};
  EXPECT_DOUBLE_EQ(manhattan_wirelength(fp, units, {{0, 1}}), 7.0);
  EXPECT_DOUBLE_EQ(manhattan_wirelength(fp, units, {}), 0.0);
  fp.placements[1] = {1, 0, 0, 2, false};
  EXPECT_DOUBLE_EQ(manhattan_wirelength(fp, units, {{0, 1}}, 1.0), 2.0);
}

TEST(Wirelength, UnplacedEndpoint) {
  Floorplan fp;
  fp.stack = small_stack(4, 4, 1);
  const std::vector<FunctionalUnit> units = {unit(0, 1, 1, 0), unit(1, 1, 1, 0)};
  fp.placements = {{0, 0, 0, 0, false}};
  try {
    manhattan_wirelength(fp, units, {{0, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnplacedEndpoint);
  }
}

TEST(WirelengthProperty, MirrorSymmetry) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int nx = 12, ny = 9;
    Floorplan fp, mx, my;
    fp.stack = mx.stack = my.stack = small_stack(nx, ny, 2);
    std::vector<FunctionalUnit> units;
    Netlist nets;
    for (int i = 0; i < 5; ++i) {
      units.push_back(unit(i, 1 + static_cast<int>(rng.index(3)), 1 + static_cast<int>(rng.index(3)), 0));
      const bool rot = rng.coin();
      const int x = static_cast<int>(rng.index(nx - 3));
      const int y = static_cast<int>(rng.index(ny - 3));
      const int z = static_cast<int>(rng.index(2));
      fp.placements.push_back({i, x, y, z, rot});
      mx.placements.push_back({i, nx - x - units[i].span_x(rot), y, z, rot});
      my.placements.push_back({i, x, ny - y - units[i].span_y(rot), z, rot});
      if (i > 0) nets.push_back({static_cast<int>(rng.index(i)), i});
    }
    const double w = manhattan_wirelength(fp, units, nets);
    EXPECT_DOUBLE_EQ(manhattan_wirelength(mx, units, nets), w);
    EXPECT_DOUBLE_EQ(manhattan_wirelength(my, units, nets), w);
  }
}

TEST(TsvPath, Basics) {
  Floorplan fp;
  fp.stack = small_stack(4, 4, 4);
  const std::vector<FunctionalUnit> units = {unit(0, 1, 1, 0)};
  EXPECT_TRUE(tsv_path_exists(build_occupancy(fp, units), 2, 2, 0));
  fp.placements = {{0, 2, 2, 2, false}};
  EXPECT_FALSE(tsv_path_exists(build_occupancy(fp, units), 2, 2, 0));
  fp.placements = {{0, 2, 2, 0, false}};
  EXPECT_TRUE(tsv_path_exists(build_occupancy(fp, units), 2, 2, 1));
  EXPECT_THROW(tsv_path_exists(build_occupancy(fp, units), 4, 0, 0), Error);
}

TEST(OccupancyProperty, IncrementalMatchesRebuild) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Floorplan fp;
    fp.stack = small_stack(8, 8, 3);
    std::vector<FunctionalUnit> units;
    OccupancyGrid inc(8, 8, 3);
    for (int i = 0; i < 6; ++i) {
      units.push_back(unit(i, 1 + static_cast<int>(rng.index(3)), 1 + static_cast<int>(rng.index(3)), 0));
      const Placement p{i, static_cast<int>(rng.index(8)), static_cast<int>(rng.index(8)),
                        static_cast<int>(rng.index(3)), rng.coin()};
      if (check_topology(p, fp, units) != 0) continue;
      fp.placements.push_back(p);
      inc.occupy(footprint(p, units[i]), p.z);
    }
    const OccupancyGrid rebuilt = build_occupancy(fp, units);
    EXPECT_EQ(rebuilt.hash(), inc.hash());
    EXPECT_TRUE(rebuilt == inc);
  }
}

TEST(TsvPathProperty, FreeingNeverBlocks) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    OccupancyGrid occ(4, 4, 4);
    for (int k = 0; k < 20; ++k) {
      occ.occupy(static_cast<int>(rng.index(4)), static_cast<int>(rng.index(4)), static_cast<int>(rng.index(4)));
    }
    const int x = static_cast<int>(rng.index(4)), y = static_cast<int>(rng.index(4));
    const int to = static_cast<int>(rng.index(4));
    const bool before = tsv_path_exists(occ, x, y, to);
    for (int l = 0; l < 4; ++l) {
      if (!occ.is_free(x, y, l) && rng.coin()) {
        while (!occ.is_free(x, y, l)) occ.release(x, y, l);
      }
    }
    if (before) EXPECT_TRUE(tsv_path_exists(occ, x, y, to));
  }
}

TEST(WallRect, OffsetsFromEitherSide) {
  const StackSpec s = small_stack(40, 35, 2);
  AirWall w;
  w.position_um = 5400.0;
  EXPECT_EQ(wall_rect(w, s).x, 18);
  EXPECT_EQ(wall_rect(w, s).h, 35);
  w.side = WallSide::kRight;
  EXPECT_EQ(wall_rect(w, s).x, 40 - 18 - 1);
  w.position_um = 5450.0;
  EXPECT_THROW(wall_rect(w, s), Error);
}

}  // namespace
}  // namespace tafp
