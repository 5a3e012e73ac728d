#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tafp {

/// Vertical composition of one tier: active silicon, the oxide above it, and
/// the epoxy bond to the next tier.
struct LayerSpec {
  double si_height_um = 150.0;
  double sio2_height_um = 50.0;
  double epoxy_height_um = 25.0;
};

struct StackSpec {
  double width_um = 12000.0;   // along x
  double length_um = 10500.0;  // along y
  double cell_xy_um = 300.0;
  std::vector<LayerSpec> layers;
  double ambient_K = 300.0;

  int nx() const;
  int ny() const;
  int layer_count() const { return static_cast<int>(layers.size()); }

  /// Throws Error(kDimensionNotMultiple) or Error(kInvalidArgument).
  void validate() const;
};

enum class Slab : std::uint8_t { kSilicon = 0, kOxide = 1, kEpoxy = 2 };

std::string_view to_string(Slab slab);

/// One horizontal sheet of thermal nodes.
struct SlabLevel {
  int layer = 0;
  Slab slab = Slab::kSilicon;
  double height_um = 0.0;
};

/// Discretized stack. Levels are ordered bottom to top; a zero-height top
/// epoxy is dropped.
struct CellGrid {
  int nx = 0;
  int ny = 0;
  int layers = 0;
  double cell_um = 0.0;
  std::vector<SlabLevel> levels;

  std::size_t cells_per_level() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  /// Index into levels, or -1 when the slab is absent.
  int level_of(int layer, Slab slab) const;
};

CellGrid build_grid(const StackSpec& spec);

enum class FuKind : std::uint8_t { kHeatSource, kHeatSink };

struct FunctionalUnit {
  int id = 0;
  std::string label;
  int width_cells = 1;   // x extent when not rotated
  int length_cells = 1;  // y extent when not rotated
  double power_W = 0.0;
  FuKind kind = FuKind::kHeatSink;

  int span_x(bool rotated) const { return rotated ? length_cells : width_cells; }
  int span_y(bool rotated) const { return rotated ? width_cells : length_cells; }
  double area_cells() const { return static_cast<double>(width_cells) * length_cells; }
  /// Watts per cell of footprint.
  double power_density() const { return power_W / area_cells(); }
};

/// Unordered pair of functional-unit ids.
struct Net {
  int a = 0;
  int b = 0;
};
using Netlist = std::vector<Net>;

/// Requires ids 0..n-1 in declaration order, positive sizes and non-negative
/// power.
void validate_units(std::span<const FunctionalUnit> units);
void validate_netlist(const Netlist& netlist, std::span<const FunctionalUnit> units);

struct Placement {
  int fu_id = 0;
  int x = 0;  // lower-left cell
  int y = 0;
  int z = 0;  // layer, 0 = bottom
  bool rotated = false;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// TSV drilled from the top layer down to (and including) to_layer.
struct Tsv {
  int x = 0;
  int y = 0;
  int to_layer = 0;

  friend bool operator==(const Tsv&, const Tsv&) = default;
};

/// Coolant channel in the oxide above the active silicon of `layer`,
/// spanning the full y extent with flow towards +y.
struct LiquidChannel {
  int x = 0;
  int layer = 0;
  double h_conv_W_per_m2K = 0.0;
  double flow_W_per_K = 0.0;  // mass flow times specific heat
  std::string coolant = "water";

  friend bool operator==(const LiquidChannel&, const LiquidChannel&) = default;
};

enum class WallAxis : std::uint8_t { kX, kY };
enum class WallSide : std::uint8_t { kLeft, kRight };

/// Low-pressure air trench. For axis x the wall is a set of full-height
/// columns at position_um measured from the left (low x) or right edge; for
/// axis y it is a set of rows measured from the bottom (left) or top (right).
struct AirWall {
  int layer = 0;
  WallAxis axis = WallAxis::kX;
  double position_um = 0.0;
  WallSide side = WallSide::kLeft;
  int thickness_cells = 1;

  friend bool operator==(const AirWall&, const AirWall&) = default;
};

struct CellRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int cx, int cy) const {
    return cx >= x && cx < x + w && cy >= y && cy < y + h;
  }
  bool intersects(const CellRect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  bool inside(int nx, int ny) const {
    return x >= 0 && y >= 0 && x + w <= nx && y + h <= ny;
  }
};

CellRect footprint(const Placement& p, const FunctionalUnit& fu);

/// Cells covered by a wall. Throws Error(kInvalidArgument) when the offset is
/// not a cell multiple or the wall leaves the grid.
CellRect wall_rect(const AirWall& wall, const StackSpec& stack);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Block center in cell units; z is the layer index.
Point3 center(const Placement& p, const FunctionalUnit& fu);

struct Floorplan {
  StackSpec stack;
  std::vector<Placement> placements;
  std::vector<Tsv> tsvs;
  std::vector<LiquidChannel> liquid_channels;
  std::vector<AirWall> air_walls;

  const Placement* find(int fu_id) const;
};

/// Free/occupied state per (x, y, layer). Occupants are functional units,
/// TSV columns and air walls; liquid channels are not occupants.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int nx, int ny, int layers);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int layers() const { return layers_; }

  bool in_bounds(int x, int y, int layer) const {
    return x >= 0 && y >= 0 && layer >= 0 && x < nx_ && y < ny_ && layer < layers_;
  }
  bool is_free(int x, int y, int layer) const { return count_[index(x, y, layer)] == 0; }

  void occupy(int x, int y, int layer) { ++count_[index(x, y, layer)]; }
  void release(int x, int y, int layer);
  /// Occupies the in-bounds part of rect on layer.
  void occupy(const CellRect& rect, int layer);
  void occupy_column(int x, int y, int from_layer);

  std::size_t occupied_count() const;
  /// Hash of the free/occupied bitmap.
  std::uint64_t hash() const;

  /// Compares free/occupied state only, not multiplicity.
  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b);

 private:
  std::size_t index(int x, int y, int layer) const {
    return (static_cast<std::size_t>(layer) * ny_ + y) * nx_ + x;
  }

  int nx_ = 0;
  int ny_ = 0;
  int layers_ = 0;
  std::vector<std::uint16_t> count_;
};

OccupancyGrid build_occupancy(const Floorplan& fp, std::span<const FunctionalUnit> units);

/// Violations incurred by adding `placement` to `partial`: one per overlapped
/// unit, TSV or wall, plus one when the footprint leaves the grid.
int check_topology(const Placement& placement, const Floorplan& partial,
                   std::span<const FunctionalUnit> units);

/// Sum over nets of |dx| + |dy| + pitch * |dz| between block centers.
double manhattan_wirelength(const Floorplan& fp, std::span<const FunctionalUnit> units,
                            const Netlist& netlist, double layer_pitch_cells = 1.0);

/// True iff (x, y) is free on every layer from the top down to to_layer.
bool tsv_path_exists(const OccupancyGrid& occ, int x, int y, int to_layer);

}  // namespace tafp
