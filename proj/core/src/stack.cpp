#include "tafp/stack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "tafp/error.hpp"

namespace tafp {

namespace {

bool is_cell_multiple(double value_um, double cell_um) {
  const double cells = value_um / cell_um;
  return std::abs(cells - std::round(cells)) < 1e-9 * std::max(1.0, std::abs(cells));
}

}  // namespace

int StackSpec::nx() const { return static_cast<int>(std::lround(width_um / cell_xy_um)); }
int StackSpec::ny() const { return static_cast<int>(std::lround(length_um / cell_xy_um)); }

void StackSpec::validate() const {
  if (!(cell_xy_um > 0.0) || !(width_um > 0.0) || !(length_um > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stack dimensions must be positive");
  }
  if (!is_cell_multiple(width_um, cell_xy_um) || !is_cell_multiple(length_um, cell_xy_um)) {
    throw Error(ErrorCode::kDimensionNotMultiple,
                "stack width/length must be multiples of cell_xy_um");
  }
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "stack needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const bool top = i + 1 == layers.size();
    if (!(l.si_height_um > 0.0) || !(l.sio2_height_um > 0.0) ||
        !(l.epoxy_height_um > 0.0 || (top && l.epoxy_height_um == 0.0))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "layer heights must be positive (top epoxy may be zero)");
    }
  }
}

std::string_view to_string(Slab slab) {
  switch (slab) {
    case Slab::kSilicon: return "si";
    case Slab::kOxide: return "sio2";
    case Slab::kEpoxy: return "epoxy";
  }
  return "?";
}

int CellGrid::level_of(int layer, Slab slab) const {
  // Levels are dense except for a possibly missing top epoxy.
  const int idx = layer * 3 + static_cast<int>(slab);
  if (idx < 0 || idx >= static_cast<int>(levels.size())) return -1;
  return idx;
}

CellGrid build_grid(const StackSpec& spec) {
  spec.validate();
  CellGrid g;
  g.nx = spec.nx();
  g.ny = spec.ny();
  g.layers = spec.layer_count();
  g.cell_um = spec.cell_xy_um;
  for (int l = 0; l < g.layers; ++l) {
    const auto& ls = spec.layers[l];
    g.levels.push_back({l, Slab::kSilicon, ls.si_height_um});
    g.levels.push_back({l, Slab::kOxide, ls.sio2_height_um});
    if (ls.epoxy_height_um > 0.0) g.levels.push_back({l, Slab::kEpoxy, ls.epoxy_height_um});
  }
  return g;
}

void validate_units(std::span<const FunctionalUnit> units) {
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    if (u.id != static_cast<int>(i)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "functional unit ids must be 0..n-1 in declaration order");
    }
    if (u.width_cells < 1 || u.length_cells < 1) {
      throw Error(ErrorCode::kInvalidArgument, "unit '" + u.label + "' needs dimensions >= 1");
    }
    if (!(u.power_W >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "unit '" + u.label + "' has negative power");
    }
  }
}

void validate_netlist(const Netlist& netlist, std::span<const FunctionalUnit> units) {
  const int n = static_cast<int>(units.size());
  for (const auto& net : netlist) {
    if (net.a == net.b) throw Error(ErrorCode::kInvalidArgument, "netlist self-edge");
    if (net.a < 0 || net.b < 0 || net.a >= n || net.b >= n) {
      throw Error(ErrorCode::kInvalidArgument, "netlist references an undeclared unit");
    }
  }
}

CellRect footprint(const Placement& p, const FunctionalUnit& fu) {
  return {p.x, p.y, fu.span_x(p.rotated), fu.span_y(p.rotated)};
}

CellRect wall_rect(const AirWall& wall, const StackSpec& stack) {
  if (!is_cell_multiple(wall.position_um, stack.cell_xy_um) || wall.position_um < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "air wall offset must be a non-negative cell multiple");
  }
  if (wall.thickness_cells < 1) {
    throw Error(ErrorCode::kInvalidArgument, "air wall thickness must be >= 1");
  }
  const int offset = static_cast<int>(std::lround(wall.position_um / stack.cell_xy_um));
  const int extent = wall.axis == WallAxis::kX ? stack.nx() : stack.ny();
  const int start = wall.side == WallSide::kLeft ? offset : extent - offset - wall.thickness_cells;
  if (start < 0 || start + wall.thickness_cells > extent) {
    throw Error(ErrorCode::kInvalidArgument, "air wall leaves the grid");
  }
  if (wall.axis == WallAxis::kX) return {start, 0, wall.thickness_cells, stack.ny()};
  return {0, start, stack.nx(), wall.thickness_cells};
}

Point3 center(const Placement& p, const FunctionalUnit& fu) {
  return {p.x + 0.5 * fu.span_x(p.rotated), p.y + 0.5 * fu.span_y(p.rotated),
          static_cast<double>(p.z)};
}

const Placement* Floorplan::find(int fu_id) const {
  for (const auto& p : placements) {
    if (p.fu_id == fu_id) return &p;
  }
  return nullptr;
}

OccupancyGrid::OccupancyGrid(int nx, int ny, int layers)
    : nx_(nx), ny_(ny), layers_(layers),
      count_(static_cast<std::size_t>(nx) * ny * layers, 0) {}

void OccupancyGrid::release(int x, int y, int layer) {
  auto& c = count_[index(x, y, layer)];
  if (c > 0) --c;
}

void OccupancyGrid::occupy(const CellRect& rect, int layer) {
  if (layer < 0 || layer >= layers_) return;
  const int x0 = std::max(rect.x, 0), x1 = std::min(rect.x + rect.w, nx_);
  const int y0 = std::max(rect.y, 0), y1 = std::min(rect.y + rect.h, ny_);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) occupy(x, y, layer);
  }
}

void OccupancyGrid::occupy_column(int x, int y, int from_layer) {
  for (int l = std::max(from_layer, 0); l < layers_; ++l) occupy(x, y, l);
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(count_.begin(), count_.end(), [](std::uint16_t c) { return c != 0; }));
}

std::uint64_t OccupancyGrid::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<std::uint64_t>(nx_));
  mix(static_cast<std::uint64_t>(ny_));
  mix(static_cast<std::uint64_t>(layers_));
  for (auto c : count_) mix(c != 0 ? 1u : 0u);
  return h;
}

bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (a.nx_ != b.nx_ || a.ny_ != b.ny_ || a.layers_ != b.layers_) return false;
  for (std::size_t i = 0; i < a.count_.size(); ++i) {
    if ((a.count_[i] != 0) != (b.count_[i] != 0)) return false;
  }
  return true;
}

OccupancyGrid build_occupancy(const Floorplan& fp, std::span<const FunctionalUnit> units) {
  OccupancyGrid occ(fp.stack.nx(), fp.stack.ny(), fp.stack.layer_count());
  for (const auto& p : fp.placements) occ.occupy(footprint(p, units[p.fu_id]), p.z);
  for (const auto& t : fp.tsvs) {
    if (occ.in_bounds(t.x, t.y, 0)) occ.occupy_column(t.x, t.y, t.to_layer);
  }
  for (const auto& w : fp.air_walls) occ.occupy(wall_rect(w, fp.stack), w.layer);
  return occ;
}

int check_topology(const Placement& placement, const Floorplan& partial,
                   std::span<const FunctionalUnit> units) {
  const CellRect rect = footprint(placement, units[placement.fu_id]);
  int violations = 0;
  if (!rect.inside(partial.stack.nx(), partial.stack.ny()) || placement.z < 0 ||
      placement.z >= partial.stack.layer_count()) {
    ++violations;
  }
  for (const auto& p : partial.placements) {
    if (p.fu_id == placement.fu_id || p.z != placement.z) continue;
    if (rect.intersects(footprint(p, units[p.fu_id]))) ++violations;
  }
  for (const auto& t : partial.tsvs) {
    if (t.to_layer <= placement.z && rect.contains(t.x, t.y)) ++violations;
  }
  for (const auto& w : partial.air_walls) {
    if (w.layer == placement.z && rect.intersects(wall_rect(w, partial.stack))) ++violations;
  }
  return violations;
}

double manhattan_wirelength(const Floorplan& fp, std::span<const FunctionalUnit> units,
                            const Netlist& netlist, double layer_pitch_cells) {
  double total = 0.0;
  for (const auto& net : netlist) {
    const Placement* a = fp.find(net.a);
    const Placement* b = fp.find(net.b);
    if (a == nullptr || b == nullptr) {
      throw Error(ErrorCode::kUnplacedEndpoint, "net endpoint is not placed");
    }
    const Point3 ca = center(*a, units[net.a]);
    const Point3 cb = center(*b, units[net.b]);
    total += std::abs(ca.x - cb.x) + std::abs(ca.y - cb.y) + layer_pitch_cells * std::abs(ca.z - cb.z);
  }
  return total;
}

bool tsv_path_exists(const OccupancyGrid& occ, int x, int y, int to_layer) {
  if (!occ.in_bounds(x, y, 0) || to_layer < 0 || to_layer >= occ.layers()) {
    throw Error(ErrorCode::kOutOfBounds, "TSV query outside the grid");
  }
  for (int l = occ.layers() - 1; l >= to_layer; --l) {
    if (!occ.is_free(x, y, l)) return false;
  }
  return true;
}

}  // namespace tafp
