#include "tafp/fu_placer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "tafp/error.hpp"

namespace tafp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inclusive-exclusive rectangle sum on a (nx+1) x (ny+1) prefix table.
inline int rect_sum(const int* p, int stride, int x, int y, int w, int h) {
  const int* r0 = p + static_cast<std::ptrdiff_t>(y) * stride;
  const int* r1 = p + static_cast<std::ptrdiff_t>(y + h) * stride;
  return r1[x + w] - r0[x + w] - r1[x] + r0[x];
}

template <typename Pred>
void build_prefix(int* out, int nx, int ny, Pred&& marked) {
  const int stride = nx + 1;
  std::fill(out, out + stride, 0);
  for (int y = 0; y < ny; ++y) {
    int* row = out + static_cast<std::ptrdiff_t>(y + 1) * stride;
    const int* above = out + static_cast<std::ptrdiff_t>(y) * stride;
    row[0] = 0;
    int run = 0;
    for (int x = 0; x < nx; ++x) {
      run += marked(x, y) ? 1 : 0;
      row[x + 1] = above[x + 1] + run;
    }
  }
}

CellRect clip(const CellRect& r, int nx, int ny) {
  const int x0 = std::max(r.x, 0);
  const int y0 = std::max(r.y, 0);
  const int x1 = std::min(r.x + r.w, nx);
  const int y1 = std::min(r.y + r.h, ny);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

struct Occupant {
  CellRect rect;
  int layer;
};

}  // namespace

std::vector<double> FuObjectives::transformed() const {
  const double scale = 1.0 + static_cast<double>(f1);
  return {static_cast<double>(f1), scale * f2, scale * f3};
}

FuDecoder::FuDecoder(const Problem& problem, DecoderOptions options)
    : problem_(&problem), options_(std::move(options)) {
  problem.stack.validate();
  validate_units(problem.units);
  validate_netlist(problem.netlist, problem.units);
  nx_ = problem.stack.nx();
  ny_ = problem.stack.ny();
  layers_ = problem.stack.layer_count();

  const std::size_t n = problem.units.size();
  neighbors_.assign(n, {});
  for (const auto& net : problem.netlist) {
    neighbors_[net.a].push_back(net.b);
    neighbors_[net.b].push_back(net.a);
  }
  density_.resize(n);
  for (std::size_t i = 0; i < n; ++i) density_[i] = problem.units[i].power_density();

  const double pitch = problem.constraints.layer_pitch_cells;
  const double coincident = problem.constraints.coincident_distance_cells;
  if (!(coincident > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "coincident_distance_cells must be positive");
  }
  kdx_ = 2 * nx_ + 2;
  kdy_ = 2 * ny_ + 2;
  kernel_.resize(static_cast<std::size_t>(layers_) * kdy_ * kdx_);
  for (int dz = 0; dz < layers_; ++dz) {
    for (int dy = 0; dy < kdy_; ++dy) {
      for (int dx = 0; dx < kdx_; ++dx) {
        const double ex = 0.5 * dx;
        const double ey = 0.5 * dy;
        const double ez = pitch * dz;
        const double d = std::sqrt(ex * ex + ey * ey + ez * ez);
        kernel_[(static_cast<std::size_t>(dz) * kdy_ + dy) * kdx_ + dx] =
            d > 0.0 ? 1.0 / d : 1.0 / coincident;
      }
    }
  }

  for (const auto& wall : options_.walls) {
    if (wall.layer < 0 || wall.layer >= layers_) {
      throw Error(ErrorCode::kOutOfBounds, "air wall layer outside the stack");
    }
    wall_rects_.push_back(wall_rect(wall, problem.stack));
  }

  if (options_.regions) {
    const auto& rc = *options_.regions;
    const std::size_t cells = static_cast<std::size_t>(nx_) * ny_ * layers_;
    if (rc.allowed.size() != cells || rc.unit_region.size() != n) {
      throw Error(ErrorCode::kLengthMismatch, "region constraint does not match the problem");
    }
    const std::array<std::uint8_t, 2> bits = {RegionConstraint::kHotBit,
                                              RegionConstraint::kWarmBit};
    for (int r = 0; r < 2; ++r) {
      disallowed_prefix_[r].assign(layers_, std::vector<int>(
                                                static_cast<std::size_t>(nx_ + 1) * (ny_ + 1)));
      for (int z = 0; z < layers_; ++z) {
        build_prefix(disallowed_prefix_[r][z].data(), nx_, ny_, [&](int x, int y) {
          for (std::size_t w = 0; w < wall_rects_.size(); ++w) {
            // Wall cells are occupants; the overlap check handles them.
            if (options_.walls[w].layer == z && wall_rects_[w].contains(x, y)) return false;
          }
          const auto idx = (static_cast<std::size_t>(z) * ny_ + y) * nx_ + x;
          return (rc.allowed[idx] & bits[r]) == 0;
        });
      }
    }
  }
}

/// Mutable per-decode bookkeeping.
class DecodeState {
 public:
  explicit DecodeState(const FuDecoder& d)
      : d_(d),
        stride_(d.nx_ + 1),
        plane_(static_cast<std::size_t>(d.nx_ + 1) * (d.ny_ + 1)),
        occ_(static_cast<std::size_t>(d.nx_) * d.ny_ * d.layers_, 0),
        prefix_(plane_ * d.layers_, 0),
        cx2_(d.problem_->units.size(), 0),
        cy2_(d.problem_->units.size(), 0),
        z_(d.problem_->units.size(), -1) {
    if (d.options_.tsv_aware && d.layers_ > 1) {
      top_occ_.assign(static_cast<std::size_t>(d.nx_) * d.ny_, -1);
      colfree_.assign(plane_ * (d.layers_ - 1), 0);
      total_free_.assign(d.layers_ - 1, 0);
      required_ = d.layers_;
    }
    for (std::size_t w = 0; w < d.wall_rects_.size(); ++w) {
      occupy(d.wall_rects_[w], d.options_.walls[w].layer);
    }
    for (int z = 0; z < d.layers_; ++z) rebuild_prefix(z);
    if (tsv_tracking()) rebuild_colfree(d.layers_ - 2);
  }

  DecodeResult run(const FuChromosome& chrom) {
    const auto& units = d_.problem_->units;
    const std::size_t n = chrom.size();

    // Lattice parity classes still needed by sources later in the sequence.
    std::vector<std::uint8_t> needed_after(n + 1, 0);
    for (std::size_t k = n; k-- > 0;) {
      needed_after[k] = needed_after[k + 1];
      const auto& u = units[chrom[k].fu];
      if (u.kind == FuKind::kHeatSource) {
        const int w = u.span_x(chrom[k].rotated);
        const int h = u.span_y(chrom[k].rotated);
        needed_after[k] |= static_cast<std::uint8_t>(1u << ((w & 1) | ((h & 1) << 1)));
      }
    }

    DecodeResult result;
    result.floorplan.stack = d_.problem_->stack;
    result.floorplan.air_walls = d_.options_.walls;
    result.floorplan.placements.reserve(n);
    int f1 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Placement p = place_one(chrom[k], f1);
      result.floorplan.placements.push_back(p);
      commit(p, needed_after[k + 1]);
    }

    result.objectives.f1 = f1;
    const double pitch = d_.problem_->constraints.layer_pitch_cells;
    double f2 = 0.0;
    for (const auto& net : d_.problem_->netlist) {
      f2 += 0.5 * (std::abs(cx2_[net.a] - cx2_[net.b]) + std::abs(cy2_[net.a] - cy2_[net.b])) +
            pitch * std::abs(z_[net.a] - z_[net.b]);
    }
    result.objectives.f2 = f2;
    result.objectives.f3 = f3_proxy(result.floorplan.placements, units, pitch,
                                     d_.problem_->constraints.coincident_distance_cells);
    return result;
  }

 private:
  bool tsv_tracking() const { return !colfree_.empty(); }

  void occupy(const CellRect& rect, int z) {
    const CellRect c = clip(rect, d_.nx_, d_.ny_);
    for (int y = c.y; y < c.y + c.h; ++y) {
      for (int x = c.x; x < c.x + c.w; ++x) {
        ++occ_[(static_cast<std::size_t>(z) * d_.ny_ + y) * d_.nx_ + x];
        if (tsv_tracking()) {
          auto& t = top_occ_[static_cast<std::size_t>(y) * d_.nx_ + x];
          t = std::max(t, z);
        }
      }
    }
    occupants_.push_back({rect, z});
  }

  void rebuild_prefix(int z) {
    const std::uint16_t* layer = occ_.data() + static_cast<std::size_t>(z) * d_.ny_ * d_.nx_;
    build_prefix(prefix_.data() + plane_ * z, d_.nx_, d_.ny_,
                 [&](int x, int y) { return layer[y * d_.nx_ + x] != 0; });
  }

  // A column is free for depth l when nothing occupies layers l..top.
  void rebuild_colfree(int max_depth) {
    for (int l = 0; l <= max_depth; ++l) {
      int* p = colfree_.data() + plane_ * l;
      build_prefix(p, d_.nx_, d_.ny_,
                   [&](int x, int y) { return top_occ_[y * d_.nx_ + x] < l; });
      total_free_[l] = p[plane_ - 1];
    }
  }

  // Depth a TSV must reach for each candidate layer, given placed neighbours.
  void own_depths(int fu, std::vector<int>& own) const {
    own.assign(d_.layers_, d_.layers_);
    for (const int j : d_.neighbors_[fu]) {
      if (z_[j] < 0) continue;
      for (int z = 0; z < d_.layers_; ++z) {
        if (z != z_[j]) own[z] = std::min(own[z], std::min(z, z_[j]));
      }
    }
  }

  bool tsv_ok(int need, int x, int y, int w, int h, int z) const {
    if (!tsv_tracking() || broken_ || need > d_.layers_ - 2) return true;
    int free = total_free_[need];
    if (z >= need) free -= rect_sum(colfree_.data() + plane_ * need, stride_, x, y, w, h);
    return free > 0;
  }

  bool region_ok(int fu, int x, int y, int w, int h, int z) const {
    if (!d_.options_.regions) return true;
    const int r = static_cast<int>(d_.options_.regions->unit_region[fu]);
    return rect_sum(d_.disallowed_prefix_[r][z].data(), stride_, x, y, w, h) == 0;
  }

  int overlap_count(const CellRect& rect, int z) const {
    int count = 0;
    for (const auto& o : occupants_) {
      if (o.layer == z && o.rect.intersects(rect)) ++count;
    }
    return count;
  }

  Placement place_one(const Gene& gene, int& f1) {
    const auto& u = d_.problem_->units[gene.fu];
    const int w = u.span_x(gene.rotated);
    const int h = u.span_y(gene.rotated);
    const bool source = u.kind == FuKind::kHeatSource;
    const double pitch = d_.problem_->constraints.layer_pitch_cells;
    const double p = d_.density_[gene.fu];
    const int cls = (w & 1) | ((h & 1) << 1);
    const double* phi = phi_[cls].empty() ? nullptr : phi_[cls].data();

    std::vector<int> own;
    if (tsv_tracking()) own_depths(gene.fu, own);

    Placement best{gene.fu, 0, 0, 0, gene.rotated};
    if (w > d_.nx_ || h > d_.ny_) {
      f1 += 1 + overlap_count({0, 0, w, h}, 0);
      return best;
    }

    double best_cost = kInf;
    for (int z = 0; z < d_.layers_; ++z) {
      const int* occ = prefix_.data() + plane_ * z;
      const int need = tsv_tracking() ? std::min(required_, own[z]) : d_.layers_;
      for (int y = 0; y + h <= d_.ny_; ++y) {
        for (int x = 0; x + w <= d_.nx_; ++x) {
          if (rect_sum(occ, stride_, x, y, w, h) != 0) continue;
          if (!region_ok(gene.fu, x, y, w, h, z)) continue;
          if (!tsv_ok(need, x, y, w, h, z)) continue;
          double cost = 0.0;
          if (source) {
            if (phi) {
              cost = p * phi[plane_ * z + static_cast<std::size_t>(y + h / 2) * stride_ +
                             (x + w / 2)];
            }
          } else {
            const int cx2 = 2 * x + w;
            const int cy2 = 2 * y + h;
            for (const int j : d_.neighbors_[gene.fu]) {
              if (z_[j] < 0) continue;
              cost += 0.5 * (std::abs(cx2 - cx2_[j]) + std::abs(cy2 - cy2_[j])) +
                      pitch * std::abs(z - z_[j]);
            }
          }
          if (cost < best_cost) {
            best_cost = cost;
            best.x = x;
            best.y = y;
            best.z = z;
          }
        }
      }
    }
    if (best_cost < kInf) return best;

    // No violation-free position: take the first one with fewest violations.
    int best_v = std::numeric_limits<int>::max();
    for (int z = 0; z < d_.layers_ && best_v > 1; ++z) {
      const int need = tsv_tracking() ? std::min(required_, own[z]) : d_.layers_;
      for (int y = 0; y + h <= d_.ny_ && best_v > 1; ++y) {
        for (int x = 0; x + w <= d_.nx_ && best_v > 1; ++x) {
          int v = region_ok(gene.fu, x, y, w, h, z) ? 0 : 1;
          if (!tsv_ok(need, x, y, w, h, z)) ++v;
          if (v >= best_v) continue;
          v += overlap_count({x, y, w, h}, z);
          if (v < best_v) {
            best_v = v;
            best.x = x;
            best.y = y;
            best.z = z;
          }
        }
      }
    }
    f1 += best_v;
    return best;
  }

  void commit(const Placement& pl, std::uint8_t needed) {
    const auto& u = d_.problem_->units[pl.fu_id];
    const int w = u.span_x(pl.rotated);
    const int h = u.span_y(pl.rotated);
    std::vector<int> own;
    if (tsv_tracking()) own_depths(pl.fu_id, own);

    occupy({pl.x, pl.y, w, h}, pl.z);
    rebuild_prefix(pl.z);
    cx2_[pl.fu_id] = 2 * pl.x + w;
    cy2_[pl.fu_id] = 2 * pl.y + h;
    z_[pl.fu_id] = pl.z;

    if (tsv_tracking()) {
      rebuild_colfree(std::min(pl.z, d_.layers_ - 2));
      required_ = std::min(required_, own[pl.z]);
      if (required_ <= d_.layers_ - 2 && total_free_[required_] == 0) broken_ = true;
    }

    const double q = d_.density_[pl.fu_id];
    if (q <= 0.0) return;
    for (int c = 0; c < 4; ++c) {
      if ((needed & (1u << c)) == 0) continue;
      add_potential(c, q, cx2_[pl.fu_id], cy2_[pl.fu_id], pl.z);
    }
  }

  void add_potential(int cls, double q, int cx2, int cy2, int cz) {
    auto& phi = phi_[cls];
    if (phi.empty()) phi.assign(plane_ * d_.layers_, 0.0);
    const int pw = cls & 1;
    const int ph = (cls >> 1) & 1;
    for (int z = 0; z < d_.layers_; ++z) {
      const int dz = std::abs(z - cz);
      for (int j = 0; j <= d_.ny_; ++j) {
        const int dy2 = std::abs(2 * j + ph - cy2);
        const double* k =
            d_.kernel_.data() + (static_cast<std::size_t>(dz) * d_.kdy_ + dy2) * d_.kdx_;
        double* row = phi.data() + plane_ * z + static_cast<std::size_t>(j) * stride_;
        for (int i = 0; i <= d_.nx_; ++i) row[i] += q * k[std::abs(2 * i + pw - cx2)];
      }
    }
  }

  const FuDecoder& d_;
  std::size_t stride_;
  std::size_t plane_;
  std::vector<std::uint16_t> occ_;
  std::vector<int> prefix_;
  std::vector<Occupant> occupants_;
  std::vector<int> cx2_, cy2_, z_;
  std::array<std::vector<double>, 4> phi_;
  std::vector<int> top_occ_;
  std::vector<int> colfree_;
  std::vector<int> total_free_;
  int required_ = 0;
  bool broken_ = false;
};

DecodeResult FuDecoder::decode(const FuChromosome& chrom) const {
  validate_chromosome(chrom, problem_->units.size());
  DecodeState state(*this);
  return state.run(chrom);
}

DecodeResult decode(const FuChromosome& chrom, const Problem& problem) {
  return FuDecoder(problem, {}).decode(chrom);
}

DecodeResult decode_star(const FuChromosome& chrom, const Problem& problem) {
  DecoderOptions opt;
  opt.tsv_aware = true;
  return FuDecoder(problem, std::move(opt)).decode(chrom);
}

double f3_proxy(std::span<const Placement> placements, std::span<const FunctionalUnit> units,
                double layer_pitch_cells, double coincident_distance) {
  std::vector<Point3> c(placements.size());
  std::vector<double> p(placements.size());
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const auto id = placements[i].fu_id;
    if (id < 0 || static_cast<std::size_t>(id) >= units.size()) {
      throw Error(ErrorCode::kInvalidArgument, "placement references an unknown unit");
    }
    c[i] = center(placements[i], units[id]);
    p[i] = units[id].power_density();
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double dx = c[i].x - c[j].x;
      const double dy = c[i].y - c[j].y;
      const double dz = (c[i].z - c[j].z) * layer_pitch_cells;
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      sum += p[i] * p[j] / (d > 0.0 ? d : coincident_distance);
    }
  }
  return sum;
}

void validate_chromosome(const FuChromosome& chrom, std::size_t units) {
  if (chrom.size() != units) {
    throw Error(ErrorCode::kGenomeMismatch, "chromosome length differs from the unit count");
  }
  std::vector<bool> seen(units, false);
  for (const auto& g : chrom) {
    if (g.fu < 0 || static_cast<std::size_t>(g.fu) >= units || seen[g.fu]) {
      throw Error(ErrorCode::kGenomeMismatch, "chromosome is not a permutation of unit ids");
    }
    seen[g.fu] = true;
  }
}

FuChromosome random_chromosome(std::size_t units, Rng& rng) {
  FuChromosome c(units);
  for (std::size_t i = 0; i < units; ++i) c[i].fu = static_cast<int>(i);
  for (std::size_t i = units; i > 1; --i) std::swap(c[i - 1], c[rng.index(i)]);
  for (auto& g : c) g.rotated = rng.coin();
  return c;
}

std::pair<FuChromosome, FuChromosome> cycle_crossover(const FuChromosome& a, const FuChromosome& b,
                                                      Rng& /*rng*/) {
  validate_chromosome(a, a.size());
  validate_chromosome(b, a.size());
  const std::size_t n = a.size();
  if (n == 0) return {a, b};
  std::vector<std::size_t> pos_a(n);
  for (std::size_t i = 0; i < n; ++i) pos_a[a[i].fu] = i;
  std::vector<bool> in_cycle(n, false);
  std::size_t i = 0;
  do {
    in_cycle[i] = true;
    i = pos_a[b[i].fu];
  } while (i != 0);
  FuChromosome c1(n), c2(n);
  for (std::size_t k = 0; k < n; ++k) {
    c1[k] = in_cycle[k] ? a[k] : b[k];
    c2[k] = in_cycle[k] ? b[k] : a[k];
  }
  return {std::move(c1), std::move(c2)};
}

void mutate(FuChromosome& chrom, Rng& rng, double p) {
  if (rng.uniform() >= p || chrom.empty()) return;
  const std::size_t n = chrom.size();
  if (rng.coin() && n >= 2) {
    const std::size_t i = rng.index(n);
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    std::swap(chrom[i], chrom[j]);
  } else {
    auto& g = chrom[rng.index(n)];
    g.rotated = !g.rotated;
  }
}

}  // namespace tafp
