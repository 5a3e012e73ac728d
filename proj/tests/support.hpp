#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "tafp/lc_placer.hpp"
#include "tafp/problem.hpp"
#include "tafp/rng.hpp"
#include "tafp/stack.hpp"
#include "tafp/thermal.hpp"

namespace tafp::test {

inline StackSpec small_stack(int nx, int ny, int layers, double cell_um = 300.0) {
  StackSpec s;
  s.cell_xy_um = cell_um;
  s.width_um = nx * cell_um;
  s.length_um = ny * cell_um;
  s.layers.assign(static_cast<std::size_t>(layers), LayerSpec{});
  return s;
}

inline FunctionalUnit unit(int id, int w, int h, double power, FuKind kind = FuKind::kHeatSource) {
  FunctionalUnit u;
  u.id = id;
  u.label = "u" + std::to_string(id);
  u.width_cells = w;
  u.length_cells = h;
  u.power_W = power;
  u.kind = kind;
  return u;
}

inline Problem small_problem(int nx, int ny, int layers) {
  Problem p;
  p.stack = small_stack(nx, ny, layers);
  p.materials = materials::reference_table();
  return p;
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Steady temperatures from the node balance
///   sum_v g_uv (T_u - T_v) + b_u (T_u - T_amb) + f_u (T_u - T_up) = p_u
/// assembled densely and solved by elimination.
inline std::vector<double> dense_steady(const RCNetwork& net) {
  const std::size_t n = net.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(net.power());
  for (const auto& l : net.links()) {
    a[l.u][l.u] += l.g;
    a[l.v][l.v] += l.g;
    a[l.u][l.v] -= l.g;
    a[l.v][l.u] -= l.g;
  }
  for (std::size_t u = 0; u < n; ++u) {
    a[u][u] += net.boundary()[u];
    rhs[u] += net.boundary()[u] * net.ambient_K();
  }
  for (const auto& adv : net.advection()) {
    a[adv.node][adv.node] += adv.flow_W_per_K;
    if (adv.upstream) {
      a[adv.node][*adv.upstream] -= adv.flow_W_per_K;
    } else {
      rhs[adv.node] += adv.flow_W_per_K * net.inlet_K();
    }
  }
  return dense_solve(std::move(a), std::move(rhs));
}

/// Heat leaving through boundary faces plus enthalpy gained by the coolant,
/// summed independently of the library helper.
inline double outflow(const RCNetwork& net, const std::vector<double>& t) {
  double out = 0.0;
  for (std::size_t u = 0; u < net.size(); ++u) out += net.boundary()[u] * (t[u] - net.ambient_K());
  for (const auto& adv : net.advection()) {
    out += adv.flow_W_per_K * (t[adv.node] - (adv.upstream ? t[*adv.upstream] : net.inlet_K()));
  }
  return out;
}

/// Random legal floorplan on a small grid: units dropped at random free
/// spots, a few TSV columns and liquid channels. Returns the problem with the
/// units it placed.
struct RandomInstance {
  Problem problem;
  Floorplan floorplan;
};

inline RandomInstance random_instance(Rng& rng, int max_nx = 8, int max_ny = 8, int max_layers = 4) {
  const int nx = 2 + static_cast<int>(rng.index(max_nx - 1));
  const int ny = 2 + static_cast<int>(rng.index(max_ny - 1));
  const int layers = 1 + static_cast<int>(rng.index(max_layers));
  RandomInstance r{small_problem(nx, ny, layers), {}};
  r.floorplan.stack = r.problem.stack;
  const int want = 1 + static_cast<int>(rng.index(6));
  for (int tries = 0; tries < 60 && static_cast<int>(r.problem.units.size()) < want; ++tries) {
    const int id = static_cast<int>(r.problem.units.size());
    const int w = 1 + static_cast<int>(rng.index(3));
    const int h = 1 + static_cast<int>(rng.index(3));
    const FunctionalUnit u = unit(id, w, h, 0.5 + 4.0 * rng.uniform());
    Placement p{id, static_cast<int>(rng.index(nx)), static_cast<int>(rng.index(ny)),
                static_cast<int>(rng.index(layers)), false};
    r.problem.units.push_back(u);
    if (check_topology(p, r.floorplan, r.problem.units) != 0) {
      r.problem.units.pop_back();
      continue;
    }
    r.floorplan.placements.push_back(p);
  }
  const OccupancyGrid occ = build_occupancy(r.floorplan, r.problem.units);
  for (int k = 0; k < 2 && layers > 1; ++k) {
    const int x = static_cast<int>(rng.index(nx));
    const int y = static_cast<int>(rng.index(ny));
    bool taken = false;
    for (const auto& t : r.floorplan.tsvs) taken = taken || (t.x == x && t.y == y);
    if (!taken && tsv_path_exists(occ, x, y, 0)) r.floorplan.tsvs.push_back({x, y, 0});
  }
  const LcCandidateArray cand = enumerate_channel_candidates(r.floorplan);
  for (const auto& c : cand) {
    if (rng.uniform() < 0.2) {
      LiquidChannel ch;
      ch.x = c.x;
      ch.layer = c.layer;
      ch.h_conv_W_per_m2K = r.problem.thermal.channel_h_conv_W_per_m2K;
      ch.flow_W_per_K = 0.01 + 0.1 * rng.uniform();
      r.floorplan.liquid_channels.push_back(ch);
    }
  }
  return r;
}

/// Channel surrogate written out from the fitted log curves: every selected
/// channel cools the silicon cells of its layer in columns x-2..x+2, in
/// chromosome order, never below ambient and never upwards.
inline std::vector<double> lc_oracle(const TemperatureField& field, const LcCandidateArray& cand,
                                     const std::vector<std::uint8_t>& bits, double ambient) {
  static const double kA[] = {342.46, 321.28, 293.60};
  static const double kB[] = {-1664.4, -1541.5, -1380.8};
  std::vector<double> t = field.kelvin;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (!bits[k]) continue;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const NodeCoord& c = field.coords[i];
      const int d = std::abs(c.x - cand[k].x);
      if (c.slab != Slab::kSilicon || c.layer != cand[k].layer || d > 2) continue;
      const double fit = kA[d] * std::log(t[i]) + kB[d];
      if (fit < t[i]) t[i] = fit < ambient ? std::min(t[i], ambient) : fit;
    }
  }
  return t;
}

}  // namespace tafp::test
