#include "tafp/thermal.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "tafp/error.hpp"

namespace tafp {

RCNetwork::RCNetwork(std::size_t nodes, double ambient_K)
    : ambient_K_(ambient_K),
      inlet_K_(ambient_K),
      boundary_(nodes, 0.0),
      capacitance_(nodes, 0.0),
      power_(nodes, 0.0) {}

void RCNetwork::check_node(std::size_t u) const {
  if (u >= size()) throw Error(ErrorCode::kOutOfBounds, "network node index out of range");
}

void RCNetwork::add_link(std::size_t u, std::size_t v, double g) {
  check_node(u);
  check_node(v);
  if (!(g >= 0.0) || u == v) throw Error(ErrorCode::kInvalidArgument, "invalid link");
  if (g > 0.0) links_.push_back({u, v, g});
}

void RCNetwork::add_boundary(std::size_t u, double g) {
  check_node(u);
  if (!(g >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative boundary conductance");
  boundary_[u] += g;
}

void RCNetwork::add_advection(std::size_t node, std::optional<std::size_t> upstream,
                              double flow_W_per_K) {
  check_node(node);
  if (upstream) check_node(*upstream);
  if (!(flow_W_per_K >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative coolant flow");
  advection_.push_back({node, upstream, flow_W_per_K});
}

void RCNetwork::set_capacitance(std::size_t u, double c) {
  check_node(u);
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "capacitance must be positive");
  capacitance_[u] = c;
}

void RCNetwork::add_power(std::size_t u, double p) {
  check_node(u);
  power_[u] += p;
}

double RCNetwork::total_power() const {
  return std::accumulate(power_.begin(), power_.end(), 0.0);
}

double RCNetwork::stability_bound() const {
  std::vector<double> out(boundary_);
  for (const auto& l : links_) {
    out[l.u] += l.g;
    out[l.v] += l.g;
  }
  for (const auto& a : advection_) out[a.node] += a.flow_W_per_K;
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < size(); ++u) {
    if (out[u] > 0.0) bound = std::min(bound, 0.5 * capacitance_[u] / out[u]);
  }
  return bound;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

enum class CellMaterial : std::uint8_t { kSilicon, kOxide, kEpoxy, kTsv, kAir, kWater };

struct Props {
  double k = 0.0;
  double c = 0.0;
  bool liquid = false;
};

class Assembler {
 public:
  Assembler(const Floorplan& fp, const Problem& problem, const std::vector<double>* temps)
      : fp_(fp), problem_(problem), temps_(temps), grid_(build_grid(fp.stack)) {
    const auto& m = problem.materials;
    si_ = m.at(materials::kSilicon);
    props_[static_cast<int>(CellMaterial::kOxide)] = from(m.at(materials::kOxide));
    props_[static_cast<int>(CellMaterial::kEpoxy)] = from(m.at(materials::kEpoxy));
    props_[static_cast<int>(CellMaterial::kTsv)] = from(m.at(materials::kTsv));
    Props air = from(m.at(materials::kAir));
    if (problem.thermal.air_k_override_W_per_mK) air.k = *problem.thermal.air_k_override_W_per_mK;
    props_[static_cast<int>(CellMaterial::kAir)] = air;
    Props water = from(m.at(materials::kWater));
    water.liquid = true;
    props_[static_cast<int>(CellMaterial::kWater)] = water;
    props_[static_cast<int>(CellMaterial::kSilicon)] = from(si_);
  }

  RCNetwork run();

 private:
  static Props from(const Material& mat) { return {mat.k_W_per_mK, mat.c_vol_J_per_m3K, false}; }

  std::size_t count() const { return grid_.levels.size() * grid_.cells_per_level(); }
  std::size_t node(int level, int x, int y) const { return node_index(grid_, level, x, y); }

  void classify();
  void add_power();
  Props props(std::size_t u) const;
  double half_resistance(const Props& p, double length_m, double area_m2, std::size_t u) const;

  const Floorplan& fp_;
  const Problem& problem_;
  const std::vector<double>* temps_;
  CellGrid grid_;
  Material si_;
  Props props_[6];
  std::vector<CellMaterial> material_;
  std::vector<double> channel_h_;  // per node, liquid nodes only
  RCNetwork net_;
};

Props Assembler::props(std::size_t u) const {
  const CellMaterial m = material_[u];
  Props p = props_[static_cast<int>(m)];
  if (m == CellMaterial::kSilicon) {
    const bool live = temps_ != nullptr && problem_.thermal.si_temperature_dependent;
    p.k = si_.conductivity(live ? (*temps_)[u] : fp_.stack.ambient_K,
                           problem_.thermal.si_reference_K);
  }
  return p;
}

// Resistance from the node center to a face: conduction through half the
// cell, or the convective film for coolant cells.
double Assembler::half_resistance(const Props& p, double length_m, double area_m2,
                                  std::size_t u) const {
  if (p.liquid) return 1.0 / (channel_h_[u] * area_m2);
  if (p.k <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * length_m / (p.k * area_m2);
}

void Assembler::classify() {
  const int nx = grid_.nx, ny = grid_.ny;
  material_.assign(count(), CellMaterial::kSilicon);
  channel_h_.assign(count(), 0.0);
  for (std::size_t lv = 0; lv < grid_.levels.size(); ++lv) {
    const Slab s = grid_.levels[lv].slab;
    const CellMaterial base = s == Slab::kSilicon ? CellMaterial::kSilicon
                              : s == Slab::kOxide ? CellMaterial::kOxide
                                                  : CellMaterial::kEpoxy;
    std::fill_n(material_.begin() + static_cast<std::ptrdiff_t>(lv * grid_.cells_per_level()),
                grid_.cells_per_level(), base);
  }
  auto mark_layer = [&](int layer, int x, int y, CellMaterial m) {
    for (Slab s : {Slab::kSilicon, Slab::kOxide, Slab::kEpoxy}) {
      const int lv = grid_.level_of(layer, s);
      if (lv >= 0) material_[node(lv, x, y)] = m;
    }
  };
  for (const auto& w : fp_.air_walls) {
    if (w.layer < 0 || w.layer >= grid_.layers) {
      throw Error(ErrorCode::kOutOfBounds, "air wall layer out of range");
    }
    const CellRect r = wall_rect(w, fp_.stack);
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) mark_layer(w.layer, x, y, CellMaterial::kAir);
  }
  for (const auto& t : fp_.tsvs) {
    if (t.x < 0 || t.y < 0 || t.x >= nx || t.y >= ny || t.to_layer < 0 || t.to_layer >= grid_.layers) {
      throw Error(ErrorCode::kOutOfBounds, "TSV outside the grid");
    }
    for (int l = t.to_layer; l < grid_.layers; ++l) {
      const int lv = grid_.level_of(l, Slab::kSilicon);
      if (material_[node(lv, t.x, t.y)] == CellMaterial::kAir) {
        throw Error(ErrorCode::kCollision, "TSV crosses an air wall");
      }
      mark_layer(l, t.x, t.y, CellMaterial::kTsv);
    }
  }
  for (const auto& ch : fp_.liquid_channels) {
    if (ch.x < 0 || ch.x >= nx || ch.layer < 0 || ch.layer >= grid_.layers) {
      throw Error(ErrorCode::kOutOfBounds, "liquid channel outside the grid");
    }
    if (ch.coolant != materials::kWater) {
      (void)problem_.materials.at(ch.coolant);
      throw Error(ErrorCode::kUnknownMaterial, "only water coolant is modeled");
    }
    if (!(ch.h_conv_W_per_m2K > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "liquid channel needs a positive h_conv");
    }
    const int lv = grid_.level_of(ch.layer, Slab::kOxide);
    for (int y = 0; y < ny; ++y) {
      const std::size_t u = node(lv, ch.x, y);
      if (material_[u] != CellMaterial::kOxide) {
        throw Error(ErrorCode::kCollision, "liquid channel collides with a TSV, wall or channel");
      }
      material_[u] = CellMaterial::kWater;
      channel_h_[u] = ch.h_conv_W_per_m2K;
    }
  }
}

void Assembler::add_power() {
  for (const auto& p : fp_.placements) {
    if (p.fu_id < 0 || p.fu_id >= static_cast<int>(problem_.units.size())) {
      throw Error(ErrorCode::kInvalidArgument, "placement references an undeclared unit");
    }
    const auto& fu = problem_.units[p.fu_id];
    const CellRect r = footprint(p, fu);
    if (!r.inside(grid_.nx, grid_.ny) || p.z < 0 || p.z >= grid_.layers) {
      throw Error(ErrorCode::kOutOfBounds, "unit '" + fu.label + "' lies outside the grid");
    }
    const double per_cell = fu.power_W / (static_cast<double>(r.w) * r.h);
    const int lv = grid_.level_of(p.z, Slab::kSilicon);
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) net_.add_power(node(lv, x, y), per_cell);
  }
}

RCNetwork Assembler::run() {
  const auto& tp = problem_.thermal;
  net_ = RCNetwork(count(), fp_.stack.ambient_K);
  net_.set_inlet_K(tp.coolant_inlet_K.value_or(fp_.stack.ambient_K));
  if (temps_ != nullptr && temps_->size() != count()) {
    throw Error(ErrorCode::kLengthMismatch, "temperature vector does not match the grid");
  }
  classify();

  const int nx = grid_.nx, ny = grid_.ny;
  const double d = grid_.cell_um * 1e-6;
  const int levels = static_cast<int>(grid_.levels.size());

  std::vector<NodeCoord> coords(count());
  for (int lv = 0; lv < levels; ++lv) {
    const double h = grid_.levels[lv].height_um * 1e-6;
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const std::size_t u = node(lv, x, y);
        coords[u] = {x, y, grid_.levels[lv].layer, grid_.levels[lv].slab};
        const Props pu = props(u);
        net_.set_capacitance(u, pu.c * d * d * h);

        auto lateral = [&](std::size_t v) {
          const Props pv = props(v);
          if (pu.liquid && pv.liquid) {
            // Neighbouring channels exchange heat by conduction in the water.
            const double area = d * h;
            net_.add_link(u, v, pu.k * area / d);
            return;
          }
          const double area = d * h;
          const double r = half_resistance(pu, d, area, u) + half_resistance(pv, d, area, v);
          if (std::isfinite(r)) net_.add_link(u, v, 1.0 / r);
        };
        if (x + 1 < nx) lateral(node(lv, x + 1, y));
        if (y + 1 < ny) {
          const std::size_t v = node(lv, x, y + 1);
          if (!(pu.liquid && props(v).liquid)) lateral(v);
        }
        if (lv + 1 < levels) {
          const std::size_t v = node(lv + 1, x, y);
          const Props pv = props(v);
          const double hv = grid_.levels[lv + 1].height_um * 1e-6;
          const double area = d * d;
          const double r = half_resistance(pu, h, area, u) + half_resistance(pv, hv, area, v);
          if (std::isfinite(r)) net_.add_link(u, v, 1.0 / r);
        }

        // Convective boundary faces; the bottom face is adiabatic.
        auto face = [&](double h_amb, double length_m, double area) {
          const double r = half_resistance(pu, length_m, area, u) + 1.0 / (h_amb * area);
          if (std::isfinite(r) && h_amb > 0.0) net_.add_boundary(u, 1.0 / r);
        };
        if (lv + 1 == levels) face(tp.h_top_W_per_m2K, h, d * d);
        const int x_faces = (x == 0) + (x == nx - 1);
        for (int i = 0; i < x_faces; ++i) face(tp.h_side_W_per_m2K, d, d * h);
        if (!pu.liquid) {
          const int y_faces = (y == 0) + (y == ny - 1);
          for (int i = 0; i < y_faces; ++i) face(tp.h_side_W_per_m2K, d, d * h);
        }
      }
    }
  }

  for (const auto& ch : fp_.liquid_channels) {
    const int lv = grid_.level_of(ch.layer, Slab::kOxide);
    for (int y = 0; y < ny; ++y) {
      std::optional<std::size_t> up;
      if (y > 0) up = node(lv, ch.x, y - 1);
      net_.add_advection(node(lv, ch.x, y), up, ch.flow_W_per_K);
    }
  }

  add_power();
  net_.set_coords(std::move(coords));
  return std::move(net_);
}

}  // namespace

RCNetwork assemble(const Floorplan& fp, const Problem& problem, const std::vector<double>* temperatures) {
  return Assembler(fp, problem, temperatures).run();
}

// ---------------------------------------------------------------------------
// Time stepping

namespace {

// Net heat flow into each node at temperatures t.
std::vector<double> net_inflow(const RCNetwork& net, const std::vector<double>& t) {
  const std::size_t n = net.size();
  std::vector<double> q(net.power());
  for (std::size_t u = 0; u < n; ++u) q[u] += net.boundary()[u] * (net.ambient_K() - t[u]);
  for (const auto& l : net.links()) {
    const double f = l.g * (t[l.v] - t[l.u]);
    q[l.u] += f;
    q[l.v] -= f;
  }
  for (const auto& a : net.advection()) {
    const double upstream = a.upstream ? t[*a.upstream] : net.inlet_K();
    q[a.node] += a.flow_W_per_K * (upstream - t[a.node]);
  }
  return q;
}

}  // namespace

TemperatureField uniform_field(const RCNetwork& net, double kelvin) {
  return {std::vector<double>(net.size(), kelvin), net.coords()};
}

TemperatureField step_forward_euler(const RCNetwork& net, const TemperatureField& t, double dt) {
  if (t.size() != net.size()) throw Error(ErrorCode::kLengthMismatch, "field size mismatch");
  if (!(dt > 0.0) || dt > net.stability_bound()) {
    throw Error(ErrorCode::kUnstableTimeStep,
                fmt::format("dt={} exceeds stability bound {}", dt, net.stability_bound()));
  }
  const std::vector<double> q = net_inflow(net, t.kelvin);
  TemperatureField out{t.kelvin, t.coords};
  for (std::size_t u = 0; u < net.size(); ++u) out.kelvin[u] += dt / net.capacitance()[u] * q[u];
  return out;
}

TransientResult integrate_to_steady(const RCNetwork& net, TemperatureField start, double dt,
                                    double tol_K, std::size_t max_steps) {
  TransientResult r{std::move(start), 0};
  while (r.steps < max_steps) {
    TemperatureField next = step_forward_euler(net, r.field, dt);
    double change = 0.0;
    for (std::size_t u = 0; u < net.size(); ++u) {
      change = std::max(change, std::abs(next.kelvin[u] - r.field.kelvin[u]));
    }
    r.field = std::move(next);
    ++r.steps;
    if (change < tol_K) break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Steady state

namespace {

struct DisjointSet {
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

template <typename Solver>
Eigen::VectorXd solve_with(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs) {
  Solver solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "sparse factorization failed");
  }
  Eigen::VectorXd x = solver.solve(rhs);
  // A couple of refinement passes pull the residual to round-off.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd res = rhs - a * x;
    x += solver.solve(res);
  }
  return x;
}

// Larger systems go to a Krylov solver first; factorization fill grows
// quickly on 3D grids.
constexpr std::size_t kDirectLimit = 4096;
constexpr double kIterativeTolerance = 1e-13;

std::optional<Eigen::VectorXd> solve_iterative(const Eigen::SparseMatrix<double>& a,
                                               const Eigen::VectorXd& rhs,
                                               const Eigen::VectorXd& x0) {
  const auto max_iter = std::max<Eigen::Index>(1000, a.rows() / 2);
  {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> it;
    it.setTolerance(kIterativeTolerance);
    it.setMaxIterations(max_iter);
    it.compute(a);
    Eigen::VectorXd x = it.solveWithGuess(rhs, x0);
    if (it.info() == Eigen::Success) return x;
  }
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
  it.setTolerance(kIterativeTolerance);
  it.setMaxIterations(max_iter);
  it.preconditioner().setDroptol(1e-4);
  it.preconditioner().setFillfactor(10);
  it.compute(a);
  if (it.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd x = it.solveWithGuess(rhs, x0);
  if (it.info() == Eigen::Success) return x;
  return std::nullopt;
}

}  // namespace

double steady_residual(const RCNetwork& net, const TemperatureField& t) {
  const std::vector<double> q = net_inflow(net, t.kelvin);
  double r = 0.0;
  for (double v : q) r = std::max(r, std::abs(v));
  return r;
}

TemperatureField solve_steady(const RCNetwork& net, const TemperatureField* guess) {
  const std::size_t n = net.size();
  const double amb = net.ambient_K();

  // Nodes in components without any path to a fixed temperature cannot be
  // solved; unpowered ones carry no heat and stay at ambient.
  DisjointSet ds(n);
  for (const auto& l : net.links()) ds.unite(l.u, l.v);
  for (const auto& a : net.advection()) {
    if (a.upstream && a.flow_W_per_K > 0.0) ds.unite(a.node, *a.upstream);
  }
  std::vector<char> grounded(n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    if (net.boundary()[u] > 0.0) grounded[ds.find(u)] = 1;
  }
  for (const auto& a : net.advection()) {
    if (!a.upstream && a.flow_W_per_K > 0.0) grounded[ds.find(a.node)] = 1;
  }
  std::vector<std::ptrdiff_t> row(n, -1);
  std::size_t m = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (grounded[ds.find(u)]) {
      row[u] = static_cast<std::ptrdiff_t>(m++);
    } else if (net.power()[u] != 0.0) {
      throw Error(ErrorCode::kSingularSystem,
                  fmt::format("node {} is powered but has no thermal path to ambient", u));
    }
  }

  TemperatureField out = uniform_field(net, amb);
  if (m == 0) return out;

  // Unknowns are rises above ambient so decoupled unpowered regions come out
  // exactly at ambient.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(net.links().size() * 4 + n + net.advection().size() * 2);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t u = 0; u < n; ++u) {
    if (row[u] < 0) continue;
    trips.emplace_back(row[u], row[u], net.boundary()[u]);
    rhs[row[u]] += net.power()[u];
  }
  for (const auto& l : net.links()) {
    const auto ru = row[l.u], rv = row[l.v];
    if (ru < 0) continue;
    trips.emplace_back(ru, ru, l.g);
    trips.emplace_back(rv, rv, l.g);
    trips.emplace_back(ru, rv, -l.g);
    trips.emplace_back(rv, ru, -l.g);
  }
  for (const auto& a : net.advection()) {
    const auto r = row[a.node];
    if (r < 0) continue;
    trips.emplace_back(r, r, a.flow_W_per_K);
    if (a.upstream) {
      trips.emplace_back(r, row[*a.upstream], -a.flow_W_per_K);
    } else {
      rhs[r] += a.flow_W_per_K * (net.inlet_K() - amb);
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();

  Eigen::VectorXd theta;
  if (m > kDirectLimit) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    if (guess != nullptr && guess->size() == n) {
      for (std::size_t u = 0; u < n; ++u) {
        if (row[u] >= 0) x0[row[u]] = guess->kelvin[u] - amb;
      }
    }
    if (auto x = solve_iterative(a, rhs, x0)) theta = std::move(*x);
  }
  if (theta.size() == 0) {
    bool symmetric = true;
    for (const auto& adv : net.advection()) {
      if (row[adv.node] >= 0 && adv.upstream && adv.flow_W_per_K != 0.0) symmetric = false;
    }
    if (symmetric) {
      theta = solve_with<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                               Eigen::AMDOrdering<int>>>(a, rhs);
    } else {
      theta = solve_with<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>(
          a, rhs);
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (row[u] >= 0) out.kelvin[u] = amb + theta[row[u]];
  }
  return out;
}

SteadyResult simulate_steady(const Floorplan& fp, const Problem& problem) {
  SteadyResult r;
  r.network = assemble(fp, problem);
  r.field = solve_steady(r.network);
  r.iterations = 1;
  if (!problem.thermal.si_temperature_dependent) return r;
  // Picard: freeze k(T) at the previous iterate.
  for (; r.iterations < problem.thermal.picard_max_iterations; ++r.iterations) {
    RCNetwork next_net = assemble(fp, problem, &r.field.kelvin);
    TemperatureField next = solve_steady(next_net, &r.field);
    double change = 0.0;
    for (std::size_t u = 0; u < next.size(); ++u) {
      change = std::max(change, std::abs(next.kelvin[u] - r.field.kelvin[u]));
    }
    r.network = std::move(next_net);
    r.field = std::move(next);
    if (change < problem.thermal.picard_tolerance_K) {
      ++r.iterations;
      break;
    }
  }
  return r;
}

double heat_outflow(const RCNetwork& net, const TemperatureField& t) {
  double out = 0.0;
  for (std::size_t u = 0; u < net.size(); ++u) out += net.boundary()[u] * (t.kelvin[u] - net.ambient_K());
  for (const auto& a : net.advection()) {
    const double upstream = a.upstream ? t.kelvin[*a.upstream] : net.inlet_K();
    out += a.flow_W_per_K * (t.kelvin[a.node] - upstream);
  }
  return out;
}

ThermalMetrics report_metrics(const TemperatureField& t) {
  ThermalMetrics m;
  if (t.kelvin.empty()) return m;
  m.max_K = *std::max_element(t.kelvin.begin(), t.kelvin.end());
  m.mean_K = std::accumulate(t.kelvin.begin(), t.kelvin.end(), 0.0) / static_cast<double>(t.size());

  int layers = 0;
  for (const auto& c : t.coords) layers = std::max(layers, c.layer + 1);
  std::vector<double> lo(layers, std::numeric_limits<double>::infinity());
  std::vector<double> hi(layers, -std::numeric_limits<double>::infinity());
  for (std::size_t u = 0; u < t.coords.size(); ++u) {
    const auto& c = t.coords[u];
    if (c.slab != Slab::kSilicon) continue;
    lo[c.layer] = std::min(lo[c.layer], t.kelvin[u]);
    hi[c.layer] = std::max(hi[c.layer], t.kelvin[u]);
  }
  double sum = 0.0;
  int counted = 0;
  for (int l = 0; l < layers; ++l) {
    if (hi[l] < lo[l]) continue;
    sum += hi[l] - lo[l];
    ++counted;
  }
  m.gradient_K = counted > 0 ? sum / counted : 0.0;
  return m;
}

void write_field_csv(std::ostream& os, const TemperatureField& t) {
  os << "x,y,layer,slab,temperature_K\n";
  for (std::size_t u = 0; u < t.size(); ++u) {
    const auto& c = t.coords[u];
    os << fmt::format("{},{},{},{},{:.6f}\n", c.x, c.y, c.layer, to_string(c.slab), t.kelvin[u]);
  }
}

TemperatureField read_field_csv(std::istream& is) {
  TemperatureField t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,layer,slab,temperature_K", 0) != 0) {
    throw Error(ErrorCode::kParse, "temperature CSV header missing");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell[5];
    for (auto& c : cell) std::getline(ss, c, ',');
    NodeCoord nc;
    try {
      nc.x = std::stoi(cell[0]);
      nc.y = std::stoi(cell[1]);
      nc.layer = std::stoi(cell[2]);
      t.kelvin.push_back(std::stod(cell[4]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "bad temperature CSV row: " + line);
    }
    if (cell[3] == "si") nc.slab = Slab::kSilicon;
    else if (cell[3] == "sio2") nc.slab = Slab::kOxide;
    else if (cell[3] == "epoxy") nc.slab = Slab::kEpoxy;
    else throw Error(ErrorCode::kParse, "unknown slab '" + cell[3] + "'");
    t.coords.push_back(nc);
  }
  return t;
}

}  // namespace tafp
