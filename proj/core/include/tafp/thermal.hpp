#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tafp/problem.hpp"
#include "tafp/stack.hpp"

namespace tafp {

struct NodeCoord {
  int x = 0;
  int y = 0;
  int layer = 0;
  Slab slab = Slab::kSilicon;
};

/// Lumped thermal network C dT/dt + G T = P. Diffusive links are symmetric;
/// coolant transport is a directed term flow * (T_upstream - T_node), with
/// the first node of each channel fed from the inlet temperature.
class RCNetwork {
 public:
  struct Link {
    std::size_t u;
    std::size_t v;
    double g;  // W/K
  };
  struct Advection {
    std::size_t node;
    std::optional<std::size_t> upstream;  // empty: fed by the inlet
    double flow_W_per_K;
  };

  RCNetwork() = default;
  RCNetwork(std::size_t nodes, double ambient_K);

  std::size_t size() const { return capacitance_.size(); }
  double ambient_K() const { return ambient_K_; }
  double inlet_K() const { return inlet_K_; }
  void set_inlet_K(double t) { inlet_K_ = t; }

  void add_link(std::size_t u, std::size_t v, double g);
  void add_boundary(std::size_t u, double g);
  void add_advection(std::size_t node, std::optional<std::size_t> upstream, double flow_W_per_K);
  void set_capacitance(std::size_t u, double c);
  void add_power(std::size_t u, double p);
  void set_coords(std::vector<NodeCoord> coords) { coords_ = std::move(coords); }

  const std::vector<Link>& links() const { return links_; }
  const std::vector<Advection>& advection() const { return advection_; }
  const std::vector<double>& boundary() const { return boundary_; }
  const std::vector<double>& capacitance() const { return capacitance_; }
  const std::vector<double>& power() const { return power_; }
  const std::vector<NodeCoord>& coords() const { return coords_; }

  double total_power() const;
  /// 0.5 * min_u c(u) / (sum of conductances leaving u).
  double stability_bound() const;

 private:
  void check_node(std::size_t u) const;

  double ambient_K_ = 300.0;
  double inlet_K_ = 300.0;
  std::vector<Link> links_;
  std::vector<Advection> advection_;
  std::vector<double> boundary_;
  std::vector<double> capacitance_;
  std::vector<double> power_;
  std::vector<NodeCoord> coords_;
};

struct TemperatureField {
  std::vector<double> kelvin;
  std::vector<NodeCoord> coords;

  std::size_t size() const { return kelvin.size(); }
};

/// Node index of (x, y) on a grid level.
inline std::size_t node_index(const CellGrid& grid, int level, int x, int y) {
  return (static_cast<std::size_t>(level) * grid.ny + y) * grid.nx + x;
}

/// Builds the network for a floorplan. When `temperatures` is given, silicon
/// conductivity is evaluated per node at that temperature (if enabled in the
/// problem's thermal parameters); otherwise at ambient.
RCNetwork assemble(const Floorplan& fp, const Problem& problem,
                   const std::vector<double>* temperatures = nullptr);

/// One explicit step. Throws Error(kUnstableTimeStep) when dt exceeds the
/// stability bound.
TemperatureField step_forward_euler(const RCNetwork& net, const TemperatureField& t, double dt);

/// Direct sparse solve of G T = P (plus boundary and inlet terms).
/// Unpowered nodes with no conductive path anywhere are reported at ambient;
/// a powered floating island throws Error(kSingularSystem). Large systems are
/// solved iteratively to a 1e-13 relative residual, starting from `guess`
/// when given; small ones are factorized.
TemperatureField solve_steady(const RCNetwork& net, const TemperatureField* guess = nullptr);

/// Forward-Euler integration until the largest per-step change drops below
/// tol_K or max_steps is reached.
struct TransientResult {
  TemperatureField field;
  std::size_t steps = 0;
};
TransientResult integrate_to_steady(const RCNetwork& net, TemperatureField start, double dt,
                                    double tol_K, std::size_t max_steps);

/// Steady solve with silicon conductivity iterated to a fixed point.
struct SteadyResult {
  RCNetwork network;
  TemperatureField field;
  int iterations = 0;
};
SteadyResult simulate_steady(const Floorplan& fp, const Problem& problem);

TemperatureField uniform_field(const RCNetwork& net, double kelvin);

/// max |G T - P - boundary - inlet| over nodes.
double steady_residual(const RCNetwork& net, const TemperatureField& t);

/// Heat leaving through the boundary faces plus heat carried off by coolant.
double heat_outflow(const RCNetwork& net, const TemperatureField& t);

struct ThermalMetrics {
  double max_K = 0.0;
  double mean_K = 0.0;
  double gradient_K = 0.0;  // mean over layers of (max - min) on silicon
};

ThermalMetrics report_metrics(const TemperatureField& t);

/// CSV with header x,y,layer,slab,temperature_K.
void write_field_csv(std::ostream& os, const TemperatureField& t);
TemperatureField read_field_csv(std::istream& is);

}  // namespace tafp
