#ifndef VORTEXLAB_OPTIMAL_TRANSPORT_HPP
#define VORTEXLAB_OPTIMAL_TRANSPORT_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "vortexlab/core.hpp"

namespace vortexlab {

/// Finite weighted sum of Diracs. Masses may carry either sign.
struct AtomicMeasure {
  Vec2List<double> positions;
  std::vector<double> masses;

  AtomicMeasure() = default;
  AtomicMeasure(Vec2List<double> pos, std::vector<double> mass);

  void add(const Vec2d& x, double mass);
  [[nodiscard]] std::size_t size() const { return positions.size(); }
  [[nodiscard]] double total_mass() const { return total_; }
  [[nodiscard]] double total_variation() const;
  void validate() const;

 private:
  double total_ = 0.0;
};

struct Route {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

/// Optimal coupling witness. Indices refer to the atoms of the measures
/// passed to the solver (after coarsening, to the aggregated atoms).
struct TransportPlan {
  std::vector<Route> routes;
  double cost = 0.0;
};

/// Aggregation applied to inputs above the atom limit.
struct CoarseningReport {
  bool applied = false;
  double pitch = 0.0;
  /// sum of mass * distance moved when atoms were merged into cell centroids,
  /// over both measures; bounds the change in W1.
  double displacement = 0.0;
};

struct W1Result {
  double distance = 0.0;
  TransportPlan plan;
  CoarseningReport coarsening;
};

struct W1Options {
  std::size_t atom_limit = 5000;     ///< coarsen sides with more atoms than this
  double mass_tolerance = 1e-9;      ///< relative total-mass mismatch accepted
  std::size_t max_pivots = 0;        ///< 0 picks a size-based cap
};

/// Exact W1 (Euclidean ground cost) between nonnegative measures of equal
/// total mass, solved by primal network simplex on the bipartite graph.
W1Result w1_solve(const AtomicMeasure& mu, const AtomicMeasure& nu, const W1Options& options = {});

/// Optimal cost and plan; no coarsening is attempted.
std::pair<double, TransportPlan> w1_exact(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Kantorovich-Rubinstein distance between signed measures of equal total
/// mass: atoms of f - g closer than `merge_radius` are merged, the
/// difference is split into its positive and negative parts, and those are
/// transported onto each other.
double w1_signed(const AtomicMeasure& f, const AtomicMeasure& g, const W1Options& options = {},
                 CoarseningReport* coarsening = nullptr, double merge_radius = 1e-12);

/// Positive and negative parts of f - g after merging nearby atoms.
std::pair<AtomicMeasure, AtomicMeasure> signed_difference(const AtomicMeasure& f,
                                                          const AtomicMeasure& g,
                                                          double merge_radius = 1e-12);

/// Merge atoms into square cells of side `pitch`, each represented by the
/// mass-weighted centroid of its atoms.
AtomicMeasure coarsen(const AtomicMeasure& m, double pitch, double* displacement = nullptr);

}  // namespace vortexlab

#endif  // VORTEXLAB_OPTIMAL_TRANSPORT_HPP
