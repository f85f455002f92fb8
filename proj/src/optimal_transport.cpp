#include "vortexlab/optimal_transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>

#include "vortexlab/summation.hpp"

namespace vortexlab {

AtomicMeasure::AtomicMeasure(Vec2List<double> pos, std::vector<double> mass)
    : positions(std::move(pos)), masses(std::move(mass)) {
  if (positions.size() != masses.size())
    throw ValidationError("measure", "positions and masses differ in length");
  for (double m : masses) total_ += m;
}

void AtomicMeasure::add(const Vec2d& x, double mass) {
  positions.push_back(x);
  masses.push_back(mass);
  total_ += mass;
}

double AtomicMeasure::total_variation() const {
  double s = 0.0;
  for (double m : masses) s += std::abs(m);
  return s;
}

void AtomicMeasure::validate() const {
  if (positions.size() != masses.size())
    throw ValidationError("measure", "positions and masses differ in length");
  for (std::size_t k = 0; k < size(); ++k)
    if (!std::isfinite(masses[k]) || !std::isfinite(positions[k].x()) || !std::isfinite(positions[k].y()))
      throw ValidationError("measure", "non-finite atom");
}

namespace {

// Primal network simplex for the uncapacitated transportation problem.
//
// Nodes 0..n-1 are sources, n..n+m-1 sinks, n+m an artificial root joined to
// every node by a big-M arc. The spanning tree is kept strongly feasible
// (zero-flow tree arcs point away from the root) by picking the last blocking
// arc of the pivot cycle, which rules out cycling on degenerate instances.
// Non-tree arcs always carry zero flow, so flow is stored per tree node on
// the arc to its parent.
class TransportSimplex {
 public:
  TransportSimplex(const Vec2List<double>& src, const std::vector<double>& supply,
                   const Vec2List<double>& dst, const std::vector<double>& demand)
      : src_(src), dst_(dst), n_(src.size()), m_(dst.size()) {
    const std::size_t nodes = n_ + m_ + 1;
    root_ = n_ + m_;
    parent_.assign(nodes, kNone);
    arc_.assign(nodes, kArtificial);
    up_.assign(nodes, false);
    flow_.assign(nodes, 0.0);
    depth_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    children_.assign(nodes, {});
    slot_.assign(nodes, 0);

    double max_cost = 0.0;
    for (const auto& a : src_)
      for (const auto& b : dst_) max_cost = std::max(max_cost, distance(a, b));
    big_ = (max_cost + 1.0) * static_cast<double>(nodes);
    tolerance_ = 64.0 * std::numeric_limits<double>::epsilon() * (big_ + max_cost);

    for (std::size_t u = 0; u < root_; ++u) {
      const bool is_source = u < n_;
      attach(u, root_);
      up_[u] = is_source;  // source -> root, root -> sink
      flow_[u] = is_source ? supply[u] : demand[u - n_];
      depth_[u] = 1;
      pi_[u] = is_source ? -big_ : big_;
    }
  }

  void solve(std::size_t max_pivots) {
    const std::size_t arcs = n_ * m_;
    if (arcs == 0) return;
    const std::size_t block = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(double(arcs))));
    std::size_t next = 0;
    std::size_t pivots = 0;
    while (true) {
      double best = -tolerance_;
      std::size_t best_arc = arcs;
      std::size_t scanned = 0;
      std::size_t in_block = 0;
      while (scanned < arcs) {
        const std::size_t e = next;
        next = next + 1 == arcs ? 0 : next + 1;
        ++scanned;
        const double rc = reduced_cost(e);
        if (rc < best) {
          best = rc;
          best_arc = e;
        }
        if (++in_block == block) {
          if (best_arc != arcs) break;
          in_block = 0;
        }
      }
      if (best_arc == arcs) return;
      if (++pivots > max_pivots) throw std::runtime_error("network simplex exceeded its pivot cap");
      pivot(best_arc);
    }
  }

  TransportPlan plan() const {
    TransportPlan out;
    PairwiseAccumulator<double> cost;
    for (std::size_t w = 0; w < root_; ++w) {
      if (arc_[w] == kArtificial || !(flow_[w] > 0.0)) continue;
      const std::size_t i = arc_[w] / m_;
      const std::size_t j = arc_[w] % m_;
      out.routes.push_back({i, j, flow_[w]});
    }
    std::sort(out.routes.begin(), out.routes.end(), [](const Route& a, const Route& b) {
      return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    for (const auto& r : out.routes) cost.add(r.mass * distance(src_[r.source], dst_[r.target]));
    out.cost = cost.result();
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr std::size_t kArtificial = std::numeric_limits<std::size_t>::max();

  double arc_cost(std::size_t w) const {
    if (arc_[w] == kArtificial) return big_;
    return distance(src_[arc_[w] / m_], dst_[arc_[w] % m_]);
  }

  double reduced_cost(std::size_t e) const {
    const std::size_t i = e / m_;
    const std::size_t j = e % m_;
    return distance(src_[i], dst_[j]) + pi_[i] - pi_[n_ + j];
  }

  void attach(std::size_t w, std::size_t p) {
    parent_[w] = p;
    slot_[w] = children_[p].size();
    children_[p].push_back(w);
  }

  void detach(std::size_t w) {
    auto& list = children_[parent_[w]];
    const std::size_t last = list.back();
    list[slot_[w]] = last;
    slot_[last] = slot_[w];
    list.pop_back();
    parent_[w] = kNone;
  }

  void pivot(std::size_t e) {
    const std::size_t first = e / m_;
    const std::size_t second = n_ + e % m_;

    std::size_t a = first;
    std::size_t b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b])
        a = parent_[a];
      else
        b = parent_[b];
    }
    const std::size_t join = a;

    // Cycle orientation follows the entering arc first -> second.
    double delta = std::numeric_limits<double>::infinity();
    std::size_t out = kNone;
    bool out_on_first = false;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      if (up_[w] && flow_[w] < delta) {
        delta = flow_[w];
        out = w;
        out_on_first = true;
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      if (!up_[w] && flow_[w] <= delta) {
        delta = flow_[w];
        out = w;
        out_on_first = false;
      }
    }
    if (out == kNone) throw std::runtime_error("transport problem is unbounded");

    if (delta > 0.0) {
      for (std::size_t w = first; w != join; w = parent_[w]) flow_[w] += up_[w] ? -delta : delta;
      for (std::size_t w = second; w != join; w = parent_[w]) flow_[w] += up_[w] ? delta : -delta;
    }

    // Re-hang the path from the entering end up to the leaving node.
    const std::size_t in_node = out_on_first ? first : second;
    const std::size_t attach_to = out_on_first ? second : first;
    path_.clear();
    for (std::size_t w = in_node;; w = parent_[w]) {
      path_.push_back(w);
      if (w == out) break;
    }
    saved_.clear();
    for (std::size_t w : path_) saved_.push_back({arc_[w], up_[w], flow_[w]});
    for (std::size_t w : path_) detach(w);

    attach(path_[0], attach_to);
    arc_[path_[0]] = e;
    up_[path_[0]] = path_[0] == first;
    flow_[path_[0]] = delta;
    for (std::size_t k = 1; k < path_.size(); ++k) {
      attach(path_[k], path_[k - 1]);
      arc_[path_[k]] = saved_[k - 1].arc;
      up_[path_[k]] = !saved_[k - 1].up;
      flow_[path_[k]] = saved_[k - 1].flow;
    }
    refresh_subtree(path_[0]);
  }

  void refresh_subtree(std::size_t top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const std::size_t w = stack_.back();
      stack_.pop_back();
      const std::size_t p = parent_[w];
      depth_[w] = depth_[p] + 1;
      const double c = arc_cost(w);
      pi_[w] = up_[w] ? pi_[p] - c : pi_[p] + c;
      for (std::size_t ch : children_[w]) stack_.push_back(ch);
    }
  }

  struct Saved {
    std::size_t arc;
    bool up;
    double flow;
  };

  const Vec2List<double>& src_;
  const Vec2List<double>& dst_;
  std::size_t n_;
  std::size_t m_;
  std::size_t root_ = 0;
  double big_ = 0.0;
  double tolerance_ = 0.0;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> arc_;
  std::vector<bool> up_;
  std::vector<double> flow_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> slot_;
  std::vector<std::size_t> path_;
  std::vector<Saved> saved_;
  std::vector<std::size_t> stack_;
};

struct Compact {
  Vec2List<double> positions;
  std::vector<double> masses;
  std::vector<std::size_t> original;
};

Compact drop_empty(const AtomicMeasure& m, const char* name) {
  m.validate();
  Compact out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m.masses[k] < 0.0) throw DomainError(std::string(name) + " has a negative atom");
    if (m.masses[k] == 0.0) continue;
    out.positions.push_back(m.positions[k]);
    out.masses.push_back(m.masses[k]);
    out.original.push_back(k);
  }
  return out;
}

void check_balance(double a, double b, double scale, double tolerance) {
  if (std::abs(a - b) > tolerance * scale)
    throw MassMismatchError("total masses differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

std::pair<double, TransportPlan> solve_compact(const Compact& a, const Compact& b, std::size_t max_pivots) {
  TransportPlan plan;
  if (a.positions.empty() || b.positions.empty()) return {0.0, plan};
  TransportSimplex simplex(a.positions, a.masses, b.positions, b.masses);
  const std::size_t nodes = a.positions.size() + b.positions.size();
  simplex.solve(max_pivots ? max_pivots : 1000 * nodes + 100000);
  plan = simplex.plan();
  for (auto& r : plan.routes) {
    r.source = a.original[r.source];
    r.target = b.original[r.target];
  }
  return {plan.cost, plan};
}

}  // namespace

AtomicMeasure coarsen(const AtomicMeasure& m, double pitch, double* displacement) {
  if (!(pitch > 0.0)) throw ValidationError("pitch", "must be positive");
  if (m.size() == 0) {
    if (displacement) *displacement = 0.0;
    return m;
  }
  Vec2d lo = m.positions[0];
  for (const auto& p : m.positions) lo = lo.cwiseMin(p);
  struct Cell {
    double mass = 0.0;
    Vec2d moment = Vec2d::Zero();
  };
  std::map<std::pair<std::int64_t, std::int64_t>, Cell> cells;
  std::vector<std::pair<std::int64_t, std::int64_t>> key(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    key[k] = {static_cast<std::int64_t>(std::floor((m.positions[k].x() - lo.x()) / pitch)),
              static_cast<std::int64_t>(std::floor((m.positions[k].y() - lo.y()) / pitch))};
    Cell& c = cells[key[k]];
    c.mass += m.masses[k];
    c.moment += m.masses[k] * m.positions[k];
  }
  AtomicMeasure out;
  std::map<std::pair<std::int64_t, std::int64_t>, Vec2d> centroid;
  for (const auto& [k, c] : cells) {
    if (c.mass == 0.0) continue;
    const Vec2d x = c.moment / c.mass;
    centroid[k] = x;
    out.add(x, c.mass);
  }
  if (displacement) {
    double d = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const auto it = centroid.find(key[k]);
      if (it != centroid.end()) d += std::abs(m.masses[k]) * distance(m.positions[k], it->second);
    }
    *displacement = d;
  }
  return out;
}

std::pair<double, TransportPlan> w1_exact(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  const Compact a = drop_empty(mu, "source measure");
  const Compact b = drop_empty(nu, "target measure");
  const double ta = mu.total_mass();
  const double tb = nu.total_mass();
  check_balance(ta, tb, std::max(std::abs(ta), std::abs(tb)), 1e-9);
  return solve_compact(a, b, 0);
}

W1Result w1_solve(const AtomicMeasure& mu, const AtomicMeasure& nu, const W1Options& options) {
  W1Result result;
  const double ta = mu.total_mass();
  const double tb = nu.total_mass();
  check_balance(ta, tb, std::max(std::abs(ta), std::abs(tb)), options.mass_tolerance);
  const AtomicMeasure* src = &mu;
  const AtomicMeasure* dst = &nu;
  AtomicMeasure coarse_src;
  AtomicMeasure coarse_dst;
  if (mu.size() > options.atom_limit || nu.size() > options.atom_limit) {
    Vec2d lo = Vec2d::Constant(std::numeric_limits<double>::infinity());
    Vec2d hi = -lo;
    for (const auto* m : {&mu, &nu})
      for (const auto& p : m->positions) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    const auto cells_per_side =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(options.atom_limit))));
    const double pitch = std::max(extent, 1e-300) * (1.0 + 1e-12) / double(cells_per_side);
    double da = 0.0;
    double db = 0.0;
    if (mu.size() > options.atom_limit) {
      coarse_src = coarsen(mu, pitch, &da);
      src = &coarse_src;
    }
    if (nu.size() > options.atom_limit) {
      coarse_dst = coarsen(nu, pitch, &db);
      dst = &coarse_dst;
    }
    result.coarsening = {true, pitch, da + db};
  }
  const Compact a = drop_empty(*src, "source measure");
  const Compact b = drop_empty(*dst, "target measure");
  auto [cost, plan] = solve_compact(a, b, options.max_pivots);
  result.distance = cost;
  result.plan = std::move(plan);
  return result;
}

std::pair<AtomicMeasure, AtomicMeasure> signed_difference(const AtomicMeasure& f, const AtomicMeasure& g,
                                                          double merge_radius) {
  f.validate();
  g.validate();
  struct Atom {
    Vec2d x;
    double mass;
  };
  std::vector<Atom> atoms;
  atoms.reserve(f.size() + g.size());
  for (std::size_t k = 0; k < f.size(); ++k) atoms.push_back({f.positions[k], f.masses[k]});
  for (std::size_t k = 0; k < g.size(); ++k) atoms.push_back({g.positions[k], -g.masses[k]});
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.x.x() != b.x.x() ? a.x.x() < b.x.x() : a.x.y() < b.x.y();
  });

  // Each unmerged atom opens a cluster; later atoms within merge_radius of its
  // representative (looking ahead only while the x gap allows) join it.
  std::vector<bool> used(atoms.size(), false);
  AtomicMeasure plus;
  AtomicMeasure minus;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (used[k]) continue;
    used[k] = true;
    double net = atoms[k].mass;
    for (std::size_t l = k + 1; l < atoms.size() && atoms[l].x.x() - atoms[k].x.x() <= merge_radius; ++l) {
      if (used[l]) continue;
      if (distance(atoms[k].x, atoms[l].x) <= merge_radius) {
        net += atoms[l].mass;
        used[l] = true;
      }
    }
    if (net > 0.0)
      plus.add(atoms[k].x, net);
    else if (net < 0.0)
      minus.add(atoms[k].x, -net);
  }
  return {plus, minus};
}

double w1_signed(const AtomicMeasure& f, const AtomicMeasure& g, const W1Options& options,
                 CoarseningReport* coarsening, double merge_radius) {
  check_balance(f.total_mass(), g.total_mass(), f.total_variation() + g.total_variation(),
                options.mass_tolerance);
  const auto [plus, minus] = signed_difference(f, g, merge_radius);
  if (coarsening) *coarsening = {};
  if (plus.size() == 0 || minus.size() == 0) return 0.0;
  W1Options inner = options;
  // The parts inherit the balance already checked on f and g.
  inner.mass_tolerance = std::numeric_limits<double>::infinity();
  const W1Result r = w1_solve(plus, minus, inner);
  if (coarsening) *coarsening = r.coarsening;
  return r.distance;
}

}  // namespace vortexlab
