#include "vortexlab/quadtree.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

namespace vortexlab {

namespace {

constexpr int kMaxDepth = 48;

thread_local std::vector<std::pair<std::size_t, std::uint32_t>> t_near;

}  // namespace

QuadTree::QuadTree(std::span<const Vec2d> positions, std::span<const double> circulations,
                   std::size_t leaf_size)
    : leaf_size_(leaf_size) {
  if (positions.size() != circulations.size())
    throw ValidationError("sources", "positions and circulations differ in length");
  if (leaf_size_ == 0) throw ValidationError("leaf_size", "must be positive");
  const std::size_t n = positions.size();
  if (n > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("sources", "too many particles for a quadtree");
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (n == 0) return;

  Vec2d lo = positions[0];
  Vec2d hi = positions[0];
  for (const auto& p : positions) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw ValidationError("sources", "non-finite particle position");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double size = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  size = size > 0.0 ? size * (1.0 + 1e-12) + std::numeric_limits<double>::min() : 1.0;

  // Source data is gathered before the build so partitioning can read it.
  xs_.resize(n);
  ys_.resize(n);
  gs_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs_[k] = positions[k].x();
    ys_[k] = positions[k].y();
    gs_[k] = circulations[k];
  }
  nodes_.reserve(4 * (n / leaf_size_ + 1));
  build(0, static_cast<std::uint32_t>(n), lo, size, 0);

  std::vector<double> xs(n), ys(n), gs(n);
  for (std::size_t p = 0; p < n; ++p) {
    xs[p] = xs_[order_[p]];
    ys[p] = ys_[order_[p]];
    gs[p] = gs_[order_[p]];
  }
  xs_ = std::move(xs);
  ys_ = std::move(ys);
  gs_ = std::move(gs);
}

std::int32_t QuadTree::build(std::uint32_t begin, std::uint32_t end, const Vec2d& lo, double size,
                             int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[id].lo = lo;
  nodes_[id].size = size;
  nodes_[id].begin = begin;
  nodes_[id].end = end;

  if (end - begin <= leaf_size_ || depth >= kMaxDepth) {
    // xs_/ys_/gs_ are still in original index order during the build.
    Node& node = nodes_[id];
    Vec2d pos_moment = Vec2d::Zero();
    Vec2d neg_moment = Vec2d::Zero();
    for (std::uint32_t p = begin; p < end; ++p) {
      const std::size_t k = order_[p];
      const double g = gs_[k];
      const Vec2d x(xs_[k], ys_[k]);
      node.circulation += g;
      node.moment += g * x;
      if (g > 0.0) {
        node.positive += g;
        pos_moment += g * x;
      } else if (g < 0.0) {
        node.negative += g;
        neg_moment += g * x;
      }
    }
    node.positive_centroid = pos_moment;
    node.negative_centroid = neg_moment;
    finish_node(node);
    return id;
  }

  const double half = 0.5 * size;
  const Vec2d mid = lo + Vec2d(half, half);
  std::array<std::vector<std::size_t>, 4> buckets;
  for (std::uint32_t p = begin; p < end; ++p) {
    const std::size_t k = order_[p];
    const int q = (xs_[k] >= mid.x() ? 1 : 0) + (ys_[k] >= mid.y() ? 2 : 0);
    buckets[q].push_back(k);
  }
  std::uint32_t cursor = begin;
  std::array<std::pair<std::uint32_t, std::uint32_t>, 4> ranges{};
  for (int q = 0; q < 4; ++q) {
    ranges[q] = {cursor, cursor + static_cast<std::uint32_t>(buckets[q].size())};
    std::copy(buckets[q].begin(), buckets[q].end(), order_.begin() + cursor);
    cursor = ranges[q].second;
  }
  std::array<std::int32_t, 4> children{-1, -1, -1, -1};
  for (int q = 0; q < 4; ++q) {
    if (ranges[q].first == ranges[q].second) continue;
    const Vec2d child_lo = lo + Vec2d((q & 1) ? half : 0.0, (q & 2) ? half : 0.0);
    children[q] = build(ranges[q].first, ranges[q].second, child_lo, half, depth + 1);
  }

  // Sums of children, in child order.
  Node& node = nodes_[id];
  node.children = children;
  Vec2d pos_moment = Vec2d::Zero();
  Vec2d neg_moment = Vec2d::Zero();
  for (const auto c : children) {
    if (c < 0) continue;
    const Node& child = nodes_[c];
    node.circulation += child.circulation;
    node.moment += child.moment;
    node.positive += child.positive;
    node.negative += child.negative;
    pos_moment += child.positive * child.positive_centroid;
    neg_moment += child.negative * child.negative_centroid;
  }
  node.positive_centroid = pos_moment;
  node.negative_centroid = neg_moment;
  finish_node(node);
  return id;
}

// On entry the signed-part centroid fields hold first moments.
void QuadTree::finish_node(Node& node) const {
  const Vec2d center = node.lo + Vec2d(0.5 * node.size, 0.5 * node.size);
  node.centroid = node.circulation != 0.0 ? Vec2d(node.moment / node.circulation) : center;
  node.positive_centroid =
      node.positive != 0.0 ? Vec2d(node.positive_centroid / node.positive) : center;
  node.negative_centroid =
      node.negative != 0.0 ? Vec2d(node.negative_centroid / node.negative) : center;
}

Vec2d QuadTree::velocity_at(const Vec2d& x, std::size_t skip, const KernelParams& params) const {
  if (nodes_.empty()) return Vec2d::Zero();
  const double blob = params.blob_radius;
  const double blob2 = blob * blob;
  const double theta = params.theta;
  const bool det = params.deterministic;

  auto& near = t_near;
  near.clear();
  PairwiseAccumulator<Vec2d> far_acc;
  PairwiseAccumulator<Vec2d> near_acc;
  Vec2d far = Vec2d::Zero();
  double ux = 0.0;
  double uy = 0.0;

  std::array<std::int32_t, 4 * kMaxDepth + 8> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (theta > 0.0 && !node.contains(x)) {
      // Node size is the cell diameter and distance is to the nearest point
      // of the cell, not to a centroid: a centroid near the far edge would
      // otherwise admit cells whose nearest sources sit much closer.
      const double gx = std::max({node.lo.x() - x.x(), 0.0, x.x() - (node.lo.x() + node.size)});
      const double gy = std::max({node.lo.y() - x.y(), 0.0, x.y() - (node.lo.y() + node.size)});
      const bool accept = std::numbers::sqrt2 * node.size < theta * std::hypot(gx, gy);
      if (accept) {
        Vec2d term = Vec2d::Zero();
        if (node.positive != 0.0)
          term += node.positive * blob_kernel<double>(x - node.positive_centroid, blob);
        if (node.negative != 0.0)
          term += node.negative * blob_kernel<double>(x - node.negative_centroid, blob);
        if (det)
          far_acc.add(term);
        else
          far += term;
        continue;
      }
    }
    if (!node.is_leaf()) {
      for (int q = 3; q >= 0; --q)
        if (node.children[q] >= 0) stack[top++] = node.children[q];
      continue;
    }
    for (std::uint32_t p = node.begin; p < node.end; ++p) {
      const std::size_t k = order_[p];
      if (k == skip) continue;
      if (det) {
        if (theta == 0.0)
          near.emplace_back(k, p);
        else
          near_acc.add(Vec2d(gs_[p] * blob_kernel<double>(x - Vec2d(xs_[p], ys_[p]), blob)));
        continue;
      }
      const double dx = x.x() - xs_[p];
      const double dy = x.y() - ys_[p];
      const double r2 = dx * dx + dy * dy + blob2;
      if (r2 == 0.0) {
        if (blob == 0.0)
          throw CoincidentPointError("tree velocity evaluated at a coincident source");
        continue;
      }
      const double c = gs_[p] * inv_two_pi<double> / r2;
      ux -= dy * c;
      uy += dx * c;
    }
  }

  if (!det) return Vec2d(ux, uy) + far;

  // Near terms were summed in leaf order, except at theta = 0 where they are
  // summed in source order so the result reproduces direct summation bit for bit.
  std::sort(near.begin(), near.end());
  for (const auto& [k, p] : near) {
    near_acc.add(Vec2d(gs_[p] * blob_kernel<double>(x - Vec2d(xs_[p], ys_[p]), blob)));
  }
  if (far_acc.empty()) return near_acc.result();
  return near_acc.result() + far_acc.result();
}

Vec2List<double> tree_velocity(const QuadTree& tree, std::span<const Vec2d> targets,
                               const KernelParams& params) {
  params.validate();
  Vec2List<double> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t t) {
    out[t] = tree.velocity_at(targets[t], static_cast<std::size_t>(-1), params);
  });
  return out;
}

Vec2List<double> tree_self_velocity(const QuadTree& tree, std::span<const Vec2d> positions,
                                    const KernelParams& params) {
  params.validate();
  if (positions.size() != tree.source_count())
    throw ValidationError("positions", "must be the tree's own sources");
  Vec2List<double> out(positions.size());
  parallel_for(positions.size(),
               [&](std::size_t t) { out[t] = tree.velocity_at(positions[t], t, params); });
  return out;
}

Vec2List<double> tree_velocity(std::span<const Vec2d> src_pos, std::span<const double> src_gamma,
                               std::span<const Vec2d> targets, const KernelParams& params) {
  params.validate();
  const QuadTree tree(src_pos, src_gamma, params.leaf_size);
  return tree_velocity(tree, targets, params);
}

}  // namespace vortexlab
