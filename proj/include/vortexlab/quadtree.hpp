#ifndef VORTEXLAB_QUADTREE_HPP
#define VORTEXLAB_QUADTREE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/kernel.hpp"

namespace vortexlab {

/// Barnes-Hut quadtree over point circulations. Immutable after construction.
///
/// Every node carries its total circulation (the sum of its children's),
/// the circulation-weighted centroid, and the same two quantities for its
/// positive and negative parts separately. Far nodes are approximated by the
/// monopoles of those signed parts, which for single-signed nodes is exactly
/// the classical centroid monopole.
class QuadTree {
 public:
  struct Node {
    Vec2d lo = Vec2d::Zero();  ///< lower-left corner of the square cell
    double size = 0.0;         ///< side length
    double circulation = 0.0;
    Vec2d moment = Vec2d::Zero();  ///< sum of gamma * x
    Vec2d centroid = Vec2d::Zero();
    double positive = 0.0;
    double negative = 0.0;
    Vec2d positive_centroid = Vec2d::Zero();
    Vec2d negative_centroid = Vec2d::Zero();
    std::array<std::int32_t, 4> children{-1, -1, -1, -1};
    std::uint32_t begin = 0;  ///< range into order()
    std::uint32_t end = 0;

    [[nodiscard]] bool is_leaf() const {
      return children[0] < 0 && children[1] < 0 && children[2] < 0 && children[3] < 0;
    }
    [[nodiscard]] bool contains(const Vec2d& x) const {
      return x.x() >= lo.x() && x.x() <= lo.x() + size && x.y() >= lo.y() &&
             x.y() <= lo.y() + size;
    }
  };

  QuadTree(std::span<const Vec2d> positions, std::span<const double> circulations,
           std::size_t leaf_size = 16);

  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  /// Source indices in leaf order; each leaf owns the range [begin, end).
  [[nodiscard]] std::span<const std::size_t> order() const { return order_; }
  [[nodiscard]] std::size_t source_count() const { return order_.size(); }

  /// Velocity at x, omitting the source whose original index is `skip`.
  [[nodiscard]] Vec2d velocity_at(const Vec2d& x, std::size_t skip,
                                  const KernelParams& params) const;

 private:
  std::int32_t build(std::uint32_t begin, std::uint32_t end, const Vec2d& lo, double size,
                     int depth);
  void finish_node(Node& node) const;

  std::size_t leaf_size_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
  // Source data in leaf order.
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> gs_;
};

/// Tree-accelerated counterpart of direct_velocity.
Vec2List<double> tree_velocity(const QuadTree& tree, std::span<const Vec2d> targets,
                               const KernelParams& params);

/// Tree-accelerated counterpart of direct_self_velocity; targets are the tree's sources.
Vec2List<double> tree_self_velocity(const QuadTree& tree, std::span<const Vec2d> positions,
                                    const KernelParams& params);

/// Builds a tree over the sources and evaluates at the targets.
Vec2List<double> tree_velocity(std::span<const Vec2d> src_pos, std::span<const double> src_gamma,
                               std::span<const Vec2d> targets, const KernelParams& params);

}  // namespace vortexlab

#endif  // VORTEXLAB_QUADTREE_HPP
