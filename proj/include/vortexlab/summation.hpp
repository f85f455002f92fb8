#ifndef VORTEXLAB_SUMMATION_HPP
#define VORTEXLAB_SUMMATION_HPP

#include <array>
#include <cstddef>

namespace vortexlab {

/// Streaming pairwise (cascade) summation.
///
/// Values are folded sequentially into blocks of `kBlock` terms; finished
/// blocks are merged like a binary counter, so the final result is the
/// pairwise sum of the block totals. The result depends only on the sequence
/// of values added, which is what the deterministic reduction mode relies on:
/// two code paths that feed the same sequence produce the same bits.
template <typename T>
class PairwiseAccumulator {
 public:
  static constexpr std::size_t kBlock = 8;
  static constexpr std::size_t kLevels = 48;

  PairwiseAccumulator() { reset(); }

  void reset() {
    block_ = zero();
    in_block_ = 0;
    occupied_ = 0;
    any_ = false;
  }

  void add(const T& value) {
    block_ = in_block_ == 0 ? value : T(block_ + value);
    any_ = true;
    if (++in_block_ == kBlock) {
      push(block_);
      block_ = zero();
      in_block_ = 0;
    }
  }

  /// Sum of everything added so far; zero when nothing was added.
  [[nodiscard]] T result() const {
    T total = zero();
    bool have = false;
    // Lowest level first: partial block, then increasing block counts.
    if (in_block_ > 0) {
      total = block_;
      have = true;
    }
    for (std::size_t level = 0; level < kLevels; ++level) {
      if (occupied_ & (std::size_t{1} << level)) {
        total = have ? T(levels_[level] + total) : levels_[level];
        have = true;
      }
    }
    return total;
  }

  [[nodiscard]] bool empty() const { return !any_; }

 private:
  static T zero() {
    if constexpr (requires { T::Zero(); }) {
      return T::Zero();
    } else {
      return T(0);
    }
  }

  void push(T carry) {
    std::size_t level = 0;
    while (occupied_ & (std::size_t{1} << level)) {
      carry = levels_[level] + carry;
      occupied_ &= ~(std::size_t{1} << level);
      ++level;
    }
    levels_[level] = carry;
    occupied_ |= std::size_t{1} << level;
  }

  std::array<T, kLevels> levels_{};
  T block_{};
  std::size_t in_block_ = 0;
  std::size_t occupied_ = 0;
  bool any_ = false;
};

}  // namespace vortexlab

#endif  // VORTEXLAB_SUMMATION_HPP
