#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rodfluid {

/// Binary sum tree over transition slots.
///
/// Leaves hold per-slot rates; every internal node is recomputed as the sum of
/// its two children on update, so the root equals the floating-point sum of
/// the leaves with no accumulated drift. set() is O(log n), sample() descends
/// from the root in O(log n) and never lands on a zero-rate slot.
class RateIndex {
 public:
  RateIndex() = default;
  explicit RateIndex(std::size_t slots) { resize(slots); }

  void resize(std::size_t slots) {
    slots_ = slots;
    cap_ = 1;
    while (cap_ < slots) cap_ <<= 1;
    tree_.assign(2 * cap_, 0.0);
  }

  std::size_t size() const { return slots_; }
  double total() const { return tree_.empty() ? 0.0 : tree_[1]; }
  double rate(std::size_t slot) const { return tree_[cap_ + slot]; }

  void set(std::size_t slot, double r) {
    std::size_t i = cap_ + slot;
    if (tree_[i] == r) return;
    tree_[i] = r;
    for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
  }

  /// Overwrite all leaves, then rebuild internal nodes in O(n).
  template <class RateFn>
  void assign(RateFn&& rate_of) {
    for (std::size_t s = 0; s < cap_; ++s) tree_[cap_ + s] = s < slots_ ? rate_of(s) : 0.0;
    for (std::size_t i = cap_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
  }

  /// Slot selected by a point u in [0, total()).
  std::size_t sample(double u) const {
    if (!(total() > 0)) throw std::logic_error("RateIndex::sample on zero total rate");
    std::size_t i = 1;
    while (i < cap_) {
      const double left = tree_[2 * i];
      const double right = tree_[2 * i + 1];
      if ((u < left && left > 0) || !(right > 0)) {
        i = 2 * i;
      } else {
        u -= left;
        i = 2 * i + 1;
      }
    }
    assert(tree_[i] > 0);
    return i - cap_;
  }

  /// Exact sum of leaves, recomputed from scratch (consistency checks).
  double recompute_total() const {
    double s = 0;
    for (std::size_t k = 0; k < slots_; ++k) s += tree_[cap_ + k];
    return s;
  }

 private:
  std::size_t slots_ = 0;
  std::size_t cap_ = 1;
  std::vector<double> tree_;
};

}  // namespace rodfluid
