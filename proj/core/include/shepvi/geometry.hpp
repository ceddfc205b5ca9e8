#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace shepvi {

class ObstacleMask;

// Axis-aligned box [lower_0, upper_0] x ... x [lower_{s-1}, upper_{s-1}].
class BoxDomain {
 public:
  BoxDomain() = default;  // empty box of dimension zero
  BoxDomain(std::vector<double> lower, std::vector<double> upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  double extent(int axis) const { return upper_[axis] - lower_[axis]; }

  // Closed-box membership.  Any NaN coordinate fails the test.
  bool contains(std::span<const double> x) const;

  // Componentwise projection onto the box.
  void clamp(std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<double> lower_, upper_;
};

struct GridInfo {
  std::vector<int> counts;    // nodes per axis before masking
  std::vector<double> spacing;
};

// A finite set of points in R^s, stored row major.  Sets born from
// grid_nodes remember their tensor structure; if a mask filtered the grid,
// the mask is kept as well so that fill-distance sampling can restrict
// itself to the admissible region.
class NodeSet {
 public:
  NodeSet(std::vector<double> coords, int dim);

  int size() const { return n_; }
  int dim() const { return dim_; }
  std::span<const double> point(int i) const {
    return {coords_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const { return coords_; }

  const std::optional<GridInfo>& grid() const { return grid_; }
  const std::shared_ptr<const ObstacleMask>& mask() const { return mask_; }

  void set_grid(GridInfo g) { grid_ = std::move(g); }
  void set_mask(std::shared_ptr<const ObstacleMask> m) { mask_ = std::move(m); }

 private:
  std::vector<double> coords_;
  int dim_ = 0;
  int n_ = 0;
  std::optional<GridInfo> grid_;
  std::shared_ptr<const ObstacleMask> mask_;
};

// Equidistant tensor grid over the box, endpoints included, ordered
// lexicographically by axis index (axis 0 slowest).  counts[a] >= 1; a count
// of one places the node at the axis midpoint.  If mask is nonnull, the
// mask's world rectangle must cover the box and only nodes whose containing
// pixel is admissible are kept.
NodeSet grid_nodes(const BoxDomain& box, std::span<const int> counts,
                   std::shared_ptr<const ObstacleMask> mask = nullptr);

// Fill distance h = sup_{x in domain} min_i |x - x_i|.  For unmasked tensor
// grids this is the half diagonal of one cell, computed in closed form.
// Otherwise the domain (intersected with the admissible region when the node
// set carries a mask) is sampled on a tensor grid refined sample_factor
// times per axis relative to the node resolution.
double fill_distance(const NodeSet& nodes, const BoxDomain& box,
                     int sample_factor = 4);

// Separation distance q = min_{i != j} |x_i - x_j| / 2.  Needs >= 2 nodes.
double separation_distance(const NodeSet& nodes);

// All pairs (i, j) with |a_i - b_j| <= radius, exact Euclidean distances,
// grouped by i (offsets has size |A| + 1) with ascending j within each
// group.  Implemented with uniform cell bucketing of B at cell edge equal to
// the radius; results are identical for any thread count.
struct NeighborPairs {
  std::vector<std::int64_t> offsets;
  std::vector<std::int32_t> index;
  std::vector<double> distance;

  std::int64_t total() const { return offsets.empty() ? 0 : offsets.back(); }
};

NeighborPairs radius_neighbors(std::span<const double> a, int a_count,
                               std::span<const double> b, int b_count,
                               int dim, double radius);
NeighborPairs radius_neighbors(const NodeSet& a, const NodeSet& b,
                               double radius);

}  // namespace shepvi
