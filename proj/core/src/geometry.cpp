#include "shepvi/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "shepvi/detail/parallel.hpp"
#include "shepvi/errors.hpp"
#include "shepvi/pgm.hpp"

namespace shepvi {

namespace detail {

namespace {
std::atomic<int> g_thread_override{0};
}  // namespace

int thread_count() {
  const int o = g_thread_override.load(std::memory_order_relaxed);
  if (o > 0) return o;
  if (const char* env = std::getenv("SHEPVI_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_override(int n) {
  g_thread_override.store(n, std::memory_order_relaxed);
}

}  // namespace detail

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size())
    throw std::invalid_argument("box bounds must be nonempty and of equal length");
  for (std::size_t a = 0; a < lower_.size(); ++a) {
    if (!std::isfinite(lower_[a]) || !std::isfinite(upper_[a]) ||
        !(lower_[a] < upper_[a]))
      throw std::invalid_argument("box requires finite lower < upper per axis");
  }
}

bool BoxDomain::contains(std::span<const double> x) const {
  if (x.size() != lower_.size())
    throw std::invalid_argument("point dimension does not match box");
  for (std::size_t a = 0; a < lower_.size(); ++a) {
    // Negated comparisons so that NaN coordinates land outside.
    if (!(x[a] >= lower_[a]) || !(x[a] <= upper_[a])) return false;
  }
  return true;
}

void BoxDomain::clamp(std::span<const double> x, std::span<double> out) const {
  if (x.size() != lower_.size() || out.size() != lower_.size())
    throw std::invalid_argument("point dimension does not match box");
  for (std::size_t a = 0; a < lower_.size(); ++a)
    out[a] = std::min(std::max(x[a], lower_[a]), upper_[a]);
}

NodeSet::NodeSet(std::vector<double> coords, int dim)
    : coords_(std::move(coords)), dim_(dim) {
  if (dim_ <= 0) throw std::invalid_argument("node dimension must be positive");
  if (coords_.empty() || coords_.size() % static_cast<std::size_t>(dim_) != 0)
    throw std::invalid_argument("node buffer size must be a nonzero multiple of dim");
  n_ = static_cast<int>(coords_.size() / static_cast<std::size_t>(dim_));
}

NodeSet grid_nodes(const BoxDomain& box, std::span<const int> counts,
                   std::shared_ptr<const ObstacleMask> mask) {
  const int s = box.dim();
  if (static_cast<int>(counts.size()) != s)
    throw std::invalid_argument("counts length must match box dimension");
  std::int64_t total = 1;
  for (int a = 0; a < s; ++a) {
    if (counts[a] < 1) throw std::invalid_argument("grid counts must be >= 1");
    total *= counts[a];
    if (total > (std::int64_t{1} << 31))
      throw std::invalid_argument("grid too large");
  }
  if (mask) {
    if (s != 2) throw std::invalid_argument("masked grids require dimension 2");
    const auto lo = mask->world_min();
    const auto hi = mask->world_max();
    for (int a = 0; a < 2; ++a) {
      if (box.lower(a) < lo[a] || box.upper(a) > hi[a])
        throw ConfigError("obstacle mask does not cover the requested box");
    }
  }

  // Per-axis coordinates; endpoints are hit exactly, a count of one puts the
  // node in the middle of the axis.
  std::vector<std::vector<double>> axis(s);
  std::vector<double> spacing(s);
  for (int a = 0; a < s; ++a) {
    const int c = counts[a];
    axis[a].resize(c);
    if (c == 1) {
      axis[a][0] = box.lower(a) + 0.5 * box.extent(a);
      spacing[a] = box.extent(a);
    } else {
      for (int i = 0; i < c; ++i)
        axis[a][i] = box.lower(a) +
                     box.extent(a) * (static_cast<double>(i) / (c - 1));
      spacing[a] = box.extent(a) / (c - 1);
    }
  }

  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(total) * s);
  std::vector<int> idx(s, 0);
  std::vector<double> p(s);
  for (std::int64_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < s; ++a) p[a] = axis[a][idx[a]];
    if (!mask || mask->admissible_point(p[0], p[1]))
      coords.insert(coords.end(), p.begin(), p.end());
    // Odometer increment, last axis fastest: lexicographic by axis index.
    for (int a = s - 1; a >= 0; --a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  if (coords.empty())
    throw ConfigError("grid is empty: the obstacle mask excludes every node");

  NodeSet nodes(std::move(coords), s);
  nodes.set_grid(GridInfo{std::vector<int>(counts.begin(), counts.end()),
                          spacing});
  if (mask) nodes.set_mask(std::move(mask));
  return nodes;
}

namespace {

// Uniform cell bucketing of a point set.  Points are sorted by the
// lexicographic order of their integer cell coordinates; lookup is binary
// search.  Deterministic and dimension generic.
class CellList {
 public:
  CellList(std::span<const double> pts, int count, int dim, double edge)
      : pts_(pts), dim_(dim), edge_(edge) {
    origin_.assign(dim, 0.0);
    for (int a = 0; a < dim; ++a) {
      double lo = std::numeric_limits<double>::infinity();
      for (int i = 0; i < count; ++i) lo = std::min(lo, pts[i * dim + a]);
      origin_[a] = lo;
    }
    cells_.resize(static_cast<std::size_t>(count) * dim);
    for (int i = 0; i < count; ++i)
      for (int a = 0; a < dim; ++a)
        cells_[static_cast<std::size_t>(i) * dim + a] =
            cell_coord(pts[i * dim + a], a);
    order_.resize(count);
    for (int i = 0; i < count; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](int x, int y) {
      const auto* cx = cells_.data() + static_cast<std::size_t>(x) * dim_;
      const auto* cy = cells_.data() + static_cast<std::size_t>(y) * dim_;
      for (int a = 0; a < dim_; ++a) {
        if (cx[a] != cy[a]) return cx[a] < cy[a];
      }
      return x < y;  // stable within a cell: ascending point index
    });
  }

  std::int64_t cell_coord(double x, int a) const {
    return static_cast<std::int64_t>(std::floor((x - origin_[a]) / edge_));
  }

  // Indices (ascending) of points in the given cell.
  std::pair<int, int> cell_range(std::span<const std::int64_t> key) const {
    auto cmp = [&](int i, std::span<const std::int64_t> k) {
      const auto* c = cells_.data() + static_cast<std::size_t>(i) * dim_;
      for (int a = 0; a < dim_; ++a) {
        if (c[a] != k[a]) return c[a] < k[a];
      }
      return false;
    };
    auto cmp2 = [&](std::span<const std::int64_t> k, int i) {
      const auto* c = cells_.data() + static_cast<std::size_t>(i) * dim_;
      for (int a = 0; a < dim_; ++a) {
        if (c[a] != k[a]) return k[a] < c[a];
      }
      return false;
    };
    auto lo = std::lower_bound(order_.begin(), order_.end(), key, cmp);
    auto hi = std::upper_bound(lo, order_.end(), key, cmp2);
    return {static_cast<int>(lo - order_.begin()),
            static_cast<int>(hi - order_.begin())};
  }

  int point_at(int pos) const { return order_[pos]; }
  int dim() const { return dim_; }
  std::span<const double> pts() const { return pts_; }

 private:
  std::span<const double> pts_;
  int dim_;
  double edge_;
  std::vector<double> origin_;
  std::vector<std::int64_t> cells_;
  std::vector<int> order_;
};

double dist2(const double* a, const double* b, int dim) {
  double d2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return d2;
}

}  // namespace

NeighborPairs radius_neighbors(std::span<const double> a, int a_count,
                               std::span<const double> b, int b_count,
                               int dim, double radius) {
  if (dim <= 0) throw std::invalid_argument("dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("search radius must be positive and finite");
  if (a.size() != static_cast<std::size_t>(a_count) * dim ||
      b.size() != static_cast<std::size_t>(b_count) * dim)
    throw std::invalid_argument("coordinate buffer sizes do not match counts");

  CellList cl(b, b_count, dim, radius);
  const double r2 = radius * radius;

  const int workers = detail::thread_count();
  const int chunks = std::max(1, std::min<int>(workers, a_count));
  std::vector<std::vector<std::int32_t>> idx_chunks(chunks);
  std::vector<std::vector<double>> dist_chunks(chunks);
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(a_count) + 1, 0);

  auto run_chunk = [&](int c) {
    const std::int64_t begin = static_cast<std::int64_t>(a_count) * c / chunks;
    const std::int64_t end = static_cast<std::int64_t>(a_count) * (c + 1) / chunks;
    auto& out_idx = idx_chunks[c];
    auto& out_dist = dist_chunks[c];
    std::vector<std::int64_t> base(dim), key(dim);
    std::vector<std::pair<std::int32_t, double>> row;
    for (std::int64_t i = begin; i < end; ++i) {
      const double* pa = a.data() + i * dim;
      bool finite = true;
      for (int k = 0; k < dim; ++k) {
        if (!std::isfinite(pa[k])) finite = false;
      }
      row.clear();
      if (finite) {
        for (int k = 0; k < dim; ++k) key[k] = base[k] = cl.cell_coord(pa[k], k);
        // Odometer over the 3^dim neighborhood of the query cell.
        std::vector<int> off(dim, -1);
        while (true) {
          for (int k = 0; k < dim; ++k) key[k] = base[k] + off[k];
          auto [lo, hi] = cl.cell_range(key);
          for (int pos = lo; pos < hi; ++pos) {
            const int j = cl.point_at(pos);
            const double d2 = dist2(pa, b.data() + static_cast<std::size_t>(j) * dim, dim);
            if (d2 <= r2)
              row.emplace_back(static_cast<std::int32_t>(j), std::sqrt(d2));
          }
          int k = dim - 1;
          while (k >= 0 && off[k] == 1) off[k--] = -1;
          if (k < 0) break;
          ++off[k];
        }
        std::sort(row.begin(), row.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
      }
      offsets[i + 1] = static_cast<std::int64_t>(row.size());
      for (const auto& [j, d] : row) {
        out_idx.push_back(j);
        out_dist.push_back(d);
      }
    }
  };

  if (chunks == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 1; c < chunks; ++c) pool.emplace_back(run_chunk, c);
    run_chunk(0);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];

  NeighborPairs out;
  out.offsets = std::move(offsets);
  out.index.reserve(out.offsets.back());
  out.distance.reserve(out.offsets.back());
  for (int c = 0; c < chunks; ++c) {
    out.index.insert(out.index.end(), idx_chunks[c].begin(), idx_chunks[c].end());
    out.distance.insert(out.distance.end(), dist_chunks[c].begin(),
                        dist_chunks[c].end());
  }
  return out;
}

NeighborPairs radius_neighbors(const NodeSet& a, const NodeSet& b,
                               double radius) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("node sets must share a dimension");
  return radius_neighbors(a.coords(), a.size(), b.coords(), b.size(), a.dim(),
                          radius);
}

namespace {

// Distance from a point to the nearest node, via expanding cell shells.
double nearest_distance(const CellList& cl, const double* p, double edge) {
  const int dim = cl.dim();
  std::vector<std::int64_t> base(dim), key(dim);
  for (int a = 0; a < dim; ++a) base[a] = cl.cell_coord(p[a], a);
  double best2 = std::numeric_limits<double>::infinity();
  for (int ring = 0;; ++ring) {
    // Visit all cells with Chebyshev distance exactly `ring` from base.
    std::vector<int> off(dim, -ring);
    while (true) {
      int cheb = 0;
      for (int a = 0; a < dim; ++a) cheb = std::max<int>(cheb, std::abs(off[a]));
      if (cheb == ring) {
        for (int a = 0; a < dim; ++a) key[a] = base[a] + off[a];
        auto [lo, hi] = cl.cell_range(key);
        for (int pos = lo; pos < hi; ++pos) {
          const int j = cl.point_at(pos);
          best2 = std::min(best2, dist2(p, cl.pts().data() + static_cast<std::size_t>(j) * dim, dim));
        }
      }
      int a = dim - 1;
      while (a >= 0 && off[a] == ring) off[a--] = -ring;
      if (a < 0) break;
      ++off[a];
    }
    // Points not yet inspected sit in cells with Chebyshev index > ring and
    // are therefore farther than ring * edge away.
    const double safe = static_cast<double>(ring) * edge;
    if (best2 <= safe * safe) return std::sqrt(best2);
  }
}

}  // namespace

double fill_distance(const NodeSet& nodes, const BoxDomain& box,
                     int sample_factor) {
  if (sample_factor < 1) throw std::invalid_argument("sample factor must be >= 1");
  const int s = box.dim();
  if (s != nodes.dim()) throw std::invalid_argument("box and nodes disagree in dimension");

  if (nodes.grid() && !nodes.mask()) {
    // Exact: the farthest point of a cell from its corners is the center.
    double d2 = 0.0;
    for (double dx : nodes.grid()->spacing) d2 += dx * dx;
    return 0.5 * std::sqrt(d2);
  }

  // Sampled sup over the (masked) box.
  std::vector<int> res(s);
  if (nodes.grid()) {
    for (int a = 0; a < s; ++a) res[a] = nodes.grid()->counts[a];
  } else if (nodes.mask()) {
    res[0] = nodes.mask()->width();
    res[1] = nodes.mask()->height();
  } else {
    const int guess = std::max(
        2, static_cast<int>(std::lround(std::pow(double(nodes.size()), 1.0 / s))));
    for (int a = 0; a < s; ++a) res[a] = guess;
  }
  std::int64_t total = 1;
  std::vector<std::int64_t> counts(s);
  for (int a = 0; a < s; ++a) {
    counts[a] = std::min<std::int64_t>(
        static_cast<std::int64_t>(res[a]) * sample_factor + 1, 4097);
    total *= counts[a];
  }

  // Cell edge near the expected spacing keeps shell searches short.
  double vol = 1.0;
  for (int a = 0; a < s; ++a) vol *= box.extent(a);
  const double edge = std::max(std::pow(vol / nodes.size(), 1.0 / s), 1e-12);
  CellList cl(nodes.coords(), nodes.size(), s, edge);

  const ObstacleMask* mask = nodes.mask().get();
  std::vector<double> chunk_max(detail::thread_count(), 0.0);
  const int chunks = static_cast<int>(chunk_max.size());
  auto run_chunk = [&](int c) {
    const std::int64_t begin = total * c / chunks;
    const std::int64_t end = total * (c + 1) / chunks;
    std::vector<double> p(s);
    double best = 0.0;
    for (std::int64_t flat = begin; flat < end; ++flat) {
      std::int64_t rest = flat;
      for (int a = s - 1; a >= 0; --a) {
        const std::int64_t i = rest % counts[a];
        rest /= counts[a];
        p[a] = counts[a] == 1
                   ? box.lower(a) + 0.5 * box.extent(a)
                   : box.lower(a) + box.extent(a) *
                         (static_cast<double>(i) / (counts[a] - 1));
      }
      if (mask && !mask->admissible_point(p[0], p[1])) continue;
      best = std::max(best, nearest_distance(cl, p.data(), edge));
    }
    chunk_max[c] = best;
  };
  if (chunks == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 1; c < chunks; ++c) pool.emplace_back(run_chunk, c);
    run_chunk(0);
    for (auto& t : pool) t.join();
  }
  double h = 0.0;
  for (double m : chunk_max) h = std::max(h, m);
  return h;
}

double separation_distance(const NodeSet& nodes) {
  const int n = nodes.size();
  if (n < 2) throw std::invalid_argument("separation distance needs at least two nodes");
  const int s = nodes.dim();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double vol = 1.0;
  for (int a = 0; a < s; ++a) {
    double alo = std::numeric_limits<double>::infinity(), ahi = -alo;
    for (int i = 0; i < n; ++i) {
      alo = std::min(alo, nodes.coords()[static_cast<std::size_t>(i) * s + a]);
      ahi = std::max(ahi, nodes.coords()[static_cast<std::size_t>(i) * s + a]);
    }
    vol *= std::max(ahi - alo, 1e-300);
    lo = std::min(lo, alo);
    hi = std::max(hi, ahi);
  }

  double r = std::max(std::pow(vol / n, 1.0 / s), 1e-12);
  for (;;) {
    const NeighborPairs pairs = radius_neighbors(nodes, nodes, r);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      for (std::int64_t t = pairs.offsets[i]; t < pairs.offsets[i + 1]; ++t) {
        if (pairs.index[t] != i) best = std::min(best, pairs.distance[t]);
      }
    }
    if (std::isfinite(best)) return 0.5 * best;
    r *= 2.0;
  }
}

}  // namespace shepvi
