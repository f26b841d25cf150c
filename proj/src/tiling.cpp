#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "bilip/gridapprox.hpp"
#include "bilip/lebesgue.hpp"

namespace bilip {

namespace {

struct SqKey {
  std::int64_t x, y, s;
  bool operator==(const SqKey&) const = default;
};
struct SqHash {
  std::size_t operator()(const SqKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.s) + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

std::int64_t floor_to(std::int64_t v, std::int64_t s) {
  std::int64_t q = v / s;
  if (v % s != 0 && v < 0) --q;
  return q * s;
}

bool is_integer(double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v)); }

}  // namespace

Square Tiling::square(std::size_t k) const {
  const TileSquare& s = squares[k];
  Point2 lo = point(s.x, s.y), hi = point(s.x + s.size, s.y + s.size);
  return {0.5 * (lo + hi), hi.x - lo.x};
}

Tiling build_tiling(const Domain& omega, const RightPolygon& omega_eps, int max_depth) {
  if (!(omega_eps.r > 0.0)) throw std::invalid_argument("Lebesgue region needs a positive side length");
  if (max_depth < 0 || max_depth > 30) throw std::invalid_argument("max_depth out of range");
  double r = omega_eps.r;
  Point2 origin = omega.box().lo;
  if (!is_integer((omega_eps.origin.x - origin.x) / r) || !is_integer((omega_eps.origin.y - origin.y) / r))
    throw std::invalid_argument("Lebesgue region is not aligned to the r-grid of the domain");
  std::int64_t si = std::llround((omega_eps.origin.x - origin.x) / r);
  std::int64_t sj = std::llround((omega_eps.origin.y - origin.y) / r);
  std::vector<Cell> eps;
  for (Cell c : omega_eps.cells) eps.push_back({c.i + si, c.j + sj});
  std::sort(eps.begin(), eps.end());
  for (Cell c : eps)
    if (!box_compactly_inside(omega, lattice_point(origin, r, c.i, c.j), lattice_point(origin, r, c.i + 1, c.j + 1)))
      throw std::invalid_argument("Lebesgue region is not compactly inside the domain");
  auto in_eps = [&](Cell c) { return std::binary_search(eps.begin(), eps.end(), c); };

  Tiling t;
  t.origin = origin;
  t.r = r;
  if (omega.aligned_to(origin, r)) {
    t.uniform = true;
    t.unit = r;
    t.r_units = 1;
    for (Cell c : cells_inside(omega, origin, r)) t.squares.push_back({c.i, c.j, 1, in_eps(c)});
  } else {
    std::int64_t R = std::int64_t{1} << max_depth;
    t.unit = std::ldexp(r, -max_depth);
    t.r_units = R;
    std::unordered_set<SqKey, SqHash> leaves;
    std::unordered_set<SqKey, SqHash> frozen;
    std::deque<SqKey> stack;
    const BBox& b = omega.box();
    std::int64_t ni = static_cast<std::int64_t>(std::ceil((b.hi.x - origin.x) / r));
    std::int64_t nj = static_cast<std::int64_t>(std::ceil((b.hi.y - origin.y) / r));
    for (std::int64_t i = 0; i < ni; ++i)
      for (std::int64_t j = 0; j < nj; ++j) stack.push_back({i * R, j * R, R});
    while (!stack.empty()) {
      SqKey k = stack.front();
      stack.pop_front();
      Point2 lo = t.point(k.x, k.y), hi = t.point(k.x + k.s, k.y + k.s);
      if (box_inside(omega, lo, hi)) {
        leaves.insert(k);
        continue;
      }
      bool crossed = box_meets_boundary(omega, lo, hi);
      if (!crossed) continue;
      if (k.s == 1) continue;  // depth exhausted: uncovered sliver
      std::int64_t h = k.s / 2;
      for (auto [dx, dy] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) stack.push_back({k.x + dx * h, k.y + dy * h, h});
    }
    // squares of side r on the Lebesgue region and the ring around it
    for (Cell c : eps)
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          SqKey k{(c.i + dx) * R, (c.j + dy) * R, R};
          if (!leaves.count(k)) throw std::runtime_error("ring around the Lebesgue region is not covered by squares of side r");
          frozen.insert(k);
        }
    auto find_leaf = [&](std::int64_t X, std::int64_t Y, std::int64_t from) -> std::optional<SqKey> {
      for (std::int64_t s = from; s <= R; s *= 2) {
        SqKey k{floor_to(X, s), floor_to(Y, s), s};
        if (leaves.count(k)) return k;
      }
      return std::nullopt;
    };
    std::deque<SqKey> queue(leaves.begin(), leaves.end());
    std::sort(queue.begin(), queue.end(), [](const SqKey& a, const SqKey& b) {
      return std::tie(a.s, a.x, a.y) < std::tie(b.s, b.x, b.y);
    });
    while (!queue.empty()) {
      SqKey k = queue.front();
      queue.pop_front();
      if (!leaves.count(k)) continue;
      const std::pair<std::int64_t, std::int64_t> probes[4] = {
          {k.x + k.s, k.y}, {k.x - 1, k.y}, {k.x, k.y + k.s}, {k.x, k.y - 1}};
      for (auto [X, Y] : probes) {
        auto nb = find_leaf(X, Y, 4 * k.s);
        if (!nb) continue;
        if (frozen.count(*nb)) throw std::runtime_error("balancing would split a square of side r next to the Lebesgue region");
        leaves.erase(*nb);
        std::int64_t h = nb->s / 2;
        for (auto [dx, dy] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
          SqKey c{nb->x + dx * h, nb->y + dy * h, h};
          leaves.insert(c);
          queue.push_back(c);
        }
        queue.push_back(k);
        break;
      }
    }
    std::vector<SqKey> sorted(leaves.begin(), leaves.end());
    std::sort(sorted.begin(), sorted.end(), [](const SqKey& a, const SqKey& b) {
      return std::tie(a.x, a.y, a.s) < std::tie(b.x, b.y, b.s);
    });
    for (const SqKey& k : sorted) {
      bool e = k.s == R && in_eps({k.x / R, k.y / R}) && k.x % R == 0 && k.y % R == 0;
      t.squares.push_back({k.x, k.y, k.s, e});
    }
  }

  double covered = 0.0;
  for (const TileSquare& s : t.squares) {
    double side = static_cast<double>(s.size) * t.unit;
    covered += side * side;
  }
  t.uncovered_area = std::max(0.0, omega.area() - covered);

  // adjacency through shared boundary segments
  std::unordered_map<SqKey, int, SqHash> index;
  for (std::size_t k = 0; k < t.squares.size(); ++k)
    index[{t.squares[k].x, t.squares[k].y, t.squares[k].size}] = static_cast<int>(k);
  auto leaf_at = [&](std::int64_t X, std::int64_t Y) -> int {
    for (std::int64_t s = 1; s <= t.r_units; s *= 2) {
      auto it = index.find({floor_to(X, s), floor_to(Y, s), s});
      if (it != index.end()) return it->second;
    }
    return -1;
  };
  t.adjacency.assign(t.squares.size(), {});
  for (std::size_t k = 0; k < t.squares.size(); ++k) {
    const TileSquare& s = t.squares[k];
    std::vector<int> nb;
    for (int side = 0; side < 4; ++side) {
      std::int64_t pos = 0;
      while (pos < s.size) {
        std::int64_t X = 0, Y = 0;
        if (side == 0) X = s.x + s.size, Y = s.y + pos;
        if (side == 1) X = s.x - 1, Y = s.y + pos;
        if (side == 2) X = s.x + pos, Y = s.y + s.size;
        if (side == 3) X = s.x + pos, Y = s.y - 1;
        int q = leaf_at(X, Y);
        std::int64_t step = 1;
        if (q >= 0) {
          nb.push_back(q);
          const TileSquare& o = t.squares[q];
          step = side < 2 ? o.y + o.size - (s.y + pos) : o.x + o.size - (s.x + pos);
        }
        pos += std::max<std::int64_t>(1, step);
      }
    }
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    t.adjacency[k] = nb;
  }
  return t;
}

bool tiling_valid(const Tiling& t) {
  std::vector<IBox> boxes;
  for (const TileSquare& s : t.squares) {
    if (s.size <= 0) return false;
    boxes.push_back({s.x, s.y, s.x + s.size, s.y + s.size});
  }
  bool ok = true;
  for_each_overlapping_pair(boxes, [&](std::size_t i, std::size_t j) {
    const IBox& a = boxes[i];
    const IBox& b = boxes[j];
    std::int64_t ox0 = std::max(a.x0, b.x0), ox1 = std::min(a.x1, b.x1);
    std::int64_t oy0 = std::max(a.y0, b.y0), oy1 = std::min(a.y1, b.y1);
    if (ox0 < ox1 && oy0 < oy1) {
      ok = false;  // interiors overlap
    } else if (ox0 < ox1 || oy0 < oy1) {
      // a common segment: it must be a full side of one of the two squares
      bool horizontal = ox0 < ox1;
      std::int64_t len = horizontal ? ox1 - ox0 : oy1 - oy0;
      bool a_side = horizontal ? (ox0 == a.x0 && ox1 == a.x1) : (oy0 == a.y0 && oy1 == a.y1);
      bool b_side = horizontal ? (ox0 == b.x0 && ox1 == b.x1) : (oy0 == b.y0 && oy1 == b.y1);
      if (!(a_side || b_side) || len <= 0) ok = false;
    }
    return ok;
  });
  return ok;
}

}  // namespace bilip
