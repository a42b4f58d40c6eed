#pragma once

// Solid voxelization on a shared lattice.
//
// All work happens in lattice units: u = (p - anchor) / G, so cell (i,j,k)
// spans [i, i+1] x [j, j+1] x [k, k+1]. Coordinates within kSnap of an
// integer are snapped onto it so geometry authored on the lattice stays
// exactly on cell faces.
//
// Occupancy predicate: a cell is occupied iff its open interior meets the
// closed solid. That is evaluated as (a) any triangle meets the open cell
// (separating-axis test where touching counts as separated), or (b) the cell
// center is inside by ray parity along +x.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"

namespace ssrkit {

struct VoxelConfig {
  double voxel_size = 0.05;
  int padding = 2;
};

/// Anchor and spacing shared by every grid of one scene.
struct Lattice {
  Vec3 anchor;
  double voxel_size = 0.05;
  bool operator==(const Lattice&) const = default;
};

using Index3 = std::array<std::int64_t, 3>;

namespace detail {

inline constexpr double kSnap = 1e-7;
inline constexpr double kSatEps = 1e-9;

inline double snap(double u) {
  const double r = std::round(u);
  return std::abs(u - r) <= kSnap ? r : u;
}

inline Vec3 to_lattice(const Lattice& lat, const Vec3& p) {
  return {snap((p.x - lat.anchor.x) / lat.voxel_size), snap((p.y - lat.anchor.y) / lat.voxel_size),
          snap((p.z - lat.anchor.z) / lat.voxel_size)};
}

// Cells whose open interior meets the closed interval [lo, hi].
inline std::pair<std::int64_t, std::int64_t> cell_span(double lo, double hi) {
  auto first = static_cast<std::int64_t>(std::floor(lo));
  auto last = static_cast<std::int64_t>(std::ceil(hi));  // exclusive
  if (last == first) ++last;                             // degenerate, off-lattice
  if (lo == hi && std::floor(lo) == lo) last = first;    // degenerate, on a cell face
  return {first, last};
}

/// Separating-axis test between a triangle and the open unit cell centered
/// at `c`. Touching configurations are reported as non-overlapping.
inline bool triangle_meets_open_cell(const Vec3& a, const Vec3& b, const Vec3& c3,
                                     const Vec3& center) {
  const Vec3 v[3] = {a - center, b - center, c3 - center};
  constexpr double h = 0.5;
  auto separated = [&](const Vec3& axis) {
    const double len = std::abs(axis.x) + std::abs(axis.y) + std::abs(axis.z);
    if (len < 1e-12) return false;
    const double p0 = dot(v[0], axis), p1 = dot(v[1], axis), p2 = dot(v[2], axis);
    const double r = h * len;
    const double eps = kSatEps * len;
    return std::min({p0, p1, p2}) >= r - eps || std::max({p0, p1, p2}) <= -r + eps;
  };
  for (int k = 0; k < 3; ++k) {
    const double lo = std::min({v[0][k], v[1][k], v[2][k]});
    const double hi = std::max({v[0][k], v[1][k], v[2][k]});
    if (lo >= h - kSatEps || hi <= -h + kSatEps) return false;
  }
  const Vec3 e[3] = {v[1] - v[0], v[2] - v[1], v[0] - v[2]};
  if (separated(cross(e[0], e[1]))) return false;
  const Vec3 unit[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const auto& u : unit)
    for (const auto& edge : e)
      if (separated(cross(u, edge))) return false;
  return true;
}

// Ray-parity helpers on the (y, z) projection. The query point is perturbed
// symbolically by (eps, eps^2), so no query ever lies on a projected edge or
// vertex and neighbouring triangles always agree on shared edges.
struct Yz {
  double y, z;
};

inline bool yz_less(const Yz& a, const Yz& b) { return a.y < b.y || (a.y == b.y && a.z < b.z); }

inline int perturbed_side(Yz u, Yz v, const Yz& p) {
  bool flip = false;
  if (yz_less(v, u)) {
    std::swap(u, v);
    flip = true;
  }
  const double o = (v.y - u.y) * (p.z - u.z) - (v.z - u.z) * (p.y - u.y);
  int s;
  if (o > 0) s = 1;
  else if (o < 0) s = -1;
  else if (v.z != u.z) s = v.z > u.z ? -1 : 1;
  else s = v.y > u.y ? 1 : -1;
  return flip ? -s : s;
}

}  // namespace detail

/// Binary occupancy on a window of the lattice.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(Lattice lattice, Index3 offset, Index3 dims)
      : lattice_(lattice), offset_(offset), dims_(dims) {
    for (auto& d : dims_) d = std::max<std::int64_t>(d, 0);
    bits_.assign((cell_count() + 63) / 64, 0);
  }

  const Lattice& lattice() const { return lattice_; }
  const Index3& offset() const { return offset_; }
  const Index3& dims() const { return dims_; }
  bool surface_only() const { return surface_only_; }

  /// World position of the grid's minimum corner.
  Vec3 origin() const {
    const double g = lattice_.voxel_size;
    return {lattice_.anchor.x + static_cast<double>(offset_[0]) * g,
            lattice_.anchor.y + static_cast<double>(offset_[1]) * g,
            lattice_.anchor.z + static_cast<double>(offset_[2]) * g};
  }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  }

  std::size_t local_index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k));
  }

  bool test_local(std::int64_t i, std::int64_t j, std::int64_t k) const {
    const auto idx = local_index(i, j, k);
    return (bits_[idx >> 6] >> (idx & 63)) & 1U;
  }

  /// Occupancy at a global lattice cell; false outside the window.
  bool test(const Index3& cell) const {
    const std::int64_t i = cell[0] - offset_[0], j = cell[1] - offset_[1], k = cell[2] - offset_[2];
    if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1] || k >= dims_[2]) return false;
    return test_local(i, j, k);
  }

  void set_local(std::int64_t i, std::int64_t j, std::int64_t k) {
    const auto idx = local_index(i, j, k);
    bits_[idx >> 6] |= std::uint64_t{1} << (idx & 63);
  }

  std::int64_t count() const {
    std::int64_t n = 0;
    for (auto w : bits_) n += std::popcount(w);
    return n;
  }

  /// Occupied columns of the (x, z) projection, indexed i + nx * k.
  const std::vector<std::uint8_t>& footprint() const { return footprint_; }

  void finalize(bool surface_only = false) {
    surface_only_ = surface_only;
    footprint_.assign(static_cast<std::size_t>(dims_[0] * dims_[2]), 0);
    for (std::int64_t k = 0; k < dims_[2]; ++k)
      for (std::int64_t j = 0; j < dims_[1]; ++j)
        for (std::int64_t i = 0; i < dims_[0]; ++i)
          if (test_local(i, j, k)) footprint_[static_cast<std::size_t>(i + dims_[0] * k)] = 1;
  }

 private:
  Lattice lattice_;
  Index3 offset_{0, 0, 0};
  Index3 dims_{0, 0, 0};
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint8_t> footprint_;
  bool surface_only_ = false;
};

/// Lattice anchored `padding` voxels below the minimum corner of `lo`.
inline Lattice make_lattice(const Vec3& lo, const VoxelConfig& cfg) {
  if (!(cfg.voxel_size > 0)) throw Error(Errc::invalid_geometry, "voxel size must be positive");
  const double pad = cfg.padding * cfg.voxel_size;
  return {{lo.x - pad, lo.y - pad, lo.z - pad}, cfg.voxel_size};
}

/// Share of scanlines with odd crossing counts above which the mesh is
/// treated as open and only its surface is kept.
inline constexpr double kParityFailureLimit = 0.01;

inline VoxelGrid voxelize_mesh(const TriangleMesh& mesh, const Lattice& lattice) {
  if (mesh.empty()) throw Error(Errc::invalid_geometry, "cannot voxelize an empty mesh");
  if (!(lattice.voxel_size > 0)) throw Error(Errc::invalid_geometry, "voxel size must be positive");

  std::vector<Vec3> u(mesh.vertices.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = detail::to_lattice(lattice, mesh.vertices[i]);

  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf}, hi{-inf, -inf, -inf};
  for (const auto& t : mesh.triangles)
    for (auto idx : t)
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], u[idx][a]);
        hi[a] = std::max(hi[a], u[idx][a]);
      }
  Index3 offset{}, dims{};
  for (int a = 0; a < 3; ++a) {
    const auto [first, last] = detail::cell_span(lo[a], hi[a]);
    offset[a] = first;
    dims[a] = last - first;
  }
  VoxelGrid grid(lattice, offset, dims);
  const auto nx = dims[0], ny = dims[1], nz = dims[2];
  if (grid.cell_count() == 0) {
    grid.finalize();
    return grid;
  }

  // Surface cells.
  for (const auto& t : mesh.triangles) {
    const Vec3 &a = u[t[0]], &b = u[t[1]], &c = u[t[2]];
    Index3 from{}, to{};
    for (int ax = 0; ax < 3; ++ax) {
      const auto [f, l] = detail::cell_span(std::min({a[ax], b[ax], c[ax]}),
                                            std::max({a[ax], b[ax], c[ax]}));
      from[ax] = std::max(f, offset[ax]);
      to[ax] = std::min(l, offset[ax] + dims[ax]);
    }
    for (auto k = from[2]; k < to[2]; ++k)
      for (auto j = from[1]; j < to[1]; ++j)
        for (auto i = from[0]; i < to[0]; ++i) {
          const Vec3 center{static_cast<double>(i) + 0.5, static_cast<double>(j) + 0.5,
                            static_cast<double>(k) + 0.5};
          if (detail::triangle_meets_open_cell(a, b, c, center))
            grid.set_local(i - offset[0], j - offset[1], k - offset[2]);
        }
  }

  // Interior by parity along +x through cell centers.
  std::vector<std::vector<double>> crossings(static_cast<std::size_t>(ny * nz));
  for (const auto& t : mesh.triangles) {
    const Vec3 &a = u[t[0]], &b = u[t[1]], &c = u[t[2]];
    const detail::Yz pa{a.y, a.z}, pb{b.y, b.z}, pc{c.y, c.z};
    const double d = (pb.y - pa.y) * (pc.z - pa.z) - (pb.z - pa.z) * (pc.y - pa.y);
    if (d == 0.0) continue;
    // Scanline centers y = offset + j + 0.5 within the projected bounds.
    const double ylo = std::min({a.y, b.y, c.y}) - offset[1] - 0.5;
    const double yhi = std::max({a.y, b.y, c.y}) - offset[1] - 0.5;
    const double zlo = std::min({a.z, b.z, c.z}) - offset[2] - 0.5;
    const double zhi = std::max({a.z, b.z, c.z}) - offset[2] - 0.5;
    const auto j0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(ylo)));
    const auto j1 = std::min<std::int64_t>(ny - 1, static_cast<std::int64_t>(std::floor(yhi)));
    const auto k0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(zlo)));
    const auto k1 = std::min<std::int64_t>(nz - 1, static_cast<std::int64_t>(std::floor(zhi)));
    const int orientation = d > 0 ? 1 : -1;
    for (auto k = k0; k <= k1; ++k)
      for (auto j = j0; j <= j1; ++j) {
        const detail::Yz p{static_cast<double>(offset[1] + j) + 0.5,
                           static_cast<double>(offset[2] + k) + 0.5};
        if (detail::perturbed_side(pa, pb, p) != orientation ||
            detail::perturbed_side(pb, pc, p) != orientation ||
            detail::perturbed_side(pc, pa, p) != orientation)
          continue;
        const double wa = (pc.y - pb.y) * (p.z - pb.z) - (pc.z - pb.z) * (p.y - pb.y);
        const double wb = (pa.y - pc.y) * (p.z - pc.z) - (pa.z - pc.z) * (p.y - pc.y);
        const double wc = d - wa - wb;
        crossings[static_cast<std::size_t>(j + ny * k)].push_back((wa * a.x + wb * b.x + wc * c.x) / d);
      }
  }

  std::size_t odd = 0;
  for (const auto& xs : crossings) odd += xs.size() % 2;
  const bool open_mesh =
      static_cast<double>(odd) >= kParityFailureLimit * static_cast<double>(crossings.size());
  if (!open_mesh) {
    for (std::int64_t k = 0; k < nz; ++k)
      for (std::int64_t j = 0; j < ny; ++j) {
        auto& xs = crossings[static_cast<std::size_t>(j + ny * k)];
        if (xs.empty() || xs.size() % 2 != 0) continue;
        std::sort(xs.begin(), xs.end());
        for (std::size_t s = 0; s + 1 < xs.size(); s += 2) {
          const auto i0 = std::max<std::int64_t>(
              0, static_cast<std::int64_t>(std::ceil(xs[s] - offset[0] - 0.5)));
          const auto i1 = std::min<std::int64_t>(
              nx - 1, static_cast<std::int64_t>(std::floor(xs[s + 1] - offset[0] - 0.5)));
          for (auto i = i0; i <= i1; ++i) grid.set_local(i, j, k);
        }
      }
  }
  grid.finalize(open_mesh);
  return grid;
}

/// Number of occupied cells of `a` that are also occupied in `b`.
/// Throws lattice_mismatch when the grids use different lattices.
inline std::int64_t overlap_count(const VoxelGrid& a, const VoxelGrid& b) {
  if (!(a.lattice() == b.lattice())) throw Error(Errc::lattice_mismatch, "grids use different lattices");
  Index3 from{}, to{};
  for (int ax = 0; ax < 3; ++ax) {
    from[ax] = std::max(a.offset()[ax], b.offset()[ax]);
    to[ax] = std::min(a.offset()[ax] + a.dims()[ax], b.offset()[ax] + b.dims()[ax]);
    if (from[ax] >= to[ax]) return 0;
  }
  std::int64_t n = 0;
  for (auto k = from[2]; k < to[2]; ++k)
    for (auto j = from[1]; j < to[1]; ++j)
      for (auto i = from[0]; i < to[0]; ++i)
        if (a.test({i, j, k}) && b.test({i, j, k})) ++n;
  return n;
}

}  // namespace ssrkit
