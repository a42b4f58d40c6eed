#pragma once

// Rectilinear room outlines: corner extraction from floor meshes, area and
// containment queries, and extrusion into a closed boundary prism.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "scene.hpp"

namespace ssrkit {

inline constexpr double kAxisTolerance = 1e-4;

/// Closed rectilinear outline in the (x, z) plane.
///
/// Canonical form: starts at the corner with minimal x (then minimal z),
/// the first edge runs towards +z, and the shoelace sum
/// sum(x_i * z_{i+1} - x_{i+1} * z_i) is negative. Room bounds in the
/// published SSR data follow the same winding.
struct RectilinearPolygon {
  std::vector<Point2> corners;
  double y_floor = 0.0;
  double y_ceiling = 0.0;

  bool operator==(const RectilinearPolygon&) const = default;
};

inline double orient2(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.z - a.z) - (b.z - a.z) * (c.x - a.x);
}

inline double shoelace(std::span<const Point2> pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    s += a.x * b.z - b.x * a.z;
  }
  return s;
}

inline double polygon_area(const RectilinearPolygon& poly) {
  return std::abs(shoelace(poly.corners)) / 2.0;
}

/// Area-weighted centroid of the outline.
inline Point2 polygon_centroid(const RectilinearPolygon& poly) {
  const auto& p = poly.corners;
  double cx = 0.0, cz = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    const double c = a.x * b.z - b.x * a.z;
    cx += (a.x + b.x) * c;
    cz += (a.z + b.z) * c;
  }
  const double s = shoelace(p);
  return {cx / (3.0 * s), cz / (3.0 * s)};
}

/// Closed-region test: points on an edge count as inside.
inline bool point_in_polygon(const RectilinearPolygon& poly, const Point2& q,
                             double tol = 1e-9) {
  const auto& p = poly.corners;
  bool inside = false;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    const auto& a = p[j];
    const auto& b = p[i];
    if (std::min(a.x, b.x) - tol <= q.x && q.x <= std::max(a.x, b.x) + tol &&
        std::min(a.z, b.z) - tol <= q.z && q.z <= std::max(a.z, b.z) + tol &&
        std::abs(orient2(a, b, q)) <= tol * std::max(1.0, std::hypot(b.x - a.x, b.z - a.z)))
      return true;
    if ((a.z > q.z) != (b.z > q.z)) {
      const double x = a.x + (q.z - a.z) * (b.x - a.x) / (b.z - a.z);
      if (q.x < x) inside = !inside;
    }
  }
  return inside;
}

namespace detail {

inline bool segments_touch(const Point2& a, const Point2& b, const Point2& c, const Point2& d,
                           double tol) {
  // Both segments are axis-aligned, so bounding-box overlap is exact.
  return std::max(std::min(a.x, b.x), std::min(c.x, d.x)) <=
             std::min(std::max(a.x, b.x), std::max(c.x, d.x)) + tol &&
         std::max(std::min(a.z, b.z), std::min(c.z, d.z)) <=
             std::min(std::max(a.z, b.z), std::max(c.z, d.z)) + tol;
}

enum class Axis { x, z };

}  // namespace detail

/// Turns a closed ring of (x, z) points into canonical corner form: snaps
/// near-axis-aligned edges, collapses collinear runs and duplicate points,
/// and fixes the winding and start vertex. Throws not_rectilinear or
/// invalid_geometry when the ring cannot be a rectilinear polygon.
inline std::vector<Point2> canonical_corners(std::span<const Point2> ring,
                                             double tol = kAxisTolerance) {
  std::vector<Point2> pts;
  for (const auto& p : ring)
    if (pts.empty() || std::abs(p.x - pts.back().x) > tol || std::abs(p.z - pts.back().z) > tol)
      pts.push_back(p);
  while (pts.size() > 1 && std::abs(pts.front().x - pts.back().x) <= tol &&
         std::abs(pts.front().z - pts.back().z) <= tol)
    pts.pop_back();
  if (pts.size() < 4) throw Error(Errc::invalid_geometry, "fewer than 4 distinct boundary points");

  const std::size_t n = pts.size();
  std::vector<detail::Axis> axis(n);
  std::vector<int> sign(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    const double dx = b.x - a.x, dz = b.z - a.z;
    if (std::abs(dz) <= tol) {
      axis[i] = detail::Axis::x;
      sign[i] = dx > 0 ? 1 : -1;
    } else if (std::abs(dx) <= tol) {
      axis[i] = detail::Axis::z;
      sign[i] = dz > 0 ? 1 : -1;
    } else {
      throw Error(Errc::not_rectilinear, "edge " + std::to_string(i) + " is not axis-aligned");
    }
  }

  // Rotate so edge 0 starts a run.
  std::size_t start = 0;
  while (start < n && axis[start] == axis[(start + n - 1) % n]) ++start;
  if (start == n) throw Error(Errc::invalid_geometry, "all edges are collinear");

  // Each run of same-axis edges contributes one constant coordinate: the
  // mean over the run's vertices of z (x-runs) or x (z-runs).
  struct Run {
    detail::Axis axis;
    int sign;
    double value;
  };
  std::vector<Run> runs;
  for (std::size_t k = 0; k < n;) {
    const std::size_t i = (start + k) % n;
    Run r{axis[i], sign[i], 0.0};
    double sum = 0.0;
    std::size_t count = 0;
    while (k < n && axis[(start + k) % n] == r.axis) {
      const std::size_t e = (start + k) % n;
      if (sign[e] != r.sign) throw Error(Errc::invalid_geometry, "boundary folds back on itself");
      const auto& a = pts[e];
      sum += r.axis == detail::Axis::x ? a.z : a.x;
      ++count;
      ++k;
    }
    const auto& last = pts[(start + k) % n];
    sum += r.axis == detail::Axis::x ? last.z : last.x;
    ++count;
    r.value = sum / static_cast<double>(count);
    runs.push_back(r);
  }
  if (runs.size() < 4 || runs.size() % 2 != 0)
    throw Error(Errc::invalid_geometry, "boundary does not close into a rectilinear polygon");

  // Corner k sits between run k-1 and run k.
  std::vector<Point2> corners(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Run& prev = runs[(k + runs.size() - 1) % runs.size()];
    const Run& cur = runs[k];
    const Run& xr = cur.axis == detail::Axis::z ? cur : prev;  // constant x
    const Run& zr = cur.axis == detail::Axis::x ? cur : prev;  // constant z
    corners[k] = {xr.value, zr.value};
  }

  for (std::size_t i = 0; i < corners.size(); ++i) {
    const auto& a = corners[i];
    const auto& b = corners[(i + 1) % corners.size()];
    if (std::hypot(b.x - a.x, b.z - a.z) <= tol)
      throw Error(Errc::invalid_geometry, "zero-length boundary edge");
  }
  const std::size_t m = corners.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;
      if (detail::segments_touch(corners[i], corners[(i + 1) % m], corners[j], corners[(j + 1) % m],
                                 0.0))
        throw Error(Errc::invalid_geometry, "boundary self-intersects");
    }

  if (shoelace(corners) > 0) std::reverse(corners.begin(), corners.end());
  const auto first = std::min_element(corners.begin(), corners.end(), [](const auto& a, const auto& b) {
    return a.x < b.x || (a.x == b.x && a.z < b.z);
  });
  std::rotate(corners.begin(), first, corners.end());
  return corners;
}

/// Floor outline of a scene's bounds (bottom ring projected to x, z).
inline RectilinearPolygon polygon_from_bounds(const Scene& scene) {
  std::vector<Point2> ring;
  ring.reserve(scene.bounds_bottom.size());
  for (const auto& v : scene.bounds_bottom) ring.push_back({v.x, v.z});
  return {canonical_corners(ring), scene.floor_y(), scene.ceiling_y()};
}

/// Extracts the ordered corner polygon of a room's floor.
///
/// Floor faces are the horizontal triangles on the lowest such plane. Edges
/// used by exactly one floor triangle are chained into a loop, which is
/// then snapped to the axes and reduced to its true corners.
inline RectilinearPolygon extract_corners(const TriangleMesh& mesh) {
  double floor_y = std::numeric_limits<double>::infinity();
  double top_y = -std::numeric_limits<double>::infinity();
  auto horizontal = [&](const auto& t) {
    const double y0 = mesh.vertices[t[0]].y;
    return std::abs(mesh.vertices[t[1]].y - y0) <= kAxisTolerance &&
           std::abs(mesh.vertices[t[2]].y - y0) <= kAxisTolerance;
  };
  for (const auto& t : mesh.triangles) {
    for (auto idx : t) top_y = std::max(top_y, mesh.vertices[idx].y);
    if (horizontal(t)) floor_y = std::min(floor_y, mesh.vertices[t[0]].y);
  }
  if (!std::isfinite(floor_y)) throw Error(Errc::open_boundary, "mesh has no horizontal faces");

  // Weld floor vertices by quantized (x, z).
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> weld;
  std::vector<Point2> points;
  auto vertex_id = [&](std::size_t idx) {
    const Vec3& v = mesh.vertices[idx];
    const std::pair key{std::llround(v.x * 1e6), std::llround(v.z * 1e6)};
    auto [it, inserted] = weld.try_emplace(key, points.size());
    if (inserted) points.push_back({v.x, v.z});
    return it->second;
  };

  std::map<std::pair<std::size_t, std::size_t>, int> edge_use;
  for (const auto& t : mesh.triangles) {
    if (!horizontal(t) || std::abs(mesh.vertices[t[0]].y - floor_y) > kAxisTolerance) continue;
    const std::size_t ids[3] = {vertex_id(t[0]), vertex_id(t[1]), vertex_id(t[2])};
    for (int k = 0; k < 3; ++k) {
      auto a = ids[k], b = ids[(k + 1) % 3];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      ++edge_use[{a, b}];
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> adjacency;
  for (const auto& [e, uses] : edge_use) {
    if (uses != 1) continue;
    adjacency[e.first].push_back(e.second);
    adjacency[e.second].push_back(e.first);
  }
  if (adjacency.empty()) throw Error(Errc::open_boundary, "floor has no boundary edges");
  for (const auto& [v, nbrs] : adjacency) {
    if (nbrs.size() % 2 != 0) throw Error(Errc::open_boundary, "boundary edges do not chain");
    if (nbrs.size() > 2) throw Error(Errc::multiple_loops, "boundary loops share a vertex");
  }

  std::vector<std::size_t> loop;
  {
    const std::size_t first = adjacency.begin()->first;
    std::size_t prev = first, cur = adjacency.begin()->second[0];
    loop.push_back(first);
    while (cur != first) {
      loop.push_back(cur);
      const auto& nb = adjacency[cur];
      const std::size_t next = nb[0] == prev ? nb[1] : nb[0];
      prev = cur;
      cur = next;
      if (loop.size() > adjacency.size()) throw Error(Errc::open_boundary, "boundary does not close");
    }
  }
  if (loop.size() != adjacency.size())
    throw Error(Errc::multiple_loops, "floor boundary has more than one loop");

  std::vector<Point2> ring;
  ring.reserve(loop.size());
  for (auto id : loop) ring.push_back(points[id]);
  return {canonical_corners(ring), floor_y, std::max(top_y, floor_y)};
}

namespace detail {

inline bool in_triangle_closed(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
  // Triangle (a, b, c) has negative orientation in canonical traversal.
  return orient2(a, b, p) <= 0 && orient2(b, c, p) <= 0 && orient2(c, a, p) <= 0;
}

/// Ear clipping over canonical (negative-orientation) corners. Returns
/// index triples in traversal orientation.
inline std::vector<std::array<std::size_t, 3>> triangulate(std::span<const Point2> pts) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::array<std::size_t, 3>> out;
  while (idx.size() > 3) {
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t ip = idx[(k + idx.size() - 1) % idx.size()];
      const std::size_t ic = idx[k];
      const std::size_t in = idx[(k + 1) % idx.size()];
      if (orient2(pts[ip], pts[ic], pts[in]) >= 0) continue;  // reflex or flat
      bool blocked = false;
      for (auto j : idx) {
        if (j == ip || j == ic || j == in) continue;
        if (in_triangle_closed(pts[j], pts[ip], pts[ic], pts[in])) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      out.push_back({ip, ic, in});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) throw Error(Errc::invalid_geometry, "polygon could not be triangulated");
  }
  out.push_back({idx[0], idx[1], idx[2]});
  return out;
}

}  // namespace detail

/// Closed prism over the outline between y_floor and y_ceiling, with
/// outward-facing winding. Floor and ceiling share the outline's vertices,
/// so every edge borders exactly two triangles.
inline TriangleMesh extrude_boundary_mesh(const RectilinearPolygon& poly) {
  if (!(poly.y_ceiling > poly.y_floor))
    throw Error(Errc::invalid_geometry, "prism height must be positive");
  if (poly.corners.size() < 4) throw Error(Errc::invalid_geometry, "fewer than 4 corners");
  const std::size_t n = poly.corners.size();
  TriangleMesh m;
  m.vertices.reserve(2 * n);
  for (const auto& p : poly.corners) m.vertices.push_back({p.x, poly.y_floor, p.z});
  for (const auto& p : poly.corners) m.vertices.push_back({p.x, poly.y_ceiling, p.z});

  std::vector<Point2> pts = poly.corners;
  if (shoelace(pts) > 0) throw Error(Errc::invalid_geometry, "polygon is not in canonical winding");
  for (const auto& t : detail::triangulate(pts)) {
    m.triangles.push_back({t[0], t[2], t[1]});              // floor faces down
    m.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});  // ceiling faces up
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    m.triangles.push_back({i, j, j + n});
    m.triangles.push_back({i, j + n, i + n});
  }
  return m;
}

}  // namespace ssrkit
