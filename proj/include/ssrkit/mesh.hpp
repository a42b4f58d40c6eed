#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace ssrkit {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }

  Vec3 corner(std::size_t tri, int k) const { return vertices[triangles[tri][k]]; }

  std::pair<Vec3, Vec3> bounds() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Vec3 lo{inf, inf, inf};
    Vec3 hi{-inf, -inf, -inf};
    for (const auto& t : triangles)
      for (auto idx : t)
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], vertices[idx][a]);
          hi[a] = std::max(hi[a], vertices[idx][a]);
        }
    return {lo, hi};
  }
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

/// Drops zero-area triangles and validates indices.
inline void remove_degenerate(TriangleMesh& mesh, double min_area = 1e-14) {
  std::erase_if(mesh.triangles, [&](const auto& t) {
    for (auto idx : t)
      if (idx >= mesh.vertices.size())
        throw Error(Errc::invalid_geometry, "triangle index out of range");
    return t[0] == t[1] || t[1] == t[2] || t[0] == t[2] ||
           triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <=
               min_area;
  });
}

/// Signed volume by the divergence theorem; positive for outward winding.
inline double signed_volume(const TriangleMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles)
    v += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
  return v / 6.0;
}

/// Parses Wavefront OBJ text. Only `v` and `f` records are read; polygonal
/// faces are fan-triangulated and texture/normal indices are ignored.
inline TriangleMesh parse_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z))
        throw Error(Errc::bad_format, "bad vertex on line " + std::to_string(lineno));
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::size_t> face;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        long long idx = 0;
        auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc{} || p != head.data() + head.size() || idx == 0)
          throw Error(Errc::bad_format, "bad face index on line " + std::to_string(lineno));
        const long long n = static_cast<long long>(mesh.vertices.size());
        const long long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n)
          throw Error(Errc::bad_format, "face index out of range on line " + std::to_string(lineno));
        face.push_back(static_cast<std::size_t>(resolved));
      }
      if (face.size() < 3)
        throw Error(Errc::bad_format, "face with fewer than 3 vertices on line " + std::to_string(lineno));
      for (std::size_t k = 1; k + 1 < face.size(); ++k)
        mesh.triangles.push_back({face[0], face[k], face[k + 1]});
    }
  }
  remove_degenerate(mesh);
  return mesh;
}

inline TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return parse_obj(in);
}

inline std::string to_obj(const TriangleMesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  return out.str();
}

/// Closed axis-aligned box [lo, hi] with outward winding.
inline TriangleMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  m.triangles = {{0, 2, 3}, {0, 3, 1},   // z = lo
                 {4, 5, 7}, {4, 7, 6},   // z = hi
                 {0, 4, 6}, {0, 6, 2},   // x = lo
                 {1, 3, 7}, {1, 7, 5},   // x = hi
                 {0, 1, 5}, {0, 5, 4},   // y = lo
                 {2, 6, 7}, {2, 7, 3}};  // y = hi
  return m;
}

}  // namespace ssrkit
