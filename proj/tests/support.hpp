#pragma once

// Fixture access and brute-force oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the voxelizer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssrkit/ssrkit.hpp"

namespace testing_support {

inline std::string data_path(const std::string& rel) { return std::string(SSRKIT_TEST_DATA) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline ssrkit::Scene load_scene(const std::string& rel) { return ssrkit::parse_ssr(read_text(data_path(rel))); }

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout. stderr is discarded.
inline CommandResult run(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string cli() { return SSRKIT_CLI; }

// ---------------------------------------------------------------------------
// Voxel oracle. A cell is occupied iff its open interior meets the closed
// solid; coordinates are taken in lattice units with values within 1e-7 of
// an integer rounded onto it.

inline double lattice_coord(double p, double anchor, double g) {
  const double u = (p - anchor) / g;
  const double r = std::round(u);
  return std::abs(u - r) <= 1e-7 ? r : u;
}

/// Axis-aligned room piece [x0,x1] x [y0,y1] x [z0,z1] in world units.
struct Cuboid {
  double x0, x1, y0, y1, z0, z1;
};

/// Box with a yaw: bottom-center `pos`, extents `size`, yaw angle about +y
/// with (x, z) -> (x cos + z sin, -x sin + z cos).
struct YawBox {
  ssrkit::Vec3 pos;
  ssrkit::Vec3 size;
  double yaw = 0.0;

  ssrkit::SceneObject as_object(const std::string& desc = "box") const {
    ssrkit::SceneObject o;
    o.desc = desc;
    o.size = size;
    o.pos = pos;
    o.rot = ssrkit::Quaternion::yaw(yaw);
    return o;
  }

  /// Footprint corners in world (x, z).
  std::array<std::array<double, 2>, 4> corners() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double hx = size.x / 2, hz = size.z / 2;
    std::array<std::array<double, 2>, 4> out{};
    const double lx[4] = {-hx, hx, hx, -hx};
    const double lz[4] = {-hz, -hz, hz, hz};
    for (int i = 0; i < 4; ++i)
      out[i] = {pos.x + lx[i] * c + lz[i] * s, pos.z - lx[i] * s + lz[i] * c};
    return out;
  }
};

struct LatticeView {
  ssrkit::Vec3 anchor;
  double g = 0.05;
};

/// Open 1-D cell (i, i+1) meets closed [lo, hi], all in lattice units.
inline bool open_cell_meets(std::int64_t i, double lo, double hi) {
  return static_cast<double>(i) < hi && static_cast<double>(i + 1) > lo;
}

inline bool cuboid_occupies(const Cuboid& c, const LatticeView& L, std::int64_t i, std::int64_t j, std::int64_t k) {
  return open_cell_meets(i, lattice_coord(c.x0, L.anchor.x, L.g), lattice_coord(c.x1, L.anchor.x, L.g)) &&
         open_cell_meets(j, lattice_coord(c.y0, L.anchor.y, L.g), lattice_coord(c.y1, L.anchor.y, L.g)) &&
         open_cell_meets(k, lattice_coord(c.z0, L.anchor.z, L.g), lattice_coord(c.z1, L.anchor.z, L.g));
}

/// Yaw box against the open cell: vertical interval test plus a 2-D
/// separating-axis test on the footprint with the cell square's axes and
/// the box's two axes. Touching counts as separated.
struct YawBoxOracle {
  std::array<std::array<double, 2>, 4> q;  // footprint corners, lattice units
  double y0 = 0, y1 = 0;
  std::array<std::array<double, 2>, 2> axes{};

  YawBoxOracle(const YawBox& b, const LatticeView& L) {
    const auto w = b.corners();
    for (int i = 0; i < 4; ++i)
      q[i] = {lattice_coord(w[i][0], L.anchor.x, L.g), lattice_coord(w[i][1], L.anchor.z, L.g)};
    y0 = lattice_coord(b.pos.y, L.anchor.y, L.g);
    y1 = lattice_coord(b.pos.y + b.size.y, L.anchor.y, L.g);
    axes[0] = {std::cos(b.yaw), -std::sin(b.yaw)};
    axes[1] = {std::sin(b.yaw), std::cos(b.yaw)};
  }

  std::array<std::int64_t, 6> cell_range() const {
    double lo[2] = {q[0][0], q[0][1]}, hi[2] = {q[0][0], q[0][1]};
    for (const auto& p : q)
      for (int a = 0; a < 2; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    return {static_cast<std::int64_t>(std::floor(lo[0])) - 1, static_cast<std::int64_t>(std::ceil(hi[0])) + 1,
            static_cast<std::int64_t>(std::floor(y0)) - 1,    static_cast<std::int64_t>(std::ceil(y1)) + 1,
            static_cast<std::int64_t>(std::floor(lo[1])) - 1, static_cast<std::int64_t>(std::ceil(hi[1])) + 1};
  }

  bool occupies(std::int64_t i, std::int64_t j, std::int64_t k) const {
    if (!open_cell_meets(j, y0, y1)) return false;
    const double sq[4][2] = {{double(i), double(k)}, {double(i + 1), double(k)},
                             {double(i + 1), double(k + 1)}, {double(i), double(k + 1)}};
    const double all_axes[4][2] = {{1, 0}, {0, 1}, {axes[0][0], axes[0][1]}, {axes[1][0], axes[1][1]}};
    for (const auto& ax : all_axes) {
      double a0 = 1e300, a1 = -1e300, b0 = 1e300, b1 = -1e300;
      for (const auto& p : sq) {
        const double d = p[0] * ax[0] + p[1] * ax[1];
        a0 = std::min(a0, d);
        a1 = std::max(a1, d);
      }
      for (const auto& p : q) {
        const double d = p[0] * ax[0] + p[1] * ax[1];
        b0 = std::min(b0, d);
        b1 = std::max(b1, d);
      }
      if (!(a1 > b0 + 1e-9 && b1 > a0 + 1e-9)) return false;
    }
    return true;
  }
};

struct OracleReport {
  std::vector<std::int64_t> per_object_voxels;
  std::vector<std::int64_t> per_object_oob;
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> per_pair_mbl;  // nonzero only
  std::int64_t oob = 0;
  std::int64_t mbl = 0;
};

/// Triple-loop OOB/MBL for yaw boxes in a room given as a union of cuboids.
inline OracleReport brute_force_vbl(const std::vector<Cuboid>& room, const std::vector<YawBox>& boxes,
                                    const LatticeView& L) {
  OracleReport r;
  std::vector<YawBoxOracle> ob;
  for (const auto& b : boxes) ob.emplace_back(b, L);
  auto in_room = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    for (const auto& c : room)
      if (cuboid_occupies(c, L, i, j, k)) return true;
    return false;
  };
  // Cells of each object, as sorted global triples.
  std::vector<std::vector<std::array<std::int64_t, 3>>> cells(boxes.size());
  for (std::size_t n = 0; n < boxes.size(); ++n) {
    const auto rg = ob[n].cell_range();
    std::int64_t oob = 0;
    for (auto i = rg[0]; i < rg[1]; ++i)
      for (auto j = rg[2]; j < rg[3]; ++j)
        for (auto k = rg[4]; k < rg[5]; ++k)
          if (ob[n].occupies(i, j, k)) {
            cells[n].push_back({i, j, k});
            if (!in_room(i, j, k)) ++oob;
          }
    r.per_object_voxels.push_back(static_cast<std::int64_t>(cells[n].size()));
    r.per_object_oob.push_back(oob);
    r.oob += oob;
  }
  for (std::size_t m = 0; m < boxes.size(); ++m)
    for (std::size_t n = m + 1; n < boxes.size(); ++n) {
      std::int64_t both = 0;
      for (const auto& c : cells[m])
        if (ob[n].occupies(c[0], c[1], c[2])) ++both;
      if (both) r.per_pair_mbl[{m, n}] = both;
      r.mbl += both;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Random rectilinear rooms as unions of cuboids.

struct RandomRoom {
  std::vector<std::array<double, 2>> ring;  // (x, z), any orientation
  std::vector<Cuboid> pieces;
  double height = 2.6;

  ssrkit::Scene scene() const {
    ssrkit::Scene s;
    s.room_type = ssrkit::RoomType::other;
    for (const auto& p : ring) {
      s.bounds_bottom.push_back({p[0], 0.0, p[1]});
      s.bounds_top.push_back({p[0], height, p[1]});
    }
    return s;
  }
};

/// Rectangle, L or U footprint with corner coordinates on a 1 cm grid.
inline RandomRoom random_room(ssrkit::Rng& rng) {
  auto cm = [&](double lo, double hi) {
    return std::round(rng.uniform(lo, hi) * 100.0) / 100.0;
  };
  RandomRoom r;
  r.height = cm(2.4, 3.0);
  const double x0 = cm(-3.0, -1.5), x3 = cm(1.5, 3.0), z0 = cm(-3.0, -1.5), z1 = cm(1.5, 3.0);
  const double h = r.height;
  switch (rng.below(3)) {
    case 0:
      r.ring = {{x0, z0}, {x3, z0}, {x3, z1}, {x0, z1}};
      r.pieces = {{x0, x3, 0, h, z0, z1}};
      break;
    case 1: {
      const double xm = cm(x0 + 0.8, x3 - 0.8), zm = cm(z0 + 0.8, z1 - 0.8);
      r.ring = {{x0, z0}, {x3, z0}, {x3, zm}, {xm, zm}, {xm, z1}, {x0, z1}};
      r.pieces = {{x0, x3, 0, h, z0, zm}, {x0, xm, 0, h, zm, z1}};
      break;
    }
    default: {
      const double x1 = cm(x0 + 0.7, (x0 + x3) / 2 - 0.3), x2 = cm((x0 + x3) / 2 + 0.3, x3 - 0.7);
      const double zm = cm(z0 + 0.8, z1 - 0.8);
      r.ring = {{x0, z0}, {x3, z0}, {x3, z1}, {x2, z1}, {x2, zm}, {x1, zm}, {x1, z1}, {x0, z1}};
      r.pieces = {{x0, x3, 0, h, z0, zm}, {x0, x1, 0, h, zm, z1}, {x2, x3, 0, h, zm, z1}};
      break;
    }
  }
  if (rng.below(2)) std::reverse(r.ring.begin(), r.ring.end());
  return r;
}

inline YawBox random_box(ssrkit::Rng& rng, const RandomRoom& room) {
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  for (const auto& p : room.ring)
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  YawBox b;
  b.size = {rng.uniform(0.3, 1.6), rng.uniform(0.3, 2.2), rng.uniform(0.3, 1.6)};
  b.pos = {rng.uniform(lo[0] - 0.3, hi[0] + 0.3), rng.below(4) == 0 ? rng.uniform(0.0, 0.6) : 0.0,
           rng.uniform(lo[1] - 0.3, hi[1] + 0.3)};
  b.yaw = rng.below(3) == 0 ? 0.0 : rng.uniform(0.0, 6.283185307179586);
  return b;
}

/// Footprint and height strictly inside one piece of the room, `margin`
/// meters clear of its faces.
inline bool strictly_inside(const RandomRoom& room, const YawBox& b, double margin = 1e-3) {
  if (b.pos.y < margin || b.pos.y + b.size.y > room.height - margin) return false;
  const auto q = b.corners();
  for (const auto& c : room.pieces) {
    bool all = true;
    for (const auto& p : q)
      all = all && p[0] > c.x0 + margin && p[0] < c.x1 - margin && p[1] > c.z0 + margin && p[1] < c.z1 - margin;
    if (all) return true;
  }
  return false;
}

/// Area-weighted centroid by fan triangulation from the first vertex.
inline std::array<double, 2> fan_centroid(const std::vector<std::array<double, 2>>& ring) {
  double a = 0, cx = 0, cz = 0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    const auto& p = ring[0];
    const auto& q = ring[i];
    const auto& r = ring[i + 1];
    const double t = ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])) / 2;
    a += t;
    cx += t * (p[0] + q[0] + r[0]) / 3;
    cz += t * (p[1] + q[1] + r[1]) / 3;
  }
  return {cx / a, cz / a};
}

/// Same ring up to a cyclic shift, coordinates within `tol`.
inline bool cyclic_equal(const std::vector<ssrkit::Point2>& a, const std::vector<ssrkit::Point2>& b,
                         double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  const std::size_t n = a.size();
  for (std::size_t s = 0; s < n; ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      ok = std::abs(a[i].x - b[(i + s) % n].x) <= tol && std::abs(a[i].z - b[(i + s) % n].z) <= tol;
    if (ok) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Conforming refinement of a triangle mesh: face splits at an interior
// point, and edge splits applied to every triangle sharing the edge.

inline void refine(ssrkit::TriangleMesh& m, ssrkit::Rng& rng, int steps) {
  for (int s = 0; s < steps; ++s) {
    const std::size_t t = rng.below(m.triangles.size());
    const auto tri = m.triangles[t];
    if (rng.below(2) == 0) {
      double w0 = rng.uniform(0.1, 1.0), w1 = rng.uniform(0.1, 1.0), w2 = rng.uniform(0.1, 1.0);
      const double sum = w0 + w1 + w2;
      const auto& A = m.vertices[tri[0]];
      const auto& B = m.vertices[tri[1]];
      const auto& C = m.vertices[tri[2]];
      m.vertices.push_back(A * (w0 / sum) + B * (w1 / sum) + C * (w2 / sum));
      const std::size_t p = m.vertices.size() - 1;
      m.triangles[t] = {tri[0], tri[1], p};
      m.triangles.push_back({tri[1], tri[2], p});
      m.triangles.push_back({tri[2], tri[0], p});
    } else {
      const int e = static_cast<int>(rng.below(3));
      const std::size_t a = tri[e], b = tri[(e + 1) % 3];
      const double u = rng.uniform(0.2, 0.8);
      m.vertices.push_back(m.vertices[a] + (m.vertices[b] - m.vertices[a]) * u);
      const std::size_t p = m.vertices.size() - 1;
      const std::size_t count = m.triangles.size();
      for (std::size_t i = 0; i < count; ++i) {
        auto cur = m.triangles[i];
        for (int k = 0; k < 3; ++k) {
          const std::size_t x = cur[k], y = cur[(k + 1) % 3], z = cur[(k + 2) % 3];
          if ((x == a && y == b) || (x == b && y == a)) {
            m.triangles[i] = {x, p, z};
            m.triangles.push_back({p, y, z});
            break;
          }
        }
      }
    }
  }
}

/// partial + gt drawn without replacement from the source objects: a
/// sub-multiset of size 1 for Z0, all N for Z1, and 1..N for Z2.
inline bool reconstructs(const ssrkit::Scene& source, const ssrkit::Instruction& in) {
  auto keys = [](const std::vector<ssrkit::SceneObject>& objs) {
    std::vector<std::string> k;
    for (const auto& o : objs) k.push_back(ssrkit::object_to_json(o).dump());
    std::sort(k.begin(), k.end());
    return k;
  };
  auto drawn = in.partial_scene.objects;
  drawn.push_back(in.gt_object);
  const auto all = keys(source.objects), got = keys(drawn);
  if (!std::includes(all.begin(), all.end(), got.begin(), got.end())) return false;
  switch (in.z_type) {
    case ssrkit::InstructionType::zero_start: return got.size() == 1;
    case ssrkit::InstructionType::full_scene: return got == all;
    case ssrkit::InstructionType::random: return !got.empty() && got.size() <= all.size();
  }
  return false;
}

/// Every CLI subcommand over the whole fixture corpus. Some of these exit
/// nonzero on purpose.
inline std::vector<std::string> cli_invocations() {
  const auto d = [](const std::string& rel) { return "'" + data_path(rel) + "'"; };
  std::vector<std::string> out = {
      "validate " + d("validate") + " " + d("validate/ok") + " --json",
      "validate " + d("validate") + " " + d("validate/ok") + " " + d("ssr") + " --jobs 3",
      "vbl " + d("vbl/overlap.json") + " --before " + d("vbl/overlap_before.json"),
      "vbl " + d("vbl/with_chair.json") + " --meshes " + d("meshes"),
      "vbl " + d("vbl/empty.json"),
      "vbl " + d("ssr/bedroom_listing.json"),
      "sample-asset --prompt 'double bed' --queries " + d("sampler/queries.tsv") + " --size 1.6,0.9,2.0 --catalog " +
          d("sampler/catalog.tsv") + " --seed 11",
      "sample-asset --prompt 'floor lamp' --queries " + d("sampler/queries.tsv") + " --size 0.4,1.6,0.4 --catalog " +
          d("sampler/catalog.tsv") + " --seed 5 --temperature 1.0",
      "sample-asset --prompt stool --queries " + d("sampler/queries.tsv") + " --size 0.4,0.45,0.4 --catalog " +
          d("sampler/catalog.tsv") + " --greedy",
      "reward --scene " + d("reward/scene.json") + " --prompt 'black floor lamp' --gt " + d("reward/gt.json") +
          " --embeddings " + d("reward/embeddings.tsv") + " " + d("reward/candidates.jsonl"),
      "bon --scene " + d("reward/scene.json") + " --prompt 'black floor lamp' " + d("bon/candidates.jsonl"),
      "gen-instructions " + d("instructions/scene5.json") + " " + d("instructions/scene1.json") + " --bank " +
          d("instructions/prompt_bank.json") + " --count 5 --seed 3 --augment",
      "gen-instructions " + d("instructions/scene5.json") + " --bank " + d("instructions/prompt_bank.json") +
          " --count 20 --seed 8",
  };
  for (const char* m : {"floor_square", "floor_l", "floor_diagonal", "floor_two_rooms", "chair-01"})
    out.push_back("extract-bounds " + d(std::string("meshes/") + m + ".obj"));
  for (const char* c : {"dict_response", "swap", "add_before_remove", "empty"})
    out.push_back("commands " + d(std::string("commands/") + c + ".txt"));
  return out;
}

}  // namespace testing_support
