#pragma once

// Voxel-based layout loss: out-of-bounds (OOB) and pairwise overlap (MBL)
// counts on a lattice shared by the room boundary and every object.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "polygon.hpp"
#include "scene.hpp"
#include "voxel.hpp"

namespace ssrkit {

/// Supplies the mesh for an object, or nullptr to use its bounding box.
using MeshResolver = std::function<std::shared_ptr<const TriangleMesh>(const SceneObject&)>;

inline MeshResolver box_resolver() {
  return [](const SceneObject&) { return std::shared_ptr<const TriangleMesh>{}; };
}

/// Loads `<dir>/<key>.obj` where key is the object's sampled_asset_jid or
/// jid. Objects without either use their box; a keyed object whose file is
/// absent raises missing_mesh.
inline MeshResolver directory_resolver(std::filesystem::path dir) {
  struct Cache {
    std::mutex mu;
    std::map<std::string, std::shared_ptr<const TriangleMesh>> meshes;
  };
  auto cache = std::make_shared<Cache>();
  return [dir = std::move(dir), cache](const SceneObject& obj) -> std::shared_ptr<const TriangleMesh> {
    const auto& key = obj.asset_key();
    if (!key) return nullptr;
    std::lock_guard lock(cache->mu);
    if (auto it = cache->meshes.find(*key); it != cache->meshes.end()) return it->second;
    const auto path = dir / (*key + ".obj");
    if (!std::filesystem::exists(path)) throw Error(Errc::missing_mesh, *key);
    auto mesh = std::make_shared<const TriangleMesh>(load_obj(path.string()));
    cache->meshes.emplace(*key, mesh);
    return mesh;
  };
}

/// Lattice for a scene: boundary AABB minimum minus the padding.
inline Lattice scene_lattice(const Scene& scene, const VoxelConfig& cfg) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf};
  for (const auto* ring : {&scene.bounds_bottom, &scene.bounds_top})
    for (const auto& v : *ring)
      for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], v[a]);
  if (!std::isfinite(lo.x)) throw Error(Errc::invalid_geometry, "scene has no bounds");
  return make_lattice(lo, cfg);
}

/// Solid occupancy of the room prism.
inline VoxelGrid boundary_voxels(const Scene& scene, const Lattice& lattice) {
  return voxelize_mesh(extrude_boundary_mesh(polygon_from_bounds(scene)), lattice);
}

/// Places the object's geometry in world space: the mesh is scaled per axis
/// to `size`, its bottom-center moved to the origin, rotated by `rot` and
/// translated to `pos`. Without a mesh the bounding box itself is used.
inline TriangleMesh place_object_mesh(const SceneObject& obj, const TriangleMesh* mesh) {
  TriangleMesh placed;
  if (mesh == nullptr || mesh->empty()) {
    placed = box_mesh({-obj.size.x / 2, 0.0, -obj.size.z / 2}, {obj.size.x / 2, obj.size.y, obj.size.z / 2});
  } else {
    placed = *mesh;
    const auto [lo, hi] = mesh->bounds();
    const Vec3 anchor{(lo.x + hi.x) / 2, lo.y, (lo.z + hi.z) / 2};
    Vec3 scale{1, 1, 1};
    for (int a = 0; a < 3; ++a)
      if (hi[a] > lo[a]) scale[a] = obj.size[a] / (hi[a] - lo[a]);
    for (auto& v : placed.vertices) {
      const Vec3 d = v - anchor;
      v = {d.x * scale.x, d.y * scale.y, d.z * scale.z};
    }
  }
  for (auto& v : placed.vertices) v = obj.rot.rotate(v) + obj.pos;
  return placed;
}

inline VoxelGrid place_object_voxels(const SceneObject& obj, const TriangleMesh* mesh,
                                     const Lattice& lattice) {
  return voxelize_mesh(place_object_mesh(obj, mesh), lattice);
}

/// Object voxels not covered by the boundary occupancy.
inline std::int64_t compute_oob(const VoxelGrid& object, const VoxelGrid& boundary) {
  if (!(object.lattice() == boundary.lattice()))
    throw Error(Errc::lattice_mismatch, "object and boundary grids use different lattices");
  return object.count() - overlap_count(object, boundary);
}

/// Voxels occupied by both grids. With `early_stop`, grids whose (x, z)
/// footprints do not intersect return 0 without visiting 3D cells.
inline std::int64_t compute_mbl_pair(const VoxelGrid& a, const VoxelGrid& b, bool early_stop = true) {
  if (!(a.lattice() == b.lattice())) throw Error(Errc::lattice_mismatch, "grids use different lattices");
  if (early_stop) {
    const std::int64_t x0 = std::max(a.offset()[0], b.offset()[0]);
    const std::int64_t x1 = std::min(a.offset()[0] + a.dims()[0], b.offset()[0] + b.dims()[0]);
    const std::int64_t z0 = std::max(a.offset()[2], b.offset()[2]);
    const std::int64_t z1 = std::min(a.offset()[2] + a.dims()[2], b.offset()[2] + b.dims()[2]);
    bool touching = false;
    for (auto z = z0; z < z1 && !touching; ++z)
      for (auto x = x0; x < x1; ++x) {
        const auto ia = static_cast<std::size_t>((x - a.offset()[0]) + a.dims()[0] * (z - a.offset()[2]));
        const auto ib = static_cast<std::size_t>((x - b.offset()[0]) + b.dims()[0] * (z - b.offset()[2]));
        if (a.footprint()[ia] && b.footprint()[ib]) {
          touching = true;
          break;
        }
      }
    if (!touching) return 0;
  }
  return overlap_count(a, b);
}

struct ViolationReport {
  std::int64_t oob_voxels = 0;
  std::int64_t mbl_voxels = 0;
  std::int64_t vbl_voxels = 0;
  std::vector<std::int64_t> per_object_oob;
  // Nonzero pair overlaps keyed by (i, j) with i < j.
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> per_pair_mbl;
  std::int64_t total_object_voxels = 0;
  double oob_norm = 0.0;
  double mbl_norm = 0.0;
  double vbl_norm = 0.0;
  // Occupied voxels per object; the denominator's terms.
  std::vector<std::int64_t> per_object_voxels;

  void fill_norms() {
    vbl_voxels = oob_voxels + mbl_voxels;
    const auto denom = static_cast<double>(total_object_voxels);
    oob_norm = total_object_voxels > 0 ? static_cast<double>(oob_voxels) / denom : 0.0;
    mbl_norm = total_object_voxels > 0 ? static_cast<double>(mbl_voxels) / denom : 0.0;
    vbl_norm = total_object_voxels > 0 ? static_cast<double>(vbl_voxels) / denom : 0.0;
  }

  /// Report of the same scene with object `index` removed, derived from the
  /// per-object and per-pair terms. Pair indices above `index` shift down.
  ViolationReport without(std::size_t index) const {
    ViolationReport r;
    for (std::size_t i = 0; i < per_object_oob.size(); ++i) {
      if (i == index) continue;
      r.per_object_oob.push_back(per_object_oob[i]);
      r.per_object_voxels.push_back(per_object_voxels[i]);
      r.oob_voxels += per_object_oob[i];
      r.total_object_voxels += per_object_voxels[i];
    }
    for (const auto& [key, v] : per_pair_mbl) {
      if (key.first == index || key.second == index) continue;
      auto shift = [&](std::size_t i) { return i > index ? i - 1 : i; };
      r.per_pair_mbl[{shift(key.first), shift(key.second)}] = v;
      r.mbl_voxels += v;
    }
    r.fill_norms();
    return r;
  }
};

inline nlohmann::ordered_json to_json(const ViolationReport& r) {
  nlohmann::ordered_json j;
  j["oob_voxels"] = r.oob_voxels;
  j["mbl_voxels"] = r.mbl_voxels;
  j["vbl_voxels"] = r.vbl_voxels;
  j["per_object_oob"] = r.per_object_oob;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::object();
  for (const auto& [key, v] : r.per_pair_mbl)
    pairs[std::to_string(key.first) + "," + std::to_string(key.second)] = v;
  j["per_pair_mbl"] = std::move(pairs);
  j["total_object_voxels"] = r.total_object_voxels;
  j["oob_norm"] = r.oob_norm;
  j["mbl_norm"] = r.mbl_norm;
  j["vbl_norm"] = r.vbl_norm;
  return j;
}

struct VblOptions {
  bool early_stop = true;
};

/// Voxelized scene: boundary and per-object grids on one lattice.
struct SceneVoxels {
  VoxelGrid boundary;
  std::vector<VoxelGrid> objects;
};

inline SceneVoxels voxelize_scene(const Scene& scene, const MeshResolver& meshes,
                                  const VoxelConfig& cfg) {
  const Lattice lattice = scene_lattice(scene, cfg);
  SceneVoxels out{boundary_voxels(scene, lattice), {}};
  out.objects.reserve(scene.objects.size());
  for (const auto& obj : scene.objects) {
    const auto mesh = meshes ? meshes(obj) : nullptr;
    out.objects.push_back(place_object_voxels(obj, mesh.get(), lattice));
  }
  return out;
}

inline ViolationReport violation_report(const SceneVoxels& vox, const VblOptions& opts = {}) {
  ViolationReport r;
  const std::size_t n = vox.objects.size();
  for (const auto& g : vox.objects) {
    const auto oob = compute_oob(g, vox.boundary);
    r.per_object_oob.push_back(oob);
    r.per_object_voxels.push_back(g.count());
    r.oob_voxels += oob;
    r.total_object_voxels += g.count();
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = m + 1; k < n; ++k) {
      const auto v = compute_mbl_pair(vox.objects[m], vox.objects[k], opts.early_stop);
      if (v != 0) r.per_pair_mbl[{m, k}] = v;
      r.mbl_voxels += v;
    }
  r.fill_norms();
  return r;
}

inline ViolationReport compute_vbl(const Scene& scene, const MeshResolver& meshes,
                                   const VoxelConfig& cfg = {}, const VblOptions& opts = {}) {
  return violation_report(voxelize_scene(scene, meshes, cfg), opts);
}

/// vbl_norm(after) - vbl_norm(before) where `after` is `before` plus one
/// trailing object.
inline double delta_vbl(const Scene& before, const Scene& after, const MeshResolver& meshes,
                        const VoxelConfig& cfg = {}) {
  const bool single_addition =
      after.objects.size() == before.objects.size() + 1 &&
      std::equal(before.objects.begin(), before.objects.end(), after.objects.begin()) &&
      before.bounds_bottom == after.bounds_bottom && before.bounds_top == after.bounds_top;
  if (!single_addition)
    throw Error(Errc::not_single_addition, "after must equal before plus one appended object");
  const ViolationReport full = compute_vbl(after, meshes, cfg);
  const ViolationReport base = full.without(after.objects.size() - 1);
  return full.vbl_norm - base.vbl_norm;
}

}  // namespace ssrkit
