#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "error.hpp"
#include "polygon.hpp"
#include "rng.hpp"
#include "scene.hpp"
#include "ssr_io.hpp"
#include "vbl.hpp"

namespace ssrkit {

// ---------------------------------------------------------------------------
// Dataset validity filter

struct ValidityThresholds {
  std::size_t min_bounds = 4;
  std::size_t min_objects = 3;
  std::size_t max_objects = 50;
  double max_vbl_norm = 0.1;  // exclusive
};

enum class ValidityReason { ok, bad_bounds, object_count, vbl_exceeded, rescued };

inline const char* to_string(ValidityReason r) {
  switch (r) {
    case ValidityReason::ok: return "ok";
    case ValidityReason::bad_bounds: return "bad_bounds";
    case ValidityReason::object_count: return "object_count";
    case ValidityReason::vbl_exceeded: return "vbl_exceeded";
    case ValidityReason::rescued: return "rescued";
  }
  return "ok";
}

struct SceneValidity {
  bool is_valid = false;
  ValidityReason reason = ValidityReason::ok;
  std::optional<std::size_t> rescued_index;
  double vbl_norm = 0.0;
};

/// Applies the dataset filter: bounds, object count, then normalized VBL.
/// A scene failing only on VBL is rescued when dropping a single object
/// (lowest index first) makes it pass every check.
inline SceneValidity validate_scene(const Scene& scene, const MeshResolver& meshes,
                                    const VoxelConfig& cfg = {},
                                    const ValidityThresholds& th = {}) {
  SceneValidity v;
  if (scene.bounds_bottom.size() < th.min_bounds) {
    v.reason = ValidityReason::bad_bounds;
    return v;
  }
  try {
    check_bounds(scene);
    (void)polygon_from_bounds(scene);
  } catch (const Error&) {
    v.reason = ValidityReason::bad_bounds;
    return v;
  }
  const std::size_t n = scene.objects.size();
  if (n < th.min_objects || n > th.max_objects) {
    v.reason = ValidityReason::object_count;
    return v;
  }

  const ViolationReport report = compute_vbl(scene, meshes, cfg);
  v.vbl_norm = report.vbl_norm;
  if (report.vbl_norm < th.max_vbl_norm) {
    v.is_valid = true;
    return v;
  }
  if (n - 1 >= th.min_objects) {
    for (std::size_t i = 0; i < n; ++i) {
      const ViolationReport reduced = report.without(i);
      if (reduced.vbl_norm < th.max_vbl_norm) {
        v.is_valid = true;
        v.reason = ValidityReason::rescued;
        v.rescued_index = i;
        v.vbl_norm = reduced.vbl_norm;
        return v;
      }
    }
  }
  v.reason = ValidityReason::vbl_exceeded;
  return v;
}

inline nlohmann::ordered_json to_json(const SceneValidity& v) {
  nlohmann::ordered_json j;
  j["is_valid"] = v.is_valid;
  j["reason"] = to_string(v.reason);
  if (v.rescued_index) j["rescued_index"] = *v.rescued_index;
  j["vbl_norm"] = v.vbl_norm;
  return j;
}

// ---------------------------------------------------------------------------
// Rigid transforms

inline Scene translate(const Scene& scene, const Vec3& offset) {
  Scene out = scene;
  for (auto& v : out.bounds_top) v = v + offset;
  for (auto& v : out.bounds_bottom) v = v + offset;
  for (auto& o : out.objects) o.pos = o.pos + offset;
  return out;
}

/// Moves the floor polygon's area centroid to x = z = 0 and the floor to y = 0.
inline Scene translate_to_origin(const Scene& scene) {
  const Point2 c = polygon_centroid(polygon_from_bounds(scene));
  return translate(scene, {-c.x, -scene.floor_y(), -c.z});
}

/// Quarter turns about +y; (x, z) -> (z, -x) per turn, exact.
inline Vec3 rotate_quarter_turns(const Vec3& v, int turns) {
  Vec3 r = v;
  for (int t = 0; t < ((turns % 4) + 4) % 4; ++t) r = {r.z, r.y, -r.x};
  return r;
}

inline Quaternion quarter_turn_quaternion(int turns) {
  constexpr double h = 0.70710678118654752440;  // sqrt(1/2)
  switch (((turns % 4) + 4) % 4) {
    case 1: return {0.0, h, 0.0, h};
    case 2: return {0.0, 1.0, 0.0, 0.0};
    case 3: return {0.0, h, 0.0, -h};
    default: return {0.0, 0.0, 0.0, 1.0};
  }
}

// ---------------------------------------------------------------------------
// Augmentation

inline constexpr double kAugmentJitter = 0.02;
inline constexpr double kMinPerturbedSize = 1e-3;

struct Augmentation {
  int quarter_turns = 0;   // rotation by 90 degrees * quarter_turns about +y
  std::size_t shift = 0;   // cyclic shift of both bound rings
  // Per object: deltas for pos.x, pos.z, size.x, size.z.
  std::vector<std::array<double, 4>> deltas;
};

/// Draws the three independent augmentation choices from `seed`: the
/// rotation, the ring shift, then per object the four jitters in
/// pos.x, pos.z, size.x, size.z order.
inline Augmentation sample_augmentation(const Scene& scene, std::uint64_t seed) {
  Rng rng(seed);
  Augmentation a;
  a.quarter_turns = static_cast<int>(rng.below(4));
  a.shift = scene.bounds_bottom.empty() ? 0 : static_cast<std::size_t>(rng.below(scene.bounds_bottom.size()));
  a.deltas.resize(scene.objects.size());
  for (auto& d : a.deltas)
    for (auto& x : d) x = rng.uniform(-kAugmentJitter, kAugmentJitter);
  return a;
}

inline Scene apply_augmentation(const Scene& scene, const Augmentation& aug) {
  Scene out = scene;
  for (auto& v : out.bounds_top) v = rotate_quarter_turns(v, aug.quarter_turns);
  for (auto& v : out.bounds_bottom) v = rotate_quarter_turns(v, aug.quarter_turns);
  const Quaternion turn = quarter_turn_quaternion(aug.quarter_turns);
  for (auto& o : out.objects) {
    o.pos = rotate_quarter_turns(o.pos, aug.quarter_turns);
    if (aug.quarter_turns % 4 != 0) o.rot = turn * o.rot;
  }
  if (!out.bounds_bottom.empty() && aug.shift % out.bounds_bottom.size() != 0) {
    const auto k = static_cast<std::ptrdiff_t>(aug.shift % out.bounds_bottom.size());
    std::rotate(out.bounds_top.begin(), out.bounds_top.begin() + k, out.bounds_top.end());
    std::rotate(out.bounds_bottom.begin(), out.bounds_bottom.begin() + k, out.bounds_bottom.end());
  }
  for (std::size_t i = 0; i < out.objects.size() && i < aug.deltas.size(); ++i) {
    auto& o = out.objects[i];
    const auto& d = aug.deltas[i];
    if (d[0] != 0.0) o.pos.x += d[0];
    if (d[1] != 0.0) o.pos.z += d[1];
    if (d[2] != 0.0) o.size.x = std::max(o.size.x + d[2], kMinPerturbedSize);
    if (d[3] != 0.0) o.size.z = std::max(o.size.z + d[3], kMinPerturbedSize);
  }
  return out;
}

inline Scene augment(const Scene& scene, std::uint64_t seed) {
  return apply_augmentation(scene, sample_augmentation(scene, seed));
}

// ---------------------------------------------------------------------------
// Editing

inline Scene add_object(const Scene& scene, SceneObject obj) {
  Scene out = scene;
  out.objects.push_back(std::move(obj));
  return out;
}

inline Scene remove_objects(const Scene& scene, std::span<const std::size_t> indices) {
  std::set<std::size_t> drop;
  for (auto i : indices) {
    if (i >= scene.objects.size())
      throw Error(Errc::index_out_of_range, "object index " + std::to_string(i));
    if (!drop.insert(i).second)
      throw Error(Errc::index_out_of_range, "duplicate object index " + std::to_string(i));
  }
  Scene out = scene;
  out.objects.clear();
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    if (!drop.contains(i)) out.objects.push_back(scene.objects[i]);
  return out;
}

}  // namespace ssrkit
