#pragma once

// Reading and writing Structured Scene Representation documents.

#include <cmath>
#include <iostream>
#include <string>
#include <string_view>

#include "error.hpp"
#include "scene.hpp"

namespace ssrkit {

inline constexpr double kPlaneTolerance = 1e-4;
inline constexpr double kQuaternionNormTolerance = 1e-3;

struct ParseOptions {
  // Check bound-ring invariants (pairing, planarity, rectilinearity, >= 4).
  bool check_bounds = true;
  // Where room_type fallbacks are reported; nullptr silences them.
  std::ostream* warnings = &std::cerr;
};

namespace detail {

inline RoomType room_type_from(std::string_view s) {
  if (s == "bedroom") return RoomType::bedroom;
  if (s == "livingroom") return RoomType::livingroom;
  return RoomType::other;
}

inline const ordered_json& require(const ordered_json& obj, const char* key,
                                   const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::missing_key, path + "." + key);
  return *it;
}

inline double number_at(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) throw Error(Errc::bad_type, path + " (expected number)");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(Errc::invariant_violation, path + " is not finite");
  return d;
}

inline std::string string_at(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) throw Error(Errc::bad_type, path + " (expected string)");
  return v.get<std::string>();
}

inline Vec3 vec3_at(const ordered_json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3)
    throw Error(Errc::bad_type, path + " (expected 3-element array)");
  return {number_at(v[0], path + "[0]"), number_at(v[1], path + "[1]"),
          number_at(v[2], path + "[2]")};
}

inline Quaternion quat_at(const ordered_json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4)
    throw Error(Errc::bad_type, path + " (expected 4-element array)");
  Quaternion q{number_at(v[0], path + "[0]"), number_at(v[1], path + "[1]"),
               number_at(v[2], path + "[2]"), number_at(v[3], path + "[3]")};
  if (std::abs(q.norm() - 1.0) > kQuaternionNormTolerance)
    throw Error(Errc::invariant_violation, path + " is not a unit quaternion");
  return q;
}

inline ordered_json to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }
inline ordered_json to_json(const Quaternion& q) {
  return ordered_json::array({q.x, q.y, q.z, q.w});
}

}  // namespace detail

/// Reads one object from an already-parsed JSON value.
inline SceneObject object_from_json(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) throw Error(Errc::bad_type, path + " (expected object)");
  SceneObject o;
  o.desc = detail::string_at(detail::require(j, "desc", path), path + ".desc");
  if (o.desc.empty()) throw Error(Errc::invariant_violation, path + ".desc is empty");
  o.size = detail::vec3_at(detail::require(j, "size", path), path + ".size");
  if (o.size.x <= 0 || o.size.y <= 0 || o.size.z <= 0)
    throw Error(Errc::invariant_violation, path + ".size must be positive");
  o.pos = detail::vec3_at(detail::require(j, "pos", path), path + ".pos");
  o.rot = detail::quat_at(detail::require(j, "rot", path), path + ".rot");

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const std::string sub = path + "." + key;
    if (key == "desc" || key == "size" || key == "pos" || key == "rot") continue;
    if (key == "jid") o.jid = detail::string_at(*it, sub);
    else if (key == "sampled_asset_jid") o.sampled_asset_jid = detail::string_at(*it, sub);
    else if (key == "sampled_asset_desc") o.sampled_asset_desc = detail::string_at(*it, sub);
    else if (key == "sampled_asset_size") o.sampled_asset_size = detail::vec3_at(*it, sub);
    else if (key == "uuid") o.uuid = detail::string_at(*it, sub);
    else o.extra[key] = *it;
  }
  return o;
}

inline ordered_json object_to_json(const SceneObject& o) {
  ordered_json j = ordered_json::object();
  j["desc"] = o.desc;
  j["size"] = detail::to_json(o.size);
  j["pos"] = detail::to_json(o.pos);
  j["rot"] = detail::to_json(o.rot);
  if (o.jid) j["jid"] = *o.jid;
  if (o.sampled_asset_jid) j["sampled_asset_jid"] = *o.sampled_asset_jid;
  if (o.sampled_asset_desc) j["sampled_asset_desc"] = *o.sampled_asset_desc;
  if (o.sampled_asset_size) j["sampled_asset_size"] = detail::to_json(*o.sampled_asset_size);
  if (o.uuid) j["uuid"] = *o.uuid;
  for (auto it = o.extra.begin(); it != o.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

/// Checks the bound-ring invariants; throws invariant_violation on failure.
inline void check_bounds(const Scene& s) {
  const auto& top = s.bounds_top;
  const auto& bottom = s.bounds_bottom;
  if (top.size() != bottom.size())
    throw Error(Errc::invariant_violation, "bounds_top and bounds_bottom differ in length");
  if (bottom.size() < 4)
    throw Error(Errc::invariant_violation, "fewer than 4 boundary vertices");
  const double y0 = bottom.front().y;
  const double y1 = top.front().y;
  if (!(y1 > y0 + kPlaneTolerance))
    throw Error(Errc::invariant_violation, "ceiling must lie above floor");
  for (std::size_t i = 0; i < bottom.size(); ++i) {
    const auto idx = std::to_string(i);
    if (std::abs(top[i].x - bottom[i].x) > kPlaneTolerance ||
        std::abs(top[i].z - bottom[i].z) > kPlaneTolerance)
      throw Error(Errc::invariant_violation, "bounds ring vertex " + idx + " is not paired");
    if (std::abs(bottom[i].y - y0) > kPlaneTolerance)
      throw Error(Errc::invariant_violation, "bounds_bottom[" + idx + "] off the floor plane");
    if (std::abs(top[i].y - y1) > kPlaneTolerance)
      throw Error(Errc::invariant_violation, "bounds_top[" + idx + "] off the ceiling plane");
    const Vec3& a = bottom[i];
    const Vec3& b = bottom[(i + 1) % bottom.size()];
    const bool along_x = std::abs(a.z - b.z) <= kPlaneTolerance;
    const bool along_z = std::abs(a.x - b.x) <= kPlaneTolerance;
    if (!along_x && !along_z)
      throw Error(Errc::invariant_violation, "boundary edge " + idx + " is not axis-aligned");
  }
}

inline Scene scene_from_json(const ordered_json& doc, const ParseOptions& opts = {}) {
  if (!doc.is_object()) throw Error(Errc::malformed_document, "top level is not an object");
  Scene s;
  s.room_type_label = detail::string_at(detail::require(doc, "room_type", "$"), "$.room_type");
  s.room_type = detail::room_type_from(s.room_type_label);
  if (s.room_type == RoomType::other && s.room_type_label != "other" && opts.warnings)
    *opts.warnings << "warning: room_type '" << s.room_type_label << "' treated as other\n";

  auto ring = [&](const char* key) {
    const auto& arr = detail::require(doc, key, "$");
    const std::string path = std::string("$.") + key;
    if (!arr.is_array()) throw Error(Errc::bad_type, path + " (expected array)");
    std::vector<Vec3> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.push_back(detail::vec3_at(arr[i], path + "[" + std::to_string(i) + "]"));
    return out;
  };
  s.bounds_top = ring("bounds_top");
  s.bounds_bottom = ring("bounds_bottom");

  const auto& objs = detail::require(doc, "objects", "$");
  if (!objs.is_array()) throw Error(Errc::bad_type, "$.objects (expected array)");
  s.objects.reserve(objs.size());
  for (std::size_t i = 0; i < objs.size(); ++i)
    s.objects.push_back(object_from_json(objs[i], "$.objects[" + std::to_string(i) + "]"));

  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key != "room_type" && key != "bounds_top" && key != "bounds_bottom" && key != "objects")
      s.extra[key] = it.value();
  }
  if (opts.check_bounds) check_bounds(s);
  return s;
}

inline Scene parse_ssr(std::string_view text, const ParseOptions& opts = {}) {
  ordered_json doc = ordered_json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::malformed_document, "not valid JSON");
  return scene_from_json(doc, opts);
}

inline ordered_json scene_to_json(const Scene& s) {
  ordered_json j = ordered_json::object();
  j["room_type"] = detail::room_type_from(s.room_type_label) == s.room_type
                       ? s.room_type_label
                       : std::string(to_string(s.room_type));
  ordered_json top = ordered_json::array();
  for (const auto& v : s.bounds_top) top.push_back(detail::to_json(v));
  ordered_json bottom = ordered_json::array();
  for (const auto& v : s.bounds_bottom) bottom.push_back(detail::to_json(v));
  j["bounds_top"] = std::move(top);
  j["bounds_bottom"] = std::move(bottom);
  ordered_json objs = ordered_json::array();
  for (const auto& o : s.objects) objs.push_back(object_to_json(o));
  j["objects"] = std::move(objs);
  for (auto it = s.extra.begin(); it != s.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

/// Pretty output uses two-space indentation; compact output is a single line.
/// Doubles are written in their shortest round-trip form.
inline std::string serialize_ssr(const Scene& s, bool pretty = true) {
  return scene_to_json(s).dump(pretty ? 2 : -1);
}

}  // namespace ssrkit
