#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "json.hpp"

namespace ssrkit {

using ordered_json = nlohmann::ordered_json;

enum class RoomType { bedroom, livingroom, other };

inline const char* to_string(RoomType t) {
  switch (t) {
    case RoomType::bedroom: return "bedroom";
    case RoomType::livingroom: return "livingroom";
    case RoomType::other: return "other";
  }
  return "other";
}

/// One object of the scene: its description plus bottom-center placement.
///
/// `pos` is the bottom-center of the unrotated bounding box; `rot` turns the
/// object about the vertical axis through `pos`. Keys the parser does not
/// know are carried in `extra` and written back verbatim.
struct SceneObject {
  std::string desc;
  Vec3 size;
  Vec3 pos;
  Quaternion rot;
  std::optional<std::string> jid;
  std::optional<std::string> sampled_asset_jid;
  std::optional<std::string> sampled_asset_desc;
  std::optional<Vec3> sampled_asset_size;
  std::optional<std::string> uuid;
  ordered_json extra = ordered_json::object();

  bool operator==(const SceneObject&) const = default;

  /// Key used to look up meshes: the sampled asset when present, else jid.
  const std::optional<std::string>& asset_key() const {
    return sampled_asset_jid ? sampled_asset_jid : jid;
  }
};

struct Scene {
  RoomType room_type = RoomType::other;
  // Exact text of room_type in the source document.
  std::string room_type_label = "other";
  std::vector<Vec3> bounds_top;
  std::vector<Vec3> bounds_bottom;
  std::vector<SceneObject> objects;
  ordered_json extra = ordered_json::object();

  bool operator==(const Scene&) const = default;

  double floor_y() const { return bounds_bottom.empty() ? 0.0 : bounds_bottom.front().y; }
  double ceiling_y() const { return bounds_top.empty() ? 0.0 : bounds_top.front().y; }
};

}  // namespace ssrkit
