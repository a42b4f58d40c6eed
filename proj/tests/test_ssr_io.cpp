#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace ssrkit;
using testing_support::data_path;
using testing_support::load_scene;
using testing_support::read_text;

namespace {

ParseOptions quiet() {
  ParseOptions o;
  o.warnings = nullptr;
  return o;
}

Errc parse_error(const std::string& text, ParseOptions opts = quiet()) {
  try {
    (void)parse_ssr(text, opts);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return Errc::io_error;
}

const char* kRect = R"({"room_type": "bedroom",
  "bounds_top": [[0, 2.5, 0], [2, 2.5, 0], [2, 2.5, 3], [0, 2.5, 3]],
  "bounds_bottom": [[0, 0, 0], [2, 0, 0], [2, 0, 3], [0, 0, 3]],
  "objects": []})";

}  // namespace

TEST(SsrParse, BedroomListingFixture) {
  const Scene s = load_scene("ssr/bedroom_listing.json");
  EXPECT_EQ(s.room_type, RoomType::bedroom);
  ASSERT_EQ(s.bounds_top.size(), 4u);
  ASSERT_EQ(s.bounds_bottom.size(), 4u);
  EXPECT_EQ(s.bounds_top[0], (Vec3{-1.55, 2.6, 1.9}));
  EXPECT_EQ(s.bounds_bottom[2], (Vec3{1.55, 0.0, -1.9}));
  ASSERT_EQ(s.objects.size(), 1u);
  const SceneObject& bed = s.objects[0];
  EXPECT_EQ(bed.desc.rfind("A contemporary king-size bed", 0), 0u);
  EXPECT_EQ(bed.size, (Vec3{1.77, 0.99, 1.94}));
  EXPECT_EQ(bed.pos, (Vec3{0.44, 0.0, -0.44}));
  EXPECT_EQ(bed.rot.y, 0.70711);
  EXPECT_EQ(bed.rot.w, -0.70711);
  EXPECT_EQ(bed.jid, "8a31d51c-2306-439f-90c6-650be7284975");
  EXPECT_EQ(bed.sampled_asset_jid, "7bf721bf-8839-4343-95c5-b6e852805ad1-(0.83)-(1.0)-(0.86)");
  ASSERT_TRUE(bed.sampled_asset_size.has_value());
  EXPECT_EQ(*bed.sampled_asset_size, (Vec3{1.77, 1.02, 2.03}));
  EXPECT_EQ(bed.uuid, "d3d31dbc-ff1d-4122-8a80-52598c326f00");
}

TEST(SsrParse, ListingRotationIsAQuarterYaw) {
  // Stored [x, y, z, w]: a pure yaw, so the bed stays upright.
  const Scene s = load_scene("ssr/bedroom_listing.json");
  const Vec3 up = s.objects[0].rot.normalized().rotate({0, 1, 0});
  EXPECT_NEAR(up.y, 1.0, 1e-9);
  const Vec3 x = s.objects[0].rot.normalized().rotate({1, 0, 0});
  EXPECT_NEAR(std::abs(x.z), 1.0, 1e-9);
}

TEST(SsrParse, EmptyObjectList) {
  const Scene s = parse_ssr(kRect);
  EXPECT_TRUE(s.objects.empty());
  EXPECT_EQ(s.bounds_bottom.size(), 4u);
}

TEST(SsrParse, RoundTripIsStructurallyEqual) {
  for (const char* f : {"ssr/bedroom_listing.json", "ssr/l_room_empty.json", "ssr/empty_rect.json",
                        "ssr/unknown_keys.json", "validate/ok/l_room_four.json", "reward/scene.json",
                        "instructions/scene5.json"}) {
    SCOPED_TRACE(f);
    const Scene a = parse_ssr(read_text(data_path(f)), quiet());
    const Scene b = parse_ssr(serialize_ssr(a), quiet());
    EXPECT_EQ(a, b);
    EXPECT_EQ(serialize_ssr(a), serialize_ssr(b));
    EXPECT_EQ(parse_ssr(serialize_ssr(a, false), quiet()), a);
  }
}

TEST(SsrSerialize, KeyOrderAndEmptyObjects) {
  const std::string text = serialize_ssr(parse_ssr(kRect), false);
  const auto p0 = text.find("\"room_type\"");
  const auto p1 = text.find("\"bounds_top\"");
  const auto p2 = text.find("\"bounds_bottom\"");
  const auto p3 = text.find("\"objects\"");
  EXPECT_LT(p0, p1);
  EXPECT_LT(p1, p2);
  EXPECT_LT(p2, p3);
  EXPECT_NE(text.find("\"objects\":[]"), std::string::npos);
}

TEST(SsrSerialize, ShortestRoundTripNumbers) {
  const std::string text = serialize_ssr(load_scene("ssr/bedroom_listing.json"), false);
  EXPECT_NE(text.find("[-1.55,2.6,1.9]"), std::string::npos);
  EXPECT_NE(text.find("[0.0,0.70711,0.0,-0.70711]"), std::string::npos);
}

TEST(SsrParse, UnknownKeysArePreserved) {
  const Scene s = parse_ssr(read_text(data_path("ssr/unknown_keys.json")), quiet());
  EXPECT_EQ(s.room_type, RoomType::other);
  EXPECT_EQ(s.room_type_label, "diningroom");
  ASSERT_TRUE(s.extra.contains("doors"));
  EXPECT_EQ(s.objects[0].extra["material"], "oak");
  const std::string out = serialize_ssr(s);
  EXPECT_NE(out.find("\"doors\""), std::string::npos);
  EXPECT_NE(out.find("\"material\": \"oak\""), std::string::npos);
  EXPECT_NE(out.find("\"room_type\": \"diningroom\""), std::string::npos);
}

TEST(SsrParse, UnknownRoomTypeWarns) {
  std::ostringstream warn;
  ParseOptions o;
  o.warnings = &warn;
  (void)parse_ssr(read_text(data_path("ssr/unknown_keys.json")), o);
  EXPECT_NE(warn.str().find("diningroom"), std::string::npos);
}

TEST(SsrParse, Errors) {
  EXPECT_EQ(parse_error("{\"room_type\": "), Errc::malformed_document);
  EXPECT_EQ(parse_error("[1, 2]"), Errc::malformed_document);
  EXPECT_EQ(parse_error(R"({"room_type": "bedroom", "bounds_top": [], "objects": []})"), Errc::missing_key);
  EXPECT_EQ(parse_error(R"({"room_type": 3, "bounds_top": [], "bounds_bottom": [], "objects": []})"),
            Errc::bad_type);

  std::string missing_desc = kRect;
  missing_desc.replace(missing_desc.find("\"objects\": []"), 13,
                       R"("objects": [{"size": [1,1,1], "pos": [1,0,1], "rot": [0,0,0,1]}])");
  EXPECT_EQ(parse_error(missing_desc), Errc::missing_key);

  std::string bad_rot = kRect;
  bad_rot.replace(bad_rot.find("\"objects\": []"), 13,
                  R"("objects": [{"desc": "a", "size": [1,1,1], "pos": [1,0,1], "rot": [0,0,1]}])");
  EXPECT_EQ(parse_error(bad_rot), Errc::bad_type);

  std::string bad_norm = kRect;
  bad_norm.replace(bad_norm.find("\"objects\": []"), 13,
                   R"("objects": [{"desc": "a", "size": [1,1,1], "pos": [1,0,1], "rot": [0,0,0,1.1]}])");
  EXPECT_EQ(parse_error(bad_norm), Errc::invariant_violation);

  std::string zero_size = kRect;
  zero_size.replace(zero_size.find("\"objects\": []"), 13,
                    R"("objects": [{"desc": "a", "size": [1,0,1], "pos": [1,0,1], "rot": [0,0,0,1]}])");
  EXPECT_EQ(parse_error(zero_size), Errc::invariant_violation);

  std::string empty_desc = kRect;
  empty_desc.replace(empty_desc.find("\"objects\": []"), 13,
                     R"("objects": [{"desc": "", "size": [1,1,1], "pos": [1,0,1], "rot": [0,0,0,1]}])");
  EXPECT_EQ(parse_error(empty_desc), Errc::invariant_violation);
}

TEST(SsrParse, BoundsInvariants) {
  // Three corners.
  EXPECT_EQ(parse_error(read_text(data_path("validate/bad_bounds.json"))), Errc::invariant_violation);
  // Diagonal edge.
  EXPECT_EQ(parse_error(R"({"room_type": "bedroom",
    "bounds_top": [[0, 2.5, 0], [2, 2.5, 0], [2.5, 2.5, 3], [0, 2.5, 3]],
    "bounds_bottom": [[0, 0, 0], [2, 0, 0], [2.5, 0, 3], [0, 0, 3]], "objects": []})"),
            Errc::invariant_violation);
  // Top and bottom disagree in x.
  EXPECT_EQ(parse_error(R"({"room_type": "bedroom",
    "bounds_top": [[0, 2.5, 0], [2, 2.5, 0], [2, 2.5, 3], [0.1, 2.5, 3]],
    "bounds_bottom": [[0, 0, 0], [2, 0, 0], [2, 0, 3], [0, 0, 3]], "objects": []})"),
            Errc::invariant_violation);
  // Ceiling below floor.
  EXPECT_EQ(parse_error(R"({"room_type": "bedroom",
    "bounds_top": [[0, -1, 0], [2, -1, 0], [2, -1, 3], [0, -1, 3]],
    "bounds_bottom": [[0, 0, 0], [2, 0, 0], [2, 0, 3], [0, 0, 3]], "objects": []})"),
            Errc::invariant_violation);
  // Within the 1e-4 tolerance is accepted.
  EXPECT_NO_THROW(parse_ssr(R"({"room_type": "bedroom",
    "bounds_top": [[0, 2.5, 0], [2, 2.5, 0.00005], [2, 2.5, 3], [0, 2.5, 3]],
    "bounds_bottom": [[0, 0, 0], [2, 0, 0.00005], [2, 0, 3], [0, 0, 3]], "objects": []})"));
  // Lenient parsing skips the bounds checks.
  ParseOptions lenient = quiet();
  lenient.check_bounds = false;
  EXPECT_NO_THROW(parse_ssr(read_text(data_path("validate/bad_bounds.json")), lenient));
}
