#include <gtest/gtest.h>

#include "support.hpp"

using namespace ssrkit;
namespace ts = testing_support;

namespace {

CommandList parse_fixture(const std::string& name) {
  return parse_commands(ts::read_text(ts::data_path("commands/" + name)));
}

Errc code_of(std::string_view text) {
  try {
    (void)parse_commands(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return Errc::io_error;
}

InvalidReason reason_of(std::string_view text) {
  auto r = parse_candidate_object(text);
  const auto* bad = std::get_if<InvalidOutput>(&r);
  if (bad == nullptr) {
    ADD_FAILURE() << "accepted: " << text;
    return InvalidReason::malformed;
  }
  return bad->reason;
}

const char* kListingObject =
    R"({"desc": "dark wooden double bed", "size": [1.6, 0.9, 2.1], "pos": [0.0, 0.0, 0.3],)"
    R"( "rot": [0, 0.70711, 0, -0.70711], "jid": "bed-oak"})";

}  // namespace

TEST(ParseCommands, DictStyleResponse) {
  const auto c = parse_fixture("dict_response.txt");
  ASSERT_EQ(c.commands.size(), 5u);
  EXPECT_EQ(c.commands[0], (EditCommand{CommandKind::add, "dark wooden double bed"}));
  EXPECT_EQ(c.commands[4].description, "low shelf");
  for (const auto& cmd : c.commands) EXPECT_EQ(cmd.kind, CommandKind::add);
  EXPECT_FALSE(c.reasoning);
  EXPECT_FALSE(c.order_warning);
}

TEST(ParseCommands, EmptyList) {
  EXPECT_EQ(code_of(ts::read_text(ts::data_path("commands/empty.txt"))), Errc::no_commands);
  EXPECT_EQ(code_of("I would not change anything."), Errc::no_commands);
}

TEST(ParseCommands, RemoveAfterAddWarnsButKeepsOrder) {
  const auto c = parse_fixture("add_before_remove.txt");
  ASSERT_EQ(c.commands.size(), 2u);
  EXPECT_TRUE(c.order_warning);
  EXPECT_EQ(c.commands[0].kind, CommandKind::add);
  EXPECT_EQ(c.commands[1], (EditCommand{CommandKind::remove, "red sofa"}));
}

TEST(ParseCommands, SurroundingProseReasoningAndLooseTags) {
  const auto c = parse_fixture("swap.txt");
  ASSERT_EQ(c.commands.size(), 2u);
  EXPECT_EQ(c.reasoning, "the user asked to swap the sofa");
  EXPECT_EQ(c.commands[0], (EditCommand{CommandKind::remove, "red sofa"}));
  EXPECT_EQ(c.commands[1], (EditCommand{CommandKind::add, "grey linen sofa"}));
  EXPECT_FALSE(c.order_warning);
}

TEST(ParseCommands, MalformedEntry) {
  EXPECT_EQ(code_of(R"({"commands": ["<add>sofa</remove>"]})"), Errc::malformed_tag);
  EXPECT_EQ(code_of(R"({"commands": ["<add>sofa"]})"), Errc::malformed_tag);
  EXPECT_EQ(code_of(R"({"commands": [42]})"), Errc::malformed_tag);
  EXPECT_EQ(code_of(R"({"commands": "<add>sofa</add>"})"), Errc::malformed_tag);
}

TEST(ParseCommands, RenderRoundTrip) {
  for (const char* f : {"dict_response.txt", "swap.txt", "add_before_remove.txt"}) {
    SCOPED_TRACE(f);
    const auto c = parse_fixture(f);
    const auto text = render_commands(c);
    EXPECT_EQ(parse_commands(text), c);
    EXPECT_EQ(render_commands(parse_commands(text)), text);
  }
}

TEST(ParseCommands, RandomListsRoundTrip) {
  Rng rng(4);
  const std::vector<std::string> words = {"oak", "chair", "red", "lamp", "tall", "sofa", "x"};
  for (int t = 0; t < 200; ++t) {
    CommandList c;
    const auto n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      std::string d = words[rng.below(words.size())];
      for (auto k = rng.below(3); k > 0; --k) d += " " + words[rng.below(words.size())];
      c.commands.push_back({rng.below(2) ? CommandKind::add : CommandKind::remove, d});
    }
    if (rng.below(2)) c.reasoning = "because";
    c.order_warning = detail::check_order(c.commands);
    EXPECT_EQ(parse_commands(render_commands(c)), c);
  }
}

TEST(ParseCommands, RandomBytesNeverCrash) {
  Rng rng(77);
  const std::string alphabet = "{}[]<>/\"':, addremovecommands\\\n";
  for (int t = 0; t < 3000; ++t) {
    std::string s(rng.below(120), ' ');
    for (auto& ch : s)
      ch = rng.below(4) == 0 ? static_cast<char>(rng.below(256)) : alphabet[rng.below(alphabet.size())];
    try {
      const auto c = parse_commands(s);
      EXPECT_FALSE(c.commands.empty());
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == Errc::no_commands || e.code() == Errc::malformed_tag) << e.what();
    }
  }
}

TEST(CandidateObject, AcceptsListingObject) {
  auto r = parse_candidate_object(kListingObject);
  ASSERT_TRUE(std::holds_alternative<SceneObject>(r));
  const auto& o = std::get<SceneObject>(r);
  EXPECT_EQ(o.desc, "dark wooden double bed");
  EXPECT_EQ(o.jid, "bed-oak");
  EXPECT_EQ(o.size.z, 2.1);
}

TEST(CandidateObject, Rejections) {
  const std::string full = kListingObject;
  EXPECT_EQ(reason_of(full.substr(0, full.size() / 2)), InvalidReason::malformed);
  EXPECT_EQ(reason_of("[1, 2, 3]"), InvalidReason::not_object);
  EXPECT_EQ(reason_of(R"({"desc": "x", "size": [1, 1, 1], "pos": [0, 0, 0]})"), InvalidReason::missing_key);
  EXPECT_EQ(reason_of(R"({"desc": "x", "size": [1, 1, 1], "pos": [0, 0, 0], "rot": [0, 0, 1]})"),
            InvalidReason::bad_arity);
  EXPECT_EQ(reason_of(R"({"desc": "x", "size": "big", "pos": [0, 0, 0], "rot": [0, 0, 0, 1]})"),
            InvalidReason::bad_type);
  EXPECT_EQ(reason_of(R"({"desc": 7, "size": [1, 1, 1], "pos": [0, 0, 0], "rot": [0, 0, 0, 1]})"),
            InvalidReason::bad_type);
  EXPECT_EQ(reason_of(std::string(70, '[') + std::string(70, ']')), InvalidReason::malformed);
  EXPECT_EQ(reason_of(std::string(kMaxCandidateBytes + 1, ' ')), InvalidReason::too_large);
}

TEST(CandidateObject, RandomBytesNeverThrow) {
  Rng rng(5);
  const std::string full = kListingObject;
  for (int t = 0; t < 3000; ++t) {
    std::string s = full;
    for (auto k = 1 + rng.below(4); k > 0; --k) s[rng.below(s.size())] = static_cast<char>(rng.below(256));
    auto r = parse_candidate_object(s);
    if (const auto* bad = std::get_if<InvalidOutput>(&r)) {
      EXPECT_FALSE(bad->message.empty());
    }
  }
}
