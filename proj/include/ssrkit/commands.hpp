#pragma once

// Parsing of language-model output: <add>/<remove> command lists and
// single-object candidates for reward scoring.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "scene.hpp"
#include "ssr_io.hpp"

namespace ssrkit {

enum class CommandKind { add, remove };

struct EditCommand {
  CommandKind kind = CommandKind::add;
  std::string description;
  bool operator==(const EditCommand&) const = default;
};

struct CommandList {
  std::vector<EditCommand> commands;
  std::optional<std::string> reasoning;
  // Set when a <remove> follows an <add>; order is kept as given.
  bool order_warning = false;
  bool operator==(const CommandList&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

struct Tag {
  std::string name;  // lowercase
  bool closing = false;
  std::size_t begin = 0;
  std::size_t end = 0;  // one past '>'
};

/// Reads a tag like `< add >` or `</ remove>` starting at text[pos] == '<'.
inline std::optional<Tag> read_tag(std::string_view text, std::size_t pos) {
  Tag t;
  t.begin = pos;
  std::size_t i = pos + 1;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (i < text.size() && text[i] == '/') {
    t.closing = true;
    ++i;
    skip_ws();
  }
  const std::size_t name_start = i;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  std::string_view name = text.substr(name_start, i - name_start);
  skip_ws();
  if (i >= text.size() || text[i] != '>') return std::nullopt;
  if (iequals(name, "add")) t.name = "add";
  else if (iequals(name, "remove")) t.name = "remove";
  else return std::nullopt;
  t.end = i + 1;
  return t;
}

/// Parses one `<add>desc</add>` / `<remove>desc</remove>` entry that makes
/// up the whole string (surrounding whitespace allowed).
inline std::optional<EditCommand> parse_entry(std::string_view entry) {
  entry = trim(entry);
  if (entry.empty() || entry.front() != '<') return std::nullopt;
  auto open = read_tag(entry, 0);
  if (!open || open->closing) return std::nullopt;
  const auto close_pos = entry.rfind('<');
  if (close_pos == std::string_view::npos || close_pos < open->end) return std::nullopt;
  auto close = read_tag(entry, close_pos);
  if (!close || !close->closing || close->name != open->name || close->end != entry.size())
    return std::nullopt;
  const auto desc = trim(entry.substr(open->end, close_pos - open->end));
  if (desc.empty() || desc.find('<') != std::string_view::npos) return std::nullopt;
  return EditCommand{open->name == "add" ? CommandKind::add : CommandKind::remove, std::string(desc)};
}

/// Every balanced add/remove tag pair in free text, in order.
inline std::vector<EditCommand> scan_tags(std::string_view text) {
  std::vector<EditCommand> out;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string_view::npos) {
    auto open = read_tag(text, pos);
    if (!open || open->closing) {
      ++pos;
      continue;
    }
    std::size_t search = open->end;
    std::optional<Tag> close;
    while ((search = text.find('<', search)) != std::string_view::npos) {
      close = read_tag(text, search);
      if (close) break;
      ++search;
    }
    if (!close || !close->closing || close->name != open->name) {
      pos = open->end;
      continue;
    }
    const auto desc = trim(text.substr(open->end, close->begin - open->end));
    if (!desc.empty())
      out.push_back({open->name == "add" ? CommandKind::add : CommandKind::remove, std::string(desc)});
    pos = close->end;
  }
  return out;
}

/// Finds the end of a balanced {...} starting at text[start] == '{',
/// skipping over JSON string literals.
inline std::optional<std::size_t> balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::nullopt;
}

/// Maximum bracket nesting outside string literals.
inline std::size_t nesting_depth(std::string_view text) {
  std::size_t depth = 0, max_depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') max_depth = std::max(max_depth, ++depth);
    else if ((c == '}' || c == ']') && depth > 0) --depth;
  }
  return max_depth;
}

inline bool check_order(const std::vector<EditCommand>& cmds) {
  bool seen_add = false;
  for (const auto& c : cmds) {
    if (c.kind == CommandKind::add) seen_add = true;
    else if (seen_add) return true;
  }
  return false;
}

}  // namespace detail

/// Extracts the command list from a model response.
///
/// The first embedded JSON object with a "commands" array is used; each
/// entry must be a single tag pair (malformed_tag names the entry index).
/// Responses that are not strict JSON, such as single-quoted dict dumps,
/// fall back to scanning the text for balanced tag pairs.
inline CommandList parse_commands(std::string_view text) {
  CommandList out;
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    const auto end = detail::balanced_end(text, pos);
    if (!end || detail::nesting_depth(text.substr(pos, *end - pos)) > 64) continue;
    const auto doc = nlohmann::json::parse(text.substr(pos, *end - pos), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("commands")) continue;
    const auto& cmds = doc["commands"];
    if (!cmds.is_array()) throw Error(Errc::malformed_tag, "\"commands\" is not an array");
    if (cmds.empty()) throw Error(Errc::no_commands, "empty command list");
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      if (!cmds[i].is_string()) throw Error(Errc::malformed_tag, std::to_string(i));
      auto c = detail::parse_entry(cmds[i].get<std::string>());
      if (!c) throw Error(Errc::malformed_tag, std::to_string(i));
      out.commands.push_back(std::move(*c));
    }
    if (auto r = doc.find("reasoning"); r != doc.end() && r->is_string()) out.reasoning = r->get<std::string>();
    out.order_warning = detail::check_order(out.commands);
    return out;
  }
  out.commands = detail::scan_tags(text);
  if (out.commands.empty()) throw Error(Errc::no_commands, "no <add> or <remove> commands found");
  out.order_warning = detail::check_order(out.commands);
  return out;
}

/// Canonical JSON form: optional "reasoning" first, then "commands".
inline std::string render_commands(const CommandList& list) {
  ordered_json j = ordered_json::object();
  if (list.reasoning) j["reasoning"] = *list.reasoning;
  ordered_json arr = ordered_json::array();
  for (const auto& c : list.commands) {
    const char* tag = c.kind == CommandKind::add ? "add" : "remove";
    arr.push_back(std::string("<") + tag + ">" + c.description + "</" + tag + ">");
  }
  j["commands"] = std::move(arr);
  return j.dump();
}

// ---------------------------------------------------------------------------

enum class InvalidReason { malformed, not_object, missing_key, bad_type, bad_arity, bad_value, too_large };

inline const char* to_string(InvalidReason r) {
  switch (r) {
    case InvalidReason::malformed: return "malformed";
    case InvalidReason::not_object: return "not_object";
    case InvalidReason::missing_key: return "missing_key";
    case InvalidReason::bad_type: return "bad_type";
    case InvalidReason::bad_arity: return "bad_arity";
    case InvalidReason::bad_value: return "bad_value";
    case InvalidReason::too_large: return "too_large";
  }
  return "malformed";
}

struct InvalidOutput {
  InvalidReason reason = InvalidReason::malformed;
  std::string message;
};

using CandidateResult = std::variant<SceneObject, InvalidOutput>;

inline constexpr std::size_t kMaxCandidateBytes = std::size_t{1} << 20;
inline constexpr std::size_t kMaxCandidateDepth = 64;

/// Strict parse of one object (desc, size, pos, rot required). Never
/// throws; every rejection comes back as InvalidOutput.
inline CandidateResult parse_candidate_object(std::string_view text) noexcept {
  try {
    if (text.size() > kMaxCandidateBytes) return InvalidOutput{InvalidReason::too_large, "input exceeds 1 MiB"};
    if (detail::nesting_depth(text) > kMaxCandidateDepth)
      return InvalidOutput{InvalidReason::malformed, "nesting too deep"};
    const ordered_json doc = ordered_json::parse(text.begin(), text.end(), nullptr, false);
    if (doc.is_discarded()) return InvalidOutput{InvalidReason::malformed, "not valid JSON"};
    if (!doc.is_object()) return InvalidOutput{InvalidReason::not_object, "expected a JSON object"};
    for (const char* key : {"desc", "size", "pos", "rot"})
      if (!doc.contains(key)) return InvalidOutput{InvalidReason::missing_key, key};
    for (auto [key, arity] : {std::pair{"size", 3u}, {"pos", 3u}, {"rot", 4u}}) {
      const auto& v = doc[key];
      if (!v.is_array()) return InvalidOutput{InvalidReason::bad_type, key};
      if (v.size() != arity) return InvalidOutput{InvalidReason::bad_arity, key};
    }
    try {
      return object_from_json(doc, "$");
    } catch (const Error& e) {
      const auto reason = e.code() == Errc::bad_type ? InvalidReason::bad_type : InvalidReason::bad_value;
      return InvalidOutput{reason, e.detail()};
    }
  } catch (const std::exception& e) {
    return InvalidOutput{InvalidReason::malformed, e.what()};
  } catch (...) {
    return InvalidOutput{InvalidReason::malformed, "unknown error"};
  }
}

}  // namespace ssrkit
