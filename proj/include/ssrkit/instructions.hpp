#pragma once

// Instruction tuples (partial scene, prompt, object to add) drawn with the
// zero-start / full-scene / random-partial recipe, and the floor-area to
// object-count prior used for full-scene synthesis.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "polygon.hpp"
#include "rng.hpp"
#include "scene.hpp"
#include "ssr_io.hpp"

namespace ssrkit {

inline constexpr std::size_t kPromptsPerObject = 10;

struct PromptBank {
  std::map<std::string, std::vector<std::string>, std::less<>> prompts;

  const std::vector<std::string>& at(std::string_view jid) const {
    auto it = prompts.find(jid);
    if (it == prompts.end()) throw Error(Errc::missing_prompt_bank_entry, std::string(jid));
    return it->second;
  }
};

/// JSON object mapping jid to exactly ten non-empty prompts.
inline PromptBank parse_prompt_bank(std::string_view text) {
  const auto doc = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(Errc::bad_format, "prompt bank is not a JSON object");
  PromptBank bank;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it->is_array() || it->size() != kPromptsPerObject)
      throw Error(Errc::bad_format, "prompt list for " + it.key() + " must have 10 entries");
    std::vector<std::string> list;
    for (const auto& p : *it) {
      if (!p.is_string() || p.get<std::string>().empty())
        throw Error(Errc::bad_format, "empty or non-string prompt for " + it.key());
      list.push_back(p.get<std::string>());
    }
    bank.prompts.emplace(it.key(), std::move(list));
  }
  return bank;
}

inline PromptBank load_prompt_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_prompt_bank(text);
}

enum class InstructionType { zero_start, full_scene, random };

inline const char* to_string(InstructionType z) {
  switch (z) {
    case InstructionType::zero_start: return "Z0_zero_start";
    case InstructionType::full_scene: return "Z1_full_scene";
    case InstructionType::random: return "Z2_random";
  }
  return "Z2_random";
}

struct InstructionWeights {
  double zero_start = 0.1;
  double full_scene = 0.1;
  double random = 0.8;
};

struct Instruction {
  Scene partial_scene;
  std::string prompt;
  SceneObject gt_object;
  InstructionType z_type = InstructionType::random;
};

/// Draws one instruction from `scene`.
///
/// Draw order: object permutation (Fisher-Yates), instruction type, the
/// drop count for the random type, then the prompt.
inline Instruction gen_instruction(const Scene& scene, const PromptBank& bank, std::uint64_t seed,
                                   const InstructionWeights& w = {}) {
  const std::size_t n = scene.objects.size();
  if (n == 0) throw Error(Errc::invariant_violation, "scene has no objects");
  for (const auto& o : scene.objects) {
    if (!o.jid) throw Error(Errc::missing_prompt_bank_entry, "object '" + o.desc + "' has no jid");
    (void)bank.at(*o.jid);
  }

  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm.begin(), perm.end());

  const double u = rng.uniform01() * (w.zero_start + w.full_scene + w.random);
  Instruction out;
  std::size_t keep = 0;  // partial = first `keep` of perm, gt = perm[keep]
  if (u < w.zero_start) {
    out.z_type = InstructionType::zero_start;
    keep = 0;
  } else if (u < w.zero_start + w.full_scene) {
    out.z_type = InstructionType::full_scene;
    keep = n - 1;
  } else {
    out.z_type = InstructionType::random;
    const auto drop = static_cast<std::size_t>(rng.below(n));
    keep = n - drop - 1;
  }

  out.partial_scene = scene;
  out.partial_scene.objects.clear();
  for (std::size_t i = 0; i < keep; ++i) out.partial_scene.objects.push_back(scene.objects[perm[i]]);
  out.gt_object = scene.objects[perm[keep]];
  const auto& prompts = bank.at(*out.gt_object.jid);
  out.prompt = prompts[static_cast<std::size_t>(rng.below(prompts.size()))];
  return out;
}

/// Model input: compact SSR of the partial scene inside <scenegraph> tags,
/// a newline, then the object prompt inside <add> tags:
///
///   <scenegraph>{...}</scenegraph>\n<add>PROMPT</add>
inline std::string render_model_input(const Instruction& instr) {
  return "<scenegraph>" + serialize_ssr(instr.partial_scene, false) + "</scenegraph>\n<add>" +
         instr.prompt + "</add>";
}

inline ordered_json to_json(const Instruction& instr) {
  ordered_json j;
  j["partial_scene"] = scene_to_json(instr.partial_scene);
  j["prompt"] = instr.prompt;
  j["gt_object"] = object_to_json(instr.gt_object);
  j["z_type"] = to_string(instr.z_type);
  return j;
}

// ---------------------------------------------------------------------------

/// Equal-width floor-area bins, each holding the empirical distribution of
/// object counts of the scenes that fell into it.
class ObjectCountPrior {
 public:
  ObjectCountPrior(double area_min, double area_max, std::vector<std::map<std::size_t, std::size_t>> bins)
      : area_min_(area_min), area_max_(area_max), bins_(std::move(bins)) {}

  std::size_t bin_count() const { return bins_.size(); }
  double area_min() const { return area_min_; }
  double area_max() const { return area_max_; }

  /// count -> number of scenes, for bin `b`.
  const std::map<std::size_t, std::size_t>& histogram(std::size_t b) const { return bins_.at(b); }

  std::size_t bin_of(double area) const {
    const double width = (area_max_ - area_min_) / static_cast<double>(bins_.size());
    if (!(width > 0)) return 0;
    const double t = std::floor((area - area_min_) / width);
    return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(bins_.size() - 1)));
  }

  /// Draws an object count for a room of `area`. Empty bins defer to the
  /// nearest non-empty bin (lower bin first on ties).
  std::size_t sample(double area, Rng& rng) const {
    const auto home = static_cast<std::ptrdiff_t>(bin_of(area));
    const auto nb = static_cast<std::ptrdiff_t>(bins_.size());
    for (std::ptrdiff_t d = 0; d < nb; ++d)
      for (std::ptrdiff_t b : {home - d, home + d}) {
        if (b < 0 || b >= nb || bins_[static_cast<std::size_t>(b)].empty()) continue;
        const auto& h = bins_[static_cast<std::size_t>(b)];
        std::size_t total = 0;
        for (const auto& [count, n] : h) total += n;
        auto r = rng.below(total);
        for (const auto& [count, n] : h) {
          if (r < n) return count;
          r -= n;
        }
      }
    throw Error(Errc::invariant_violation, "prior has no scenes");
  }

 private:
  double area_min_;
  double area_max_;
  std::vector<std::map<std::size_t, std::size_t>> bins_;
};

inline ObjectCountPrior object_count_prior(std::span<const Scene> scenes, std::size_t bins) {
  if (scenes.empty()) throw Error(Errc::invariant_violation, "no scenes for the prior");
  if (bins == 0) throw Error(Errc::invariant_violation, "bin count must be positive");
  std::vector<double> areas;
  areas.reserve(scenes.size());
  for (const auto& s : scenes) areas.push_back(polygon_area(polygon_from_bounds(s)));
  const auto [lo, hi] = std::minmax_element(areas.begin(), areas.end());
  ObjectCountPrior shape(*lo, *hi, std::vector<std::map<std::size_t, std::size_t>>(bins));
  std::vector<std::map<std::size_t, std::size_t>> hist(bins);
  for (std::size_t i = 0; i < scenes.size(); ++i) ++hist[shape.bin_of(areas[i])][scenes[i].objects.size()];
  return {*lo, *hi, std::move(hist)};
}

}  // namespace ssrkit
