#pragma once

// Instruction-following and selection metrics.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "scene.hpp"

namespace ssrkit {

inline constexpr std::string_view kStripPunctuation = ".,;:!?\"'()";

/// Lowercase, split on whitespace, strip leading/trailing punctuation;
/// empty tokens are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view tok = text.substr(start, i - start);
    while (!tok.empty() && kStripPunctuation.find(tok.front()) != std::string_view::npos) tok.remove_prefix(1);
    while (!tok.empty() && kStripPunctuation.find(tok.back()) != std::string_view::npos) tok.remove_suffix(1);
    if (tok.empty()) continue;
    std::string s(tok);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(std::move(s));
  }
  return out;
}

struct PmsCount {
  std::size_t matched = 0;
  std::size_t total = 0;
  double value() const { return static_cast<double>(matched) / static_cast<double>(total); }
};

/// Prompt tokens (with multiplicity) that occur in the description's token set.
inline PmsCount pms_count(std::string_view prompt, std::string_view desc) {
  const auto p = tokenize(prompt);
  if (p.empty()) throw Error(Errc::empty_prompt, "prompt has no words");
  const auto d = tokenize(desc);
  const std::set<std::string> words(d.begin(), d.end());
  PmsCount c{0, p.size()};
  for (const auto& w : p) c.matched += words.contains(w) ? 1 : 0;
  return c;
}

/// Prompt Matching Score: share of prompt words present in the description.
inline double pms(std::string_view prompt, std::string_view desc) { return pms_count(prompt, desc).value(); }

/// Cosine similarity of two unit embeddings.
inline double dss(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(Errc::dimension_mismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// (r_i - mean) / std with population std; all zeros when std < 1e-12.
inline std::vector<double> group_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2) throw Error(Errc::too_few_samples, "need at least 2 rewards");
  const auto n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

struct BonCandidate {
  bool valid = false;
  double pms = 0.0;
  double delta_vbl = 0.0;
};

/// Highest PMS first, then lowest delta VBL, then lowest index. Invalid
/// candidates are never chosen.
inline std::size_t best_of_n(std::span<const BonCandidate> candidates) {
  std::optional<double> best_pms;
  for (const auto& c : candidates)
    if (c.valid && (!best_pms || c.pms > *best_pms)) best_pms = c.pms;
  if (!best_pms) throw Error(Errc::all_invalid, "no valid candidate");
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!c.valid || c.pms != *best_pms) continue;
    if (!pick || c.delta_vbl < candidates[*pick].delta_vbl) pick = i;
  }
  return *pick;
}

/// Flags the objects a prompt refers to.
using RemovalMatcher = std::function<std::vector<bool>(const Scene&, std::string_view)>;

inline constexpr double kRemovalMatchMinPms = 0.5;

/// Deterministic matcher: the object with the highest PMS against the
/// prompt (lowest index on ties) and every object sharing its jid, provided
/// that PMS reaches 0.5. Objects without a jid group by description.
inline RemovalMatcher jid_group_matcher(double min_pms = kRemovalMatchMinPms) {
  return [min_pms](const Scene& scene, std::string_view prompt) {
    std::vector<bool> hit(scene.objects.size(), false);
    std::optional<std::size_t> best;
    double best_score = -1.0;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const double s = pms(prompt, scene.objects[i].desc);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (!best || best_score < min_pms) return hit;
    const auto& ref = scene.objects[*best];
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const auto& o = scene.objects[i];
      hit[i] = ref.jid ? o.jid == ref.jid : (!o.jid && o.desc == ref.desc);
    }
    return hit;
  };
}

/// True iff exactly the matched objects (as a multiset) were removed.
/// Throws illegal_edit when `after` holds anything not taken from `before`.
inline bool removal_accuracy(const Scene& before, const Scene& after, std::string_view prompt,
                             const RemovalMatcher& matcher = jid_group_matcher()) {
  std::vector<bool> used(before.objects.size(), false);
  for (const auto& o : after.objects) {
    bool found = false;
    for (std::size_t i = 0; i < before.objects.size(); ++i)
      if (!used[i] && before.objects[i] == o) {
        used[i] = found = true;
        break;
      }
    if (!found) throw Error(Errc::illegal_edit, "object '" + o.desc + "' is not in the original scene");
  }
  std::vector<const SceneObject*> removed;
  for (std::size_t i = 0; i < before.objects.size(); ++i)
    if (!used[i]) removed.push_back(&before.objects[i]);

  const auto hit = matcher(before, prompt);
  std::vector<const SceneObject*> expected;
  for (std::size_t i = 0; i < before.objects.size(); ++i)
    if (hit[i]) expected.push_back(&before.objects[i]);

  if (removed.size() != expected.size()) return false;
  std::vector<bool> taken(expected.size(), false);
  for (const auto* r : removed) {
    bool ok = false;
    for (std::size_t k = 0; k < expected.size(); ++k)
      if (!taken[k] && *expected[k] == *r) {
        taken[k] = ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

}  // namespace ssrkit
