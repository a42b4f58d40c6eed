#pragma once

// Verifiable reward for single-object additions.

#include <optional>
#include <string>
#include <string_view>

#include "asset_sampler.hpp"
#include "commands.hpp"
#include "metrics.hpp"
#include "scene_ops.hpp"
#include "vbl.hpp"

namespace ssrkit {

struct RewardConfig {
  double pms_min = 0.85;
  double dss_min = 0.9;
  double vbl_max = 1e-5;      // exclusive, on delta vbl_norm
  double size_l2_max = 0.2;   // exclusive, Euclidean size error in meters
  double invalid_reward = -1.0;
  double pass_reward = 1.0;
};

enum class RewardStatus { invalid_output, pass, fail_filter_masked };

inline const char* to_string(RewardStatus s) {
  switch (s) {
    case RewardStatus::invalid_output: return "invalid_output";
    case RewardStatus::pass: return "pass";
    case RewardStatus::fail_filter_masked: return "fail_filter_masked";
  }
  return "invalid_output";
}

struct RewardComponents {
  double pms = 0.0;
  double dss = 0.0;
  double vbl_norm = 0.0;  // delta of the insertion
  double size_l2 = 0.0;
  bool operator==(const RewardComponents&) const = default;
};

/// Filtered-out candidates keep reward 0 with `masked` set so groups keep
/// their size for advantage computation.
struct RewardOutcome {
  double reward = 0.0;
  RewardStatus status = RewardStatus::invalid_output;
  bool masked = false;
  std::optional<RewardComponents> components;
  std::optional<SceneObject> candidate;
  std::string invalid_reason;
};

struct RewardContext {
  const Scene* scene = nullptr;
  std::string prompt;
  const SceneObject* gt_object = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  MeshResolver meshes = box_resolver();
  RewardConfig cfg;
  VoxelConfig vox;
};

inline RewardOutcome score_candidate(std::string_view candidate_text, const RewardContext& ctx) {
  RewardOutcome out;
  auto parsed = parse_candidate_object(candidate_text);
  if (auto* bad = std::get_if<InvalidOutput>(&parsed)) {
    out.reward = ctx.cfg.invalid_reward;
    out.status = RewardStatus::invalid_output;
    out.invalid_reason = std::string(to_string(bad->reason)) + ": " + bad->message;
    return out;
  }
  const SceneObject& cand = std::get<SceneObject>(parsed);
  const SceneObject& gt = *ctx.gt_object;

  RewardComponents c;
  c.pms = pms(ctx.prompt, cand.desc);
  c.dss = dss(ctx.embeddings->at(gt.desc), ctx.embeddings->at(cand.desc));
  c.vbl_norm = delta_vbl(*ctx.scene, add_object(*ctx.scene, cand), ctx.meshes, ctx.vox);
  c.size_l2 = norm(gt.size - cand.size);

  const bool pass = c.pms >= ctx.cfg.pms_min && c.dss >= ctx.cfg.dss_min &&
                    c.vbl_norm < ctx.cfg.vbl_max && c.size_l2 < ctx.cfg.size_l2_max;
  out.status = pass ? RewardStatus::pass : RewardStatus::fail_filter_masked;
  out.reward = pass ? ctx.cfg.pass_reward : 0.0;
  out.masked = !pass;
  out.components = c;
  out.candidate = cand;
  return out;
}

inline nlohmann::ordered_json to_json(const RewardOutcome& r) {
  nlohmann::ordered_json j;
  j["reward"] = r.reward;
  j["status"] = to_string(r.status);
  j["masked"] = r.masked;
  if (r.components) {
    j["components"] = {{"pms", r.components->pms},
                       {"dss", r.components->dss},
                       {"vbl_norm", r.components->vbl_norm},
                       {"size_l2", r.components->size_l2}};
  }
  if (r.status == RewardStatus::invalid_output) j["reason"] = r.invalid_reason;
  return j;
}

/// PMS and insertion delta VBL of a raw candidate, for Best-of-N without a
/// ground-truth object.
inline BonCandidate bon_metrics(std::string_view candidate_text, const Scene& scene,
                                std::string_view prompt, const MeshResolver& meshes,
                                const VoxelConfig& vox = {}) {
  auto parsed = parse_candidate_object(candidate_text);
  const auto* cand = std::get_if<SceneObject>(&parsed);
  if (cand == nullptr) return {};
  return {true, pms(prompt, cand->desc), delta_vbl(scene, add_object(scene, *cand), meshes, vox)};
}

inline BonCandidate to_bon(const RewardOutcome& r) {
  if (r.status == RewardStatus::invalid_output || !r.components) return {};
  return {true, r.components->pms, r.components->vbl_norm};
}

}  // namespace ssrkit
