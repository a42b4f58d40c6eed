// ssrkit command-line front end.
//
// Exit codes: 0 success, 1 validation or metric failure, 2 input error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssrkit/ssrkit.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

struct Common {
  double voxel_size = 0.05;
  int padding = 2;
  std::string meshes;
  bool json = false;
  std::string manifest;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ssrkit::Error(ssrkit::Errc::io_error, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

/// Expands directories to their *.json files (sorted); files pass through.
std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      if (!fs::exists(p)) throw ssrkit::Error(ssrkit::Errc::io_error, "no such file " + p);
      out.push_back(p);
    }
  }
  return out;
}

ssrkit::VoxelConfig voxel_config(const Common& c) { return {c.voxel_size, c.padding}; }

ssrkit::MeshResolver resolver(const Common& c) {
  return c.meshes.empty() ? ssrkit::box_resolver() : ssrkit::directory_resolver(c.meshes);
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("SSRKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ssrkit::Error(ssrkit::Errc::bad_format, "SSRKIT_SEED is not an integer");
    }
  }
  return 0;
}

ssrkit::Vec3 parse_size(const std::string& s) {
  std::vector<double> v;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ssrkit::Error(ssrkit::Errc::bad_format, "bad size component '" + tok + "'");
    }
  }
  if (v.size() != 3) throw ssrkit::Error(ssrkit::Errc::bad_format, "--size expects x,y,z");
  return {v[0], v[1], v[2]};
}

/// Runs fn(i) for i in [0, n) with up to `jobs` threads, returning results
/// in index order.
template <class Fn>
auto parallel_map(std::size_t n, unsigned jobs, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out;
  out.reserve(n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  for (std::size_t base = 0; base < n; base += jobs) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = base; i < std::min(n, base + jobs); ++i)
      batch.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

class Manifest {
 public:
  Manifest(std::string command, const Common& c) : command_(std::move(command)), common_(c) {
    start_ = std::chrono::steady_clock::now();
  }
  ordered_json config = ordered_json::object();
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;

  void emit() const {
    ordered_json j;
    j["command"] = command_;
    ordered_json cfg = config;
    cfg["voxel_size"] = common_.voxel_size;
    cfg["padding"] = common_.padding;
    if (!common_.meshes.empty()) cfg["meshes"] = common_.meshes;
    j["config"] = cfg;
    j["inputs"] = inputs;
    if (seed) j["seed"] = *seed;
    else j["seed"] = nullptr;
    j["tool_version"] = ssrkit::kVersion;
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (common_.manifest.empty()) {
      std::cerr << "manifest: " << j.dump() << '\n';
    } else {
      std::ofstream out(common_.manifest);
      out << j.dump(2) << '\n';
    }
  }

 private:
  std::string command_;
  const Common& common_;
  std::chrono::steady_clock::time_point start_;
};

void print_json(const ordered_json& j, bool line) { std::cout << (line ? j.dump() : j.dump(2)) << '\n'; }

// ---------------------------------------------------------------------------

int run_validate(const Common& c, const std::vector<std::string>& paths) {
  Manifest m("validate", c);
  const auto files = expand_inputs(paths);
  m.inputs = files;
  ssrkit::ParseOptions opts;
  opts.check_bounds = false;
  struct Row {
    ssrkit::SceneValidity v;
    std::string error;
  };
  auto rows = parallel_map(files.size(), c.jobs, [&](std::size_t i) {
    const ssrkit::Scene scene = ssrkit::parse_ssr(read_file(files[i]), opts);
    return Row{ssrkit::validate_scene(scene, resolver(c), voxel_config(c)), {}};
  });

  std::size_t valid = 0, rescued = 0;
  std::map<std::string, std::size_t> reasons;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& v = rows[i].v;
    if (v.is_valid) ++valid;
    if (v.reason == ssrkit::ValidityReason::rescued) ++rescued;
    if (!v.is_valid) ++reasons[ssrkit::to_string(v.reason)];
    if (c.json) {
      ordered_json j;
      j["path"] = files[i];
      const auto vj = ssrkit::to_json(v);
      for (auto it = vj.begin(); it != vj.end(); ++it) j[it.key()] = it.value();
      std::cout << j.dump() << '\n';
    } else {
      std::cout << files[i] << ": " << (v.is_valid ? "valid" : "invalid") << " (" << ssrkit::to_string(v.reason);
      if (v.rescued_index) std::cout << ", rescued_index=" << *v.rescued_index;
      std::cout << ")\n";
    }
  }
  std::cerr << files.size() << " scenes: " << valid << " valid (" << rescued << " rescued), "
            << files.size() - valid << " invalid";
  for (const auto& [r, n] : reasons) std::cerr << ", " << r << "=" << n;
  std::cerr << '\n';
  m.emit();
  return valid == files.size() ? kExitOk : kExitFailure;
}

int run_vbl(const Common& c, const std::string& scene_path, const std::string& before_path,
            bool no_early_stop) {
  Manifest m("vbl", c);
  m.inputs = {scene_path};
  m.config["early_stop"] = !no_early_stop;
  const auto scene = ssrkit::parse_ssr(read_file(scene_path));
  auto report = ssrkit::compute_vbl(scene, resolver(c), voxel_config(c), {!no_early_stop});
  ordered_json j = ssrkit::to_json(report);
  if (!before_path.empty()) {
    m.inputs.push_back(before_path);
    const auto before = ssrkit::parse_ssr(read_file(before_path));
    j["delta_vbl"] = ssrkit::delta_vbl(before, scene, resolver(c), voxel_config(c));
  }
  print_json(j, c.json);
  m.emit();
  return kExitOk;
}

int run_extract_bounds(const Common& c, const std::string& mesh_path) {
  Manifest m("extract-bounds", c);
  m.inputs = {mesh_path};
  const auto poly = ssrkit::extract_corners(ssrkit::load_obj(mesh_path));
  ordered_json top = ordered_json::array(), bottom = ordered_json::array();
  for (const auto& p : poly.corners) {
    top.push_back({p.x, poly.y_ceiling, p.z});
    bottom.push_back({p.x, poly.y_floor, p.z});
  }
  ordered_json j;
  j["bounds_top"] = std::move(top);
  j["bounds_bottom"] = std::move(bottom);
  print_json(j, c.json);
  m.emit();
  return kExitOk;
}

int run_sample_asset(const Common& c, const std::string& prompt, const std::string& queries,
                     const std::string& size, const std::string& catalog_path, bool greedy,
                     ssrkit::SamplerConfig cfg) {
  Manifest m("sample-asset", c);
  m.inputs = {catalog_path, queries};
  const auto catalog = ssrkit::load_catalog(catalog_path);
  const auto table = ssrkit::load_embedding_table(queries);
  const auto scores = ssrkit::score_assets(table.at(prompt), parse_size(size), catalog, cfg);
  m.config = {{"prompt", prompt}, {"size", size},         {"greedy", greedy},
              {"lambda", cfg.lambda}, {"sigma", cfg.sigma}, {"temperature", cfg.temperature},
              {"top_p", cfg.top_p}, {"top_k", cfg.top_k}};

  ordered_json j;
  ordered_json breakdown = ordered_json::array();
  auto row = [](const ssrkit::AssetScore& s) {
    return ordered_json{{"jid", s.jid}, {"semantic", s.semantic}, {"geometric", s.geometric}, {"score", s.score}};
  };
  if (greedy) {
    j["jid"] = ssrkit::greedy_asset(scores);
    j["mode"] = "greedy";
    for (std::size_t i = 0; i < std::min(scores.size(), cfg.top_k); ++i) breakdown.push_back(row(scores[i]));
  } else {
    cfg.seed = resolve_seed(c);
    m.seed = cfg.seed;
    j["jid"] = ssrkit::sample_asset(scores, cfg);
    j["mode"] = "sample";
    j["seed"] = cfg.seed;
    const auto dist = ssrkit::sampling_distribution(scores, cfg);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      auto r = row(scores[i]);
      r["probability"] = dist[i].probability;
      breakdown.push_back(std::move(r));
    }
  }
  j["breakdown"] = std::move(breakdown);
  print_json(j, c.json);
  m.emit();
  return kExitOk;
}

int run_reward(const Common& c, const std::string& scene_path, const std::string& prompt,
               const std::string& gt_path, const std::string& embeddings, const std::string& candidates,
               const ssrkit::RewardConfig& rcfg) {
  Manifest m("reward", c);
  m.inputs = {scene_path, gt_path, embeddings, candidates};
  m.config = {{"prompt", prompt},         {"pms_min", rcfg.pms_min},
              {"dss_min", rcfg.dss_min},  {"vbl_max", rcfg.vbl_max},
              {"size_l2_max", rcfg.size_l2_max}, {"invalid_reward", rcfg.invalid_reward},
              {"pass_reward", rcfg.pass_reward}};
  const auto scene = ssrkit::parse_ssr(read_file(scene_path));
  const auto gt_doc = ordered_json::parse(read_file(gt_path), nullptr, false);
  if (gt_doc.is_discarded()) throw ssrkit::Error(ssrkit::Errc::malformed_document, gt_path);
  const auto gt = ssrkit::object_from_json(gt_doc, "$");
  const auto table = ssrkit::load_embedding_table(embeddings);
  const auto lines = read_lines(candidates);

  ssrkit::RewardContext ctx{&scene, prompt, &gt, &table, resolver(c), rcfg, voxel_config(c)};
  auto outcomes = parallel_map(lines.size(), c.jobs,
                               [&](std::size_t i) { return ssrkit::score_candidate(lines[i], ctx); });
  for (const auto& o : outcomes) std::cout << ssrkit::to_json(o).dump() << '\n';
  m.emit();
  return kExitOk;
}

int run_bon(const Common& c, const std::string& scene_path, const std::string& prompt,
            const std::string& candidates, std::size_t n) {
  Manifest m("bon", c);
  m.inputs = {scene_path, candidates};
  m.config = {{"prompt", prompt}, {"n", n}};
  const auto scene = ssrkit::parse_ssr(read_file(scene_path));
  auto lines = read_lines(candidates);
  if (n > 0 && lines.size() > n) lines.resize(n);
  const auto meshes = resolver(c);
  auto cands = parallel_map(lines.size(), c.jobs, [&](std::size_t i) {
    return ssrkit::bon_metrics(lines[i], scene, prompt, meshes, voxel_config(c));
  });
  int rc = kExitOk;
  try {
    const auto pick = ssrkit::best_of_n(cands);
    ordered_json j;
    j["index"] = pick;
    j["pms"] = cands[pick].pms;
    j["delta_vbl"] = cands[pick].delta_vbl;
    j["candidate"] = ssrkit::object_to_json(std::get<ssrkit::SceneObject>(ssrkit::parse_candidate_object(lines[pick])));
    print_json(j, c.json);
  } catch (const ssrkit::Error& e) {
    if (e.code() != ssrkit::Errc::all_invalid) throw;
    std::cerr << "error: " << e.what() << '\n';
    rc = kExitFailure;
  }
  m.emit();
  return rc;
}

int run_gen_instructions(const Common& c, const std::vector<std::string>& paths, const std::string& bank_path,
                         std::size_t count, bool do_augment) {
  Manifest m("gen-instructions", c);
  const auto files = expand_inputs(paths);
  m.inputs = files;
  m.inputs.push_back(bank_path);
  const std::uint64_t seed = resolve_seed(c);
  m.seed = seed;
  m.config = {{"count", count}, {"augment", do_augment}};
  const auto bank = ssrkit::load_prompt_bank(bank_path);
  for (std::size_t s = 0; s < files.size(); ++s) {
    const auto scene = ssrkit::parse_ssr(read_file(files[s]));
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint64_t item_seed = ssrkit::derive_seed(seed, s, k);
      const auto source = do_augment ? ssrkit::augment(scene, ssrkit::derive_seed(item_seed, 1)) : scene;
      const auto instr = ssrkit::gen_instruction(source, bank, item_seed);
      std::cout << ssrkit::to_json(instr).dump() << '\n';
    }
  }
  m.emit();
  return kExitOk;
}

int run_commands(const Common& c, const std::string& path) {
  Manifest m("commands", c);
  m.inputs = {path};
  int rc = kExitOk;
  try {
    const auto list = ssrkit::parse_commands(read_file(path));
    ordered_json j;
    if (list.reasoning) j["reasoning"] = *list.reasoning;
    ordered_json arr = ordered_json::array();
    for (const auto& cmd : list.commands)
      arr.push_back({{"kind", cmd.kind == ssrkit::CommandKind::add ? "add" : "remove"},
                     {"description", cmd.description}});
    j["commands"] = std::move(arr);
    j["order_warning"] = list.order_warning;
    print_json(j, c.json);
  } catch (const ssrkit::Error& e) {
    if (e.code() != ssrkit::Errc::no_commands && e.code() != ssrkit::Errc::malformed_tag) throw;
    std::cerr << "error: " << e.what() << '\n';
    rc = kExitFailure;
  }
  m.emit();
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssrkit: structured scene evaluation, editing and reward tools"};
  app.set_version_flag("--version", ssrkit::kVersion);
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--voxel-size", common.voxel_size, "Voxel edge length in meters")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--padding", common.padding, "Lattice padding in voxels")->capture_default_str();
    sub->add_option("--meshes", common.meshes, "Directory of <jid>.obj meshes")->check(CLI::ExistingDirectory);
    sub->add_flag("--json", common.json, "Line-delimited JSON output");
    sub->add_option("--manifest", common.manifest, "Write the run manifest here (default: stderr)");
    sub->add_option("--jobs", common.jobs, "Parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
  };

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Apply the dataset validity filter");
  validate->add_option("paths", validate_paths, "Scene files or directories")->required();
  add_common(validate);

  std::string vbl_scene, vbl_before;
  bool no_early_stop = false;
  auto* vbl = app.add_subcommand("vbl", "Voxel-based layout violations of a scene");
  vbl->add_option("scene", vbl_scene, "Scene file")->required();
  vbl->add_option("--before", vbl_before, "Scene before a single insertion; adds delta_vbl");
  vbl->add_flag("--no-early-stop", no_early_stop, "Disable the 2D overlap early stop");
  add_common(vbl);

  std::string bounds_mesh;
  auto* bounds = app.add_subcommand("extract-bounds", "Corner polygon of a room mesh as SSR bounds");
  bounds->add_option("mesh", bounds_mesh, "Room mesh (.obj)")->required();
  add_common(bounds);

  std::string sa_prompt, sa_queries, sa_size, sa_catalog;
  bool sa_greedy = false;
  ssrkit::SamplerConfig sa_cfg;
  auto* sample = app.add_subcommand("sample-asset", "Retrieve an asset for a description and size");
  sample->add_option("--prompt", sa_prompt, "Description text (looked up in --queries)")->required();
  sample->add_option("--queries", sa_queries, "Query-embedding file")->required();
  sample->add_option("--size", sa_size, "Target size x,y,z in meters")->required();
  sample->add_option("--catalog", sa_catalog, "Asset catalog file")->required();
  sample->add_flag("--greedy", sa_greedy, "Take the argmax instead of sampling");
  sample->add_option("--seed", common.seed, "Sampling seed (falls back to SSRKIT_SEED)");
  sample->add_option("--lambda", sa_cfg.lambda)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sample->add_option("--sigma", sa_cfg.sigma)->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--temperature", sa_cfg.temperature)->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--top-p", sa_cfg.top_p)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sample->add_option("--top-k", sa_cfg.top_k)->capture_default_str()->check(CLI::PositiveNumber);
  add_common(sample);

  std::string rw_scene, rw_prompt, rw_gt, rw_emb, rw_cands;
  ssrkit::RewardConfig rw_cfg;
  auto* reward = app.add_subcommand("reward", "Verifiable reward per candidate line");
  reward->add_option("--scene", rw_scene, "Partial scene")->required();
  reward->add_option("--prompt", rw_prompt, "Object prompt")->required();
  reward->add_option("--gt", rw_gt, "Ground-truth object JSON")->required();
  reward->add_option("--embeddings", rw_emb, "Description embedding table")->required();
  reward->add_option("candidates", rw_cands, "One candidate JSON per line")->required();
  reward->add_option("--pms-min", rw_cfg.pms_min)->capture_default_str();
  reward->add_option("--dss-min", rw_cfg.dss_min)->capture_default_str();
  reward->add_option("--vbl-max", rw_cfg.vbl_max)->capture_default_str();
  reward->add_option("--size-l2-max", rw_cfg.size_l2_max)->capture_default_str();
  reward->add_option("--invalid-reward", rw_cfg.invalid_reward)->capture_default_str();
  reward->add_option("--pass-reward", rw_cfg.pass_reward)->capture_default_str();
  add_common(reward);

  std::string bon_scene, bon_prompt, bon_cands;
  std::size_t bon_n = 0;
  auto* bon = app.add_subcommand("bon", "Best-of-N selection: highest PMS, then lowest delta VBL");
  bon->add_option("--scene", bon_scene, "Partial scene")->required();
  bon->add_option("--prompt", bon_prompt, "Object prompt")->required();
  bon->add_option("candidates", bon_cands, "One candidate JSON per line")->required();
  bon->add_option("--n", bon_n, "Consider only the first N candidates (0 = all)");
  add_common(bon);

  std::vector<std::string> gi_paths;
  std::string gi_bank;
  std::size_t gi_count = 1;
  bool gi_augment = false;
  auto* gen = app.add_subcommand("gen-instructions", "Draw instruction tuples from scenes");
  gen->add_option("scenes", gi_paths, "Scene files or directories")->required();
  gen->add_option("--bank", gi_bank, "Prompt bank JSON")->required();
  gen->add_option("--count", gi_count, "Instructions per scene")->capture_default_str();
  gen->add_option("--seed", common.seed, "Seed (falls back to SSRKIT_SEED)");
  gen->add_flag("--augment", gi_augment, "Augment each scene before drawing");
  add_common(gen);

  std::string cmd_path = "-";
  auto* cmds = app.add_subcommand("commands", "Parse an <add>/<remove> command response");
  cmds->add_option("input", cmd_path, "Response file, or - for stdin")->capture_default_str();
  add_common(cmds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validate) return run_validate(common, validate_paths);
    if (*vbl) return run_vbl(common, vbl_scene, vbl_before, no_early_stop);
    if (*bounds) return run_extract_bounds(common, bounds_mesh);
    if (*sample) return run_sample_asset(common, sa_prompt, sa_queries, sa_size, sa_catalog, sa_greedy, sa_cfg);
    if (*reward) return run_reward(common, rw_scene, rw_prompt, rw_gt, rw_emb, rw_cands, rw_cfg);
    if (*bon) return run_bon(common, bon_scene, bon_prompt, bon_cands, bon_n);
    if (*gen) return run_gen_instructions(common, gi_paths, gi_bank, gi_count, gi_augment);
    if (*cmds) return run_commands(common, cmd_path);
  } catch (const ssrkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
