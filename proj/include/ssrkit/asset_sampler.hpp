#pragma once

// Stochastic 3D asset retrieval: blended semantic/size scores, then
// top-k, temperature softmax and nucleus filtering before a seeded draw.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace ssrkit {

inline constexpr double kUnitNormTolerance = 1e-6;
inline constexpr double kRenormalizeTolerance = 1e-3;

struct AssetEntry {
  std::string jid;
  std::string desc;
  std::vector<double> embedding;
  Vec3 size;
  std::optional<std::string> mesh_path;
};

struct Catalog {
  std::size_t dim = 0;
  std::vector<AssetEntry> assets;
};

/// Prompt text -> embedding, exact-match lookup.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>, std::less<>> vectors;

  const std::vector<double>& at(std::string_view key) const {
    auto it = vectors.find(key);
    if (it == vectors.end()) throw Error(Errc::missing_embedding, std::string(key));
    return it->second;
  }
  bool contains(std::string_view key) const { return vectors.find(key) != vectors.end(); }
};

struct SamplerConfig {
  double lambda = 0.5;
  double sigma = 0.2;
  double temperature = 0.2;
  double top_p = 0.95;
  std::size_t top_k = 20;
  std::uint64_t seed = 0;
};

struct AssetScore {
  std::string jid;
  double semantic = 0.0;
  double geometric = 0.0;
  double score = 0.0;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Checks unit norm; renormalizes within kRenormalizeTolerance with a
/// warning, otherwise throws bad_norm.
inline void check_unit(std::vector<double>& v, const std::string& what, std::ostream* warn) {
  const double n = std::sqrt(dot(v, v));
  if (std::abs(n - 1.0) <= kUnitNormTolerance) return;
  if (std::abs(n - 1.0) > kRenormalizeTolerance || n == 0.0)
    throw Error(Errc::bad_norm, what + " has norm " + std::to_string(n));
  if (warn) *warn << "warning: renormalized embedding of " << what << '\n';
  for (auto& x : v) x /= n;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(Errc::bad_format, "bad number '" + s + "' at " + where);
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size() || !std::isfinite(v)) throw Error(Errc::bad_format, "bad number '" + s + "' at " + where);
  return v;
}

inline std::vector<double> parse_vector(const std::string& s, const std::string& where) {
  std::istringstream in(s);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) v.push_back(parse_double(tok, where));
  return v;
}

/// Reads the `#dim=D` header if present; returns 0 otherwise.
inline std::size_t header_dim(const std::string& line) {
  if (line.rfind("#dim=", 0) != 0) return 0;
  try {
    return static_cast<std::size_t>(std::stoul(line.substr(5)));
  } catch (const std::exception&) {
    throw Error(Errc::bad_format, "bad #dim header");
  }
}

}  // namespace detail

/// Reads a catalog: optional `#dim=D` header, then one tab-separated record
/// per line: jid, desc, sx, sy, sz, embedding (whitespace-separated).
inline Catalog parse_catalog(std::istream& in, std::ostream* warn = &std::cerr) {
  Catalog cat;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto d = detail::header_dim(line)) cat.dim = d;
      continue;
    }
    const std::string where = "line " + std::to_string(lineno);
    auto fields = detail::split_tabs(line);
    if (fields.size() < 6) throw Error(Errc::bad_format, "expected 6 tab-separated fields at " + where);
    // Embedding components may themselves be tab-separated.
    std::string emb = fields[5];
    for (std::size_t i = 6; i < fields.size(); ++i) emb += " " + fields[i];
    AssetEntry e;
    e.jid = fields[0];
    e.desc = fields[1];
    e.size = {detail::parse_double(fields[2], where), detail::parse_double(fields[3], where),
              detail::parse_double(fields[4], where)};
    if (e.jid.empty()) throw Error(Errc::bad_format, "empty jid at " + where);
    if (e.size.x <= 0 || e.size.y <= 0 || e.size.z <= 0)
      throw Error(Errc::bad_format, "non-positive size at " + where);
    e.embedding = detail::parse_vector(emb, where);
    if (e.embedding.empty()) throw Error(Errc::bad_format, "missing embedding at " + where);
    if (cat.dim == 0) cat.dim = e.embedding.size();
    if (e.embedding.size() != cat.dim)
      throw Error(Errc::inconsistent_dimension, where + " has dimension " +
                                                    std::to_string(e.embedding.size()) + ", expected " +
                                                    std::to_string(cat.dim));
    detail::check_unit(e.embedding, e.jid, warn);
    cat.assets.push_back(std::move(e));
  }
  if (cat.assets.empty()) throw Error(Errc::bad_format, "catalog has no entries");
  return cat;
}

inline Catalog load_catalog(const std::string& path, std::ostream* warn = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return parse_catalog(in, warn);
}

/// Reads a text -> embedding table. Records are `key<TAB>components`, or the
/// full catalog layout with the key in the first column.
inline EmbeddingTable parse_embedding_table(std::istream& in, std::ostream* warn = &std::cerr) {
  EmbeddingTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto d = detail::header_dim(line)) t.dim = d;
      continue;
    }
    const std::string where = "line " + std::to_string(lineno);
    auto fields = detail::split_tabs(line);
    if (fields.size() < 2) throw Error(Errc::bad_format, "expected key and embedding at " + where);
    const std::size_t first = fields.size() >= 6 ? 5 : 1;
    std::string emb = fields[first];
    for (std::size_t i = first + 1; i < fields.size(); ++i) emb += " " + fields[i];
    auto v = detail::parse_vector(emb, where);
    if (v.empty()) throw Error(Errc::bad_format, "missing embedding at " + where);
    if (t.dim == 0) t.dim = v.size();
    if (v.size() != t.dim) throw Error(Errc::inconsistent_dimension, where);
    detail::check_unit(v, fields[0], warn);
    t.vectors[fields[0]] = std::move(v);
  }
  if (t.vectors.empty()) throw Error(Errc::bad_format, "embedding table has no entries");
  return t;
}

inline EmbeddingTable load_embedding_table(const std::string& path, std::ostream* warn = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return parse_embedding_table(in, warn);
}

inline bool score_order(const AssetScore& a, const AssetScore& b) {
  return a.score > b.score || (a.score == b.score && a.jid < b.jid);
}

/// score = lambda * <q, e_j> + (1 - lambda) * exp(-|s - s_j|^2 / (2 sigma^2)),
/// over the whole catalog, best first (ties by jid).
inline std::vector<AssetScore> score_assets(std::span<const double> query, const Vec3& target_size,
                                            const Catalog& catalog, const SamplerConfig& cfg = {}) {
  if (query.size() != catalog.dim)
    throw Error(Errc::dimension_mismatch, "query has dimension " + std::to_string(query.size()) +
                                              ", catalog " + std::to_string(catalog.dim));
  std::vector<AssetScore> out;
  out.reserve(catalog.assets.size());
  for (const auto& a : catalog.assets) {
    const Vec3 d = target_size - a.size;
    AssetScore s;
    s.jid = a.jid;
    s.semantic = detail::dot(query, a.embedding);
    s.geometric = std::exp(-dot(d, d) / (2.0 * cfg.sigma * cfg.sigma));
    s.score = cfg.lambda * s.semantic + (1.0 - cfg.lambda) * s.geometric;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), score_order);
  return out;
}

struct AssetProbability {
  std::string jid;
  double score = 0.0;
  double probability = 0.0;
};

/// Post-filter distribution: top-k by score, softmax(score / temperature),
/// smallest prefix reaching top_p, renormalized. Best first.
inline std::vector<AssetProbability> sampling_distribution(std::vector<AssetScore> scores,
                                                           const SamplerConfig& cfg = {}) {
  if (scores.empty()) throw Error(Errc::bad_format, "no scores to sample from");
  std::sort(scores.begin(), scores.end(), score_order);
  const std::size_t k = std::min(std::max<std::size_t>(cfg.top_k, 1), scores.size());
  std::vector<AssetProbability> dist(k);
  const double top = scores.front().score;
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    dist[i].jid = scores[i].jid;
    dist[i].score = scores[i].score;
    dist[i].probability = std::exp((scores[i].score - top) / cfg.temperature);
    z += dist[i].probability;
  }
  double cum = 0.0;
  std::size_t keep = k;
  for (std::size_t i = 0; i < k; ++i) {
    dist[i].probability /= z;
    cum += dist[i].probability;
    if (cum >= cfg.top_p && keep == k) keep = i + 1;
  }
  dist.resize(keep);
  double kept = 0.0;
  for (const auto& d : dist) kept += d.probability;
  for (auto& d : dist) d.probability /= kept;
  return dist;
}

inline std::string sample_from(const std::vector<AssetProbability>& dist, Rng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (const auto& d : dist) {
    cum += d.probability;
    if (u < cum) return d.jid;
  }
  return dist.back().jid;
}

/// Draws one jid from the filtered distribution with the config's seed.
inline std::string sample_asset(const std::vector<AssetScore>& scores, const SamplerConfig& cfg = {}) {
  const auto dist = sampling_distribution(scores, cfg);
  Rng rng(cfg.seed);
  return sample_from(dist, rng);
}

/// Argmax score; ties go to the lexicographically smallest jid.
inline std::string greedy_asset(const std::vector<AssetScore>& scores) {
  if (scores.empty()) throw Error(Errc::bad_format, "no scores to choose from");
  return std::min_element(scores.begin(), scores.end(), score_order)->jid;
}

}  // namespace ssrkit
