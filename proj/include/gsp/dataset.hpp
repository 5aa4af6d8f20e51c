#pragma once

// Manifest-rooted datasets on disk: NPY matrices, label CSV, JSON metadata.
// Relative paths inside a manifest resolve against the manifest's directory.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsp/error.hpp"
#include "gsp/labels.hpp"
#include "gsp/matrix.hpp"
#include "gsp/npy.hpp"
#include "gsp/pipeline.hpp"
#include "gsp/prompt_bank.hpp"

namespace gsp {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct DatasetManifest {
  fs::path root;  // directory the relative paths resolve against
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<fs::path> prompt_files;  // one NPY per class
  fs::path prompt_stack;               // or one stacked NPY ...
  fs::path prompt_boundaries;          // ... plus {"offsets": [...]} sidecar
  fs::path prototype_matrix;           // precomputed prototypes (alternative to prompts)
  fs::path prototype_class_map;
  fs::path templates;  // provenance only
  fs::path labeled;
  fs::path labels;
  fs::path unlabeled;
  fs::path ground_truth;

  [[nodiscard]] fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : root / p; }
};

namespace detail {

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline fs::path opt_path(const json& j, const char* key) {
  return j.contains(key) && !j.at(key).is_null() ? fs::path(j.at(key).get<std::string>()) : fs::path{};
}

inline void require_file(const DatasetManifest& m, const fs::path& p, const char* field) {
  if (p.empty()) return;
  if (!fs::exists(m.resolve(p))) {
    throw MissingFile("manifest field '" + std::string(field) + "' refers to missing file '" + m.resolve(p).string() + "'");
  }
}

}  // namespace detail

inline DatasetManifest manifest_from_json(const json& j, const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    m.num_classes = j.at("num_classes").get<int>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    if (j.contains("prompts")) {
      const auto& p = j.at("prompts");
      if (p.contains("per_class")) {
        for (const auto& s : p.at("per_class")) m.prompt_files.emplace_back(s.get<std::string>());
      } else {
        m.prompt_stack = p.at("stacked").get<std::string>();
        m.prompt_boundaries = p.at("boundaries").get<std::string>();
      }
    }
    if (j.contains("prototypes")) {
      m.prototype_matrix = j.at("prototypes").at("matrix").get<std::string>();
      m.prototype_class_map = j.at("prototypes").at("class_map").get<std::string>();
    }
    m.templates = detail::opt_path(j, "templates");
    m.labeled = detail::opt_path(j, "labeled");
    m.labels = detail::opt_path(j, "labels");
    m.unlabeled = j.at("unlabeled").get<std::string>();
    m.ground_truth = detail::opt_path(j, "ground_truth");
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid manifest: ") + e.what());
  }
  if (m.num_classes <= 0) throw FormatError("invalid manifest: num_classes must be positive");
  if (m.class_names.size() != static_cast<std::size_t>(m.num_classes)) {
    throw FormatError("invalid manifest: class_names has " + std::to_string(m.class_names.size()) +
                      " entries, num_classes is " + std::to_string(m.num_classes));
  }
  const bool has_prompts = !m.prompt_files.empty() || !m.prompt_stack.empty();
  if (!has_prompts && m.prototype_matrix.empty()) {
    throw FormatError("invalid manifest: needs 'prompts' or 'prototypes'");
  }
  if (!m.prompt_files.empty() && m.prompt_files.size() != static_cast<std::size_t>(m.num_classes)) {
    throw FormatError("invalid manifest: prompts.per_class lists " + std::to_string(m.prompt_files.size()) +
                      " files for " + std::to_string(m.num_classes) + " classes");
  }
  if (m.labeled.empty() != m.labels.empty()) {
    throw FormatError("invalid manifest: 'labeled' and 'labels' must be given together");
  }
  for (const auto& p : m.prompt_files) detail::require_file(m, p, "prompts.per_class");
  detail::require_file(m, m.prompt_stack, "prompts.stacked");
  detail::require_file(m, m.prompt_boundaries, "prompts.boundaries");
  detail::require_file(m, m.prototype_matrix, "prototypes.matrix");
  detail::require_file(m, m.prototype_class_map, "prototypes.class_map");
  detail::require_file(m, m.templates, "templates");
  detail::require_file(m, m.labeled, "labeled");
  detail::require_file(m, m.labels, "labels");
  detail::require_file(m, m.unlabeled, "unlabeled");
  detail::require_file(m, m.ground_truth, "ground_truth");
  return m;
}

inline DatasetManifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw MissingFile("manifest not found: '" + path.string() + "'");
  return manifest_from_json(detail::read_json_file(path), path.parent_path());
}

inline json manifest_to_json(const DatasetManifest& m) {
  json j;
  j["num_classes"] = m.num_classes;
  j["class_names"] = m.class_names;
  if (!m.prompt_files.empty()) {
    json files = json::array();
    for (const auto& p : m.prompt_files) files.push_back(p.generic_string());
    j["prompts"] = {{"per_class", files}};
  } else if (!m.prompt_stack.empty()) {
    j["prompts"] = {{"stacked", m.prompt_stack.generic_string()}, {"boundaries", m.prompt_boundaries.generic_string()}};
  }
  if (!m.prototype_matrix.empty()) {
    j["prototypes"] = {{"matrix", m.prototype_matrix.generic_string()},
                       {"class_map", m.prototype_class_map.generic_string()}};
  }
  auto put = [&](const char* key, const fs::path& p) {
    if (!p.empty()) j[key] = p.generic_string();
  };
  put("templates", m.templates);
  put("labeled", m.labeled);
  put("labels", m.labels);
  put("unlabeled", m.unlabeled);
  put("ground_truth", m.ground_truth);
  return j;
}

/// Load and unit-normalize one embedding file.
inline EmbeddingMatrix load_normalized(const fs::path& path) {
  try {
    return l2_normalize(npy::load_matrix(path));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

/// Split a stacked (C*T, d) prompt matrix by an {"offsets": [0, T, 2T, ...]} sidecar.
inline PromptPool load_prompt_pool_stacked(const fs::path& matrix_path, const fs::path& boundaries_path) {
  const auto all = load_normalized(matrix_path);
  const auto j = detail::read_json_file(boundaries_path);
  std::vector<std::size_t> offsets;
  try {
    offsets = j.at("offsets").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw FormatError("invalid class-boundary sidecar '" + boundaries_path.string() + "': " + e.what());
  }
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != all.count()) {
    throw FormatError("class-boundary offsets must start at 0 and end at the row count " +
                      std::to_string(all.count()));
  }
  PromptPool pool;
  for (std::size_t c = 0; c + 1 < offsets.size(); ++c) {
    if (offsets[c + 1] <= offsets[c]) throw FormatError("class-boundary offsets must be strictly increasing");
    pool.per_class.push_back(all.slice(offsets[c], offsets[c + 1] - offsets[c]));
  }
  pool.validate();
  return pool;
}

inline PromptPool load_prompt_pool(const std::vector<fs::path>& per_class) {
  PromptPool pool;
  for (const auto& p : per_class) pool.per_class.push_back(load_normalized(p));
  pool.validate();
  return pool;
}

inline json prototype_class_map_json(const PrototypeSet& set, const std::vector<std::string>& class_names = {}) {
  json j;
  j["clusters_per_class"] = set.clusters_per_class;
  j["class_of"] = set.class_of;
  if (!class_names.empty()) j["class_names"] = class_names;
  return j;
}

inline void save_prototypes(const PrototypeSet& set, const fs::path& matrix_path, const fs::path& class_map_path,
                            const std::vector<std::string>& class_names = {}) {
  npy::save_matrix(set.vectors, matrix_path);
  detail::write_text_file(class_map_path, prototype_class_map_json(set, class_names).dump(2) + "\n");
}

inline PrototypeSet load_prototypes(const fs::path& matrix_path, const fs::path& class_map_path, int num_classes) {
  PrototypeSet set;
  set.vectors = load_normalized(matrix_path);
  const auto j = detail::read_json_file(class_map_path);
  try {
    set.class_of = j.at("class_of").get<std::vector<int>>();
    set.clusters_per_class = j.value("clusters_per_class", std::size_t{1});
  } catch (const json::exception& e) {
    throw FormatError("invalid prototype class map '" + class_map_path.string() + "': " + e.what());
  }
  if (set.class_of.size() != set.vectors.count()) {
    throw FormatError("prototype class map lists " + std::to_string(set.class_of.size()) + " entries for " +
                      std::to_string(set.vectors.count()) + " prototypes");
  }
  for (int c : set.class_of) {
    if (c < 0 || c >= num_classes) throw FormatError("prototype class " + std::to_string(c) + " out of range");
  }
  return set;
}

/// Flags vector: nonzero = in-distribution.
inline std::vector<bool> load_flags(const fs::path& path) {
  const auto v = npy::load_vector(path);
  std::vector<bool> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0.0;
  return out;
}

inline void save_flags(const std::vector<bool>& flags, const fs::path& path) {
  std::vector<double> v(flags.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = flags[i] ? 1.0 : 0.0;
  npy::save_vector(v, path);
}

/// Load every referenced file, normalize embeddings and cross-check shapes.
inline Dataset load_dataset(const DatasetManifest& m) {
  Dataset ds;
  ds.class_names = m.class_names;
  if (!m.prompt_files.empty()) {
    std::vector<fs::path> files;
    for (const auto& p : m.prompt_files) files.push_back(m.resolve(p));
    ds.pool = load_prompt_pool(files);
  } else if (!m.prompt_stack.empty()) {
    ds.pool = load_prompt_pool_stacked(m.resolve(m.prompt_stack), m.resolve(m.prompt_boundaries));
  }
  if (ds.pool && ds.pool->num_classes() != static_cast<std::size_t>(m.num_classes)) {
    throw FormatError("prompt pool has " + std::to_string(ds.pool->num_classes()) + " classes, manifest says " +
                      std::to_string(m.num_classes));
  }
  if (!m.prototype_matrix.empty()) {
    ds.prototypes = load_prototypes(m.resolve(m.prototype_matrix), m.resolve(m.prototype_class_map), m.num_classes);
  }
  ds.unlabeled = load_normalized(m.resolve(m.unlabeled));
  const std::size_t d = ds.unlabeled.dim();
  if (ds.pool && ds.pool->dim() != d) throw FormatError("prompt dim differs from unlabeled dim");
  if (ds.prototypes && ds.prototypes->vectors.dim() != d) throw FormatError("prototype dim differs from unlabeled dim");
  if (!m.labeled.empty()) {
    ds.labeled = load_normalized(m.resolve(m.labeled));
    if (ds.labeled.dim() != d) throw FormatError("labeled dim differs from unlabeled dim");
    ds.labels = load_labels(m.resolve(m.labels), ds.labeled, m.num_classes);
  }
  if (!m.ground_truth.empty()) {
    ds.is_id = load_flags(m.resolve(m.ground_truth));
    if (ds.is_id->size() != ds.unlabeled.count()) {
      throw FormatError("ground truth has " + std::to_string(ds.is_id->size()) + " flags for " +
                        std::to_string(ds.unlabeled.count()) + " unlabeled samples");
    }
  }
  return ds;
}

}  // namespace gsp
