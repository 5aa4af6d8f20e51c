#pragma once

// Subcommand implementations behind the `gsp` command-line tool. Each
// command loads and computes everything in memory first and only then
// writes its outputs, so a failing run leaves no partial artifacts.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsp/dataset.hpp"
#include "gsp/error.hpp"
#include "gsp/metrics.hpp"
#include "gsp/npy.hpp"
#include "gsp/pipeline.hpp"
#include "gsp/synth.hpp"

namespace gsp::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunConfig {
  fs::path manifest;
  std::vector<Method> methods = {Method::gsp};
  std::size_t k = 10;
  std::size_t clusters = 3;
  double alpha = 0.5;
  std::size_t iterations = 5;
  double m_percent = 5.0;
  double tau = 1.0;
  double epsilon = 1e-9;
  double weight_exponent = 1.0;
  bool damped = false;
  std::uint64_t seed = 0;
  fs::path out = "out";

  [[nodiscard]] MethodConfig method_config() const {
    MethodConfig mc;
    mc.graph.k = k;
    mc.graph.weight_exponent = weight_exponent;
    mc.propagation.alpha = alpha;
    mc.propagation.iterations = iterations;
    mc.propagation.m_percent = m_percent;
    mc.propagation.damped_variant = damped;
    mc.baseline.temperature = tau;
    mc.baseline.epsilon = epsilon;
    mc.clusters = clusters;
    mc.seed = seed;
    return mc;
  }
};

/// "gsp", "cosine,gsp" or "all".
inline std::vector<Method> parse_method_list(const std::string& text) {
  if (text == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw InvalidArgument("no method given");
  return out;
}

inline json to_json(const RunConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(std::string(to_string(m)));
  return {{"manifest", c.manifest.generic_string()},
          {"method", methods},
          {"k", c.k},
          {"clusters", c.clusters},
          {"alpha", c.alpha},
          {"iters", c.iterations},
          {"m_percent", c.m_percent},
          {"tau", c.tau},
          {"epsilon", c.epsilon},
          {"weight_exponent", c.weight_exponent},
          {"damped", c.damped},
          {"seed", c.seed},
          {"out", c.out.generic_string()}};
}

/// Fields absent from the JSON keep their defaults. A relative manifest
/// path resolves against `base_dir` (the config file's directory).
inline RunConfig run_config_from_json(const json& j, const fs::path& base_dir = {}) {
  RunConfig c;
  try {
    if (j.contains("manifest")) {
      fs::path p = j.at("manifest").get<std::string>();
      c.manifest = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    if (j.contains("method")) {
      const auto& m = j.at("method");
      if (m.is_array()) {
        c.methods.clear();
        for (const auto& x : m) c.methods.push_back(parse_method(x.get<std::string>()));
      } else {
        c.methods = parse_method_list(m.get<std::string>());
      }
    }
    c.k = j.value("k", c.k);
    c.clusters = j.value("clusters", c.clusters);
    c.alpha = j.value("alpha", c.alpha);
    c.iterations = j.value("iters", c.iterations);
    c.m_percent = j.value("m_percent", c.m_percent);
    c.tau = j.value("tau", c.tau);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.weight_exponent = j.value("weight_exponent", c.weight_exponent);
    c.damped = j.value("damped", c.damped);
    c.seed = j.value("seed", c.seed);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid run config: ") + e.what());
  }
  return c;
}

inline json read_json(const fs::path& path) { return gsp::detail::read_json_file(path); }

// ---------------------------------------------------------------- score

inline json diagnostics_json(const MethodResult& r, const RunConfig& cfg) {
  json j;
  j["method"] = std::string(to_string(r.method));
  j["config"] = to_json(cfg);
  j["n_unlabeled"] = r.scores.size();
  j["n_prototypes"] = r.n_prototypes;
  if (r.gsp) {
    const auto& g = *r.gsp;
    const auto& p = g.first_pass.partition;
    auto local = [&](const std::vector<std::size_t>& idx) {
      json a = json::array();
      for (auto i : idx) a.push_back(i - p.unlabeled_begin());
      return a;
    };
    j["partition"] = {{"n_proto", p.n_proto}, {"n_labeled", p.n_labeled}, {"n_unlabeled", p.n_unlabeled}};
    j["nnz"] = g.nnz;
    j["self_training"] = g.self_training;
    j["first_pass"] = g.first_pass.values;
    if (g.self_training) {
      // indices are rows of the unlabeled input
      j["selection"] = {{"positives", local(g.selection.positives)},
                        {"negatives", local(g.selection.negatives)},
                        {"positive_threshold", g.selection.positive_threshold},
                        {"negative_threshold", g.selection.negative_threshold}};
      j["second_pass"] = g.second_pass.values;
    }
    json t = json::array();
    for (const auto& s : g.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    j["timings"] = t;
  }
  return j;
}

struct ScoreOutputs {
  std::vector<fs::path> score_files;
  std::vector<fs::path> diagnostics_files;
  std::vector<MethodResult> results;
};

inline fs::path score_file_name(Method m) { return "scores_" + std::string(to_string(m)) + ".npy"; }
inline fs::path diagnostics_file_name(Method m) { return "diagnostics_" + std::string(to_string(m)) + ".json"; }

inline ScoreOutputs cmd_score(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw InvalidArgument("no manifest given");
  const auto manifest = load_manifest(cfg.manifest);
  const auto ds = load_dataset(manifest);
  const auto mc = cfg.method_config();
  mc.propagation.validate();
  mc.baseline.validate();

  ScoreOutputs out;
  std::vector<json> diags;
  for (auto m : cfg.methods) {
    const auto t0 = std::chrono::steady_clock::now();
    out.results.push_back(run_method(ds, m, mc));
    auto d = diagnostics_json(out.results.back(), cfg);
    d["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    diags.push_back(std::move(d));
  }

  fs::create_directories(cfg.out);
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const auto scores = cfg.out / score_file_name(cfg.methods[i]);
    const auto diag = cfg.out / diagnostics_file_name(cfg.methods[i]);
    npy::save_vector(out.results[i].scores, scores);
    gsp::detail::write_text_file(diag, diags[i].dump(2) + "\n");
    out.score_files.push_back(scores);
    out.diagnostics_files.push_back(diag);
  }
  return out;
}

// ---------------------------------------------------------------- eval

inline json to_json(const EvalReport& r) {
  json config = json::object();
  if (!r.config.empty()) config = json::parse(r.config);
  return {{"method", r.method}, {"auroc", r.auroc}, {"fpr95", r.fpr95},
          {"n_id", r.n_id},     {"n_ood", r.n_ood}, {"config", config}};
}

/// CSV table `method,auroc,fpr95`, one row per report in the given order.
inline std::string reports_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "method,auroc,fpr95\n" << std::setprecision(17);
  for (const auto& r : reports) os << r.method << ',' << r.auroc << ',' << r.fpr95 << '\n';
  return os.str();
}

struct EvalOptions {
  std::vector<fs::path> scores;
  fs::path flags;
  fs::path out = "out";
};

/// `scores_<method>.npy` -> `<method>`; anything else -> file stem.
inline std::string method_label(const fs::path& scores_path) {
  auto stem = scores_path.stem().string();
  const std::string prefix = "scores_";
  return stem.rfind(prefix, 0) == 0 ? stem.substr(prefix.size()) : stem;
}

inline std::vector<EvalReport> cmd_eval(const EvalOptions& opts) {
  if (opts.scores.empty()) throw InvalidArgument("no score files given");
  if (!fs::exists(opts.flags)) throw MissingFile("flags file not found: '" + opts.flags.string() + "'");
  const auto flags = load_flags(opts.flags);
  std::vector<EvalReport> reports;
  for (const auto& path : opts.scores) {
    if (!fs::exists(path)) throw MissingFile("scores file not found: '" + path.string() + "'");
    const auto scores = npy::load_vector(path);
    if (scores.size() != flags.size()) {
      throw InvalidArgument("length mismatch: '" + path.string() + "' has " + std::to_string(scores.size()) +
                            " scores, flags have " + std::to_string(flags.size()));
    }
    const auto label = method_label(path);
    std::string config = "{}";
    const auto diag = path.parent_path() / ("diagnostics_" + label + ".json");
    if (fs::exists(diag)) {
      const auto d = read_json(diag);
      if (d.contains("config")) config = d.at("config").dump();
    }
    reports.push_back(evaluate(scores, flags, label, config));
  }
  fs::create_directories(opts.out);
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  gsp::detail::write_text_file(opts.out / "report.json", arr.dump(2) + "\n");
  gsp::detail::write_text_file(opts.out / "report.csv", reports_csv(reports));
  return reports;
}

// ---------------------------------------------------------------- synth

namespace detail {

// A direction is an explicit vector, {"axis": i}, or
// {"from": i, "toward": j, "degrees": a} (rotate e_i toward e_j by a).
inline std::vector<double> parse_direction(const json& j, std::size_t dim) {
  if (j.is_array()) return j.get<std::vector<double>>();
  std::vector<double> v(dim, 0.0);
  auto axis = [&](const char* key) {
    const auto i = j.at(key).get<std::size_t>();
    if (i >= dim) throw InvalidArgument(std::string("synth spec: '") + key + "' axis out of range");
    return i;
  };
  if (j.contains("axis")) {
    v[axis("axis")] = 1.0;
    return v;
  }
  const double rad = j.at("degrees").get<double>() * std::numbers::pi / 180.0;
  const auto a = axis("from");
  const auto b = axis("toward");
  if (a == b) throw InvalidArgument("synth spec: 'from' and 'toward' must differ");
  v[a] = std::cos(rad);
  v[b] = std::sin(rad);
  return v;
}

}  // namespace detail

struct SynthFile {
  synth::SynthSpec spec;
  std::vector<std::string> class_names;
};

inline SynthFile synth_spec_from_json(const json& j) {
  SynthFile f;
  auto& s = f.spec;
  try {
    s.dim = j.at("dim").get<std::size_t>();
    s.shape = synth::parse_shape(j.value("shape", std::string("gaussian_blobs")));
    s.seed = j.value("seed", std::uint64_t{0});
    s.templates_per_class = j.value("templates_per_class", s.templates_per_class);
    s.prompt_spread = j.value("prompt_spread", s.prompt_spread);
    s.prototype_offset_degrees = j.value("prototype_offset_degrees", s.prototype_offset_degrees);
    s.labeled_per_class = j.value("labeled_per_class", s.labeled_per_class);
    for (const auto& cj : j.at("clusters")) {
      synth::Cluster c;
      c.mean = detail::parse_direction(cj.at("mean"), s.dim);
      c.count = cj.at("count").get<std::size_t>();
      c.spread = cj.value("spread", c.spread);
      c.in_distribution = cj.value("in_distribution", true);
      if (cj.contains("chain_toward")) c.chain_toward = detail::parse_direction(cj.at("chain_toward"), s.dim);
      c.chain_degrees = cj.value("chain_degrees", 0.0);
      s.clusters.push_back(std::move(c));
    }
    if (j.contains("class_names")) f.class_names = j.at("class_names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid synth spec: ") + e.what());
  }
  synth::validate(s);
  if (f.class_names.empty()) {
    for (std::size_t c = 0; c < s.num_classes(); ++c) f.class_names.push_back("class_" + std::to_string(c));
  }
  if (f.class_names.size() != s.num_classes()) {
    throw InvalidArgument("synth spec: class_names has " + std::to_string(f.class_names.size()) + " entries for " +
                          std::to_string(s.num_classes()) + " in-distribution clusters");
  }
  return f;
}

inline SynthFile load_synth_spec(const fs::path& path) {
  if (!fs::exists(path)) throw MissingFile("synth spec not found: '" + path.string() + "'");
  return synth_spec_from_json(read_json(path));
}

/// Write a generated dataset as a manifest-rooted directory.
inline DatasetManifest write_synth_dataset(const synth::SynthDataset& ds, const std::vector<std::string>& class_names,
                                           const fs::path& dir) {
  DatasetManifest m;
  m.root = dir;
  m.num_classes = static_cast<int>(ds.pool.num_classes());
  m.class_names = class_names;
  fs::create_directories(dir / "prompts");
  for (std::size_t c = 0; c < ds.pool.num_classes(); ++c) {
    std::ostringstream name;
    name << "prompts/class_" << std::setw(3) << std::setfill('0') << c << ".npy";
    npy::save_matrix(ds.pool.per_class[c], dir / name.str());
    m.prompt_files.emplace_back(name.str());
  }
  npy::save_matrix(ds.unlabeled, dir / "unlabeled.npy");
  m.unlabeled = "unlabeled.npy";
  save_flags(ds.is_id, dir / "ground_truth.npy");
  m.ground_truth = "ground_truth.npy";
  if (!ds.labeled.empty()) {
    npy::save_matrix(ds.labeled, dir / "labeled.npy");
    save_labels(ds.labels, dir / "labels.csv");
    m.labeled = "labeled.npy";
    m.labels = "labels.csv";
  }
  gsp::detail::write_text_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  return m;
}

inline DatasetManifest cmd_synth(const fs::path& spec_path, const fs::path& out_dir,
                                 std::optional<std::uint64_t> seed_override = std::nullopt) {
  auto file = load_synth_spec(spec_path);
  if (seed_override) file.spec.seed = *seed_override;
  const auto ds = synth::generate(file.spec);
  return write_synth_dataset(ds, file.class_names, out_dir);
}

// ---------------------------------------------------------------- cluster-prompts

struct ClusterOptions {
  fs::path manifest;                // take the pool from a manifest ...
  std::vector<fs::path> pool_files;  // ... or from one NPY per class
  std::vector<std::size_t> clusters = {3};
  std::uint64_t seed = 0;
  fs::path out = "out";
};

/// "3", "1,2,6" or "1-10".
inline std::vector<std::size_t> parse_cluster_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v < 1) throw InvalidArgument("bad cluster count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    const auto lo = number(item.substr(0, dash));
    const auto hi = number(item.substr(dash + 1));
    if (hi < lo) throw InvalidArgument("bad cluster range '" + item + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("no cluster count given");
  return out;
}

struct ClusterOutput {
  std::size_t clusters = 0;
  fs::path matrix;
  fs::path class_map;
  PrototypeSet prototypes;
};

inline std::vector<ClusterOutput> cmd_cluster_prompts(const ClusterOptions& opts) {
  PromptPool pool;
  std::vector<std::string> class_names;
  if (!opts.manifest.empty()) {
    const auto m = load_manifest(opts.manifest);
    auto ds = load_dataset(m);
    if (!ds.pool) throw InvalidArgument("manifest '" + opts.manifest.string() + "' has no prompt pool");
    pool = std::move(*ds.pool);
    class_names = m.class_names;
  } else {
    for (const auto& p : opts.pool_files) {
      if (!fs::exists(p)) throw MissingFile("prompt file not found: '" + p.string() + "'");
    }
    pool = load_prompt_pool(opts.pool_files);
  }

  std::vector<ClusterOutput> outs;
  for (auto n : opts.clusters) {
    ClusterOutput o;
    o.clusters = n;
    o.prototypes = cluster_prompts(pool, n, opts.seed);
    o.matrix = opts.out / ("prototypes_nc" + std::to_string(n) + ".npy");
    o.class_map = opts.out / ("prototypes_nc" + std::to_string(n) + ".json");
    outs.push_back(std::move(o));
  }
  fs::create_directories(opts.out);
  for (const auto& o : outs) save_prototypes(o.prototypes, o.matrix, o.class_map, class_names);
  return outs;
}

}  // namespace gsp::cli
