// gsp: command-line driver for graph score propagation OOD scoring.
//
//   gsp synth --config spec.json --out data/
//   gsp score --config run.json --method all --out runs/
//   gsp eval --scores runs/scores_gsp.npy --flags data/ground_truth.npy --out runs/
//   gsp cluster-prompts --manifest data/manifest.json --clusters 1-10 --out protos/
//
// Exit codes: 0 success, 1 invalid input or failed stage, 2 missing input file.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gsp/commands.hpp"

namespace fs = std::filesystem;
using gsp::cli::json;

namespace {

template <typename T>
void override_if(const std::optional<T>& flag, T& field) {
  if (flag) field = *flag;
}

int run_score(const std::optional<std::string>& config, const std::optional<std::string>& manifest,
              const std::optional<std::string>& method, const std::optional<std::size_t>& k,
              const std::optional<std::size_t>& clusters, const std::optional<double>& alpha,
              const std::optional<std::size_t>& iters, const std::optional<double>& m_percent,
              const std::optional<double>& tau, const std::optional<std::uint64_t>& seed,
              const std::optional<std::string>& out, bool damped) {
  gsp::cli::RunConfig cfg;
  if (config) {
    const fs::path path = *config;
    if (!fs::exists(path)) throw gsp::MissingFile("config not found: '" + path.string() + "'");
    cfg = gsp::cli::run_config_from_json(gsp::cli::read_json(path), path.parent_path());
  }
  if (manifest) cfg.manifest = *manifest;
  if (method) cfg.methods = gsp::cli::parse_method_list(*method);
  override_if(k, cfg.k);
  override_if(clusters, cfg.clusters);
  override_if(alpha, cfg.alpha);
  override_if(iters, cfg.iterations);
  override_if(m_percent, cfg.m_percent);
  override_if(tau, cfg.tau);
  override_if(seed, cfg.seed);
  if (out) cfg.out = *out;
  if (damped) cfg.damped = true;

  const auto res = gsp::cli::cmd_score(cfg);
  for (const auto& f : res.score_files) std::cout << f.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph score propagation for out-of-distribution detection on embeddings"};
  app.require_subcommand(1);

  // score
  auto* score = app.add_subcommand("score", "Score unlabeled samples with one or more methods");
  std::optional<std::string> s_config, s_manifest, s_method, s_out;
  std::optional<std::size_t> s_k, s_clusters, s_iters;
  std::optional<double> s_alpha, s_m, s_tau;
  std::optional<std::uint64_t> s_seed;
  bool s_damped = false;
  score->add_option("--config", s_config, "Run configuration JSON");
  score->add_option("--manifest", s_manifest, "Dataset manifest JSON");
  score->add_option("--method", s_method,
                    "Method, comma list, or 'all' (cosine, manifold, score_prop_only, gsp_no_neg, gsp_no_cluster, gsp)");
  score->add_option("--k", s_k, "Neighbors per node (default 10)");
  score->add_option("--clusters", s_clusters, "Prompt clusters per class (default 3)");
  score->add_option("--alpha", s_alpha, "Propagation alpha (default 0.5)");
  score->add_option("--iters", s_iters, "Propagation iterations T (default 5)");
  score->add_option("--m-percent", s_m, "Pseudo prompt percentage m (default 5)");
  score->add_option("--tau", s_tau, "Cosine baseline temperature (default 1)");
  score->add_option("--seed", s_seed, "Seed for K-means initialization");
  score->add_option("--out", s_out, "Output directory");
  score->add_flag("--damped", s_damped, "Use the damped (1-alpha) propagation variant");

  // eval
  auto* eval = app.add_subcommand("eval", "Compute AUROC and FPR95 for score files");
  std::optional<std::string> e_config, e_flags, e_out;
  std::vector<std::string> e_scores;
  eval->add_option("--config", e_config, "JSON with scores (list), flags and out");
  eval->add_option("--scores", e_scores, "Score NPY file(s); repeat for a sweep");
  eval->add_option("--flags", e_flags, "Ground-truth NPY (nonzero = in-distribution)");
  eval->add_option("--out", e_out, "Output directory");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  std::optional<std::string> y_config, y_out;
  std::optional<std::uint64_t> y_seed;
  synth->add_option("--config", y_config, "Synthetic spec JSON")->required();
  synth->add_option("--seed", y_seed, "Override the spec seed");
  synth->add_option("--out", y_out, "Output directory");

  // cluster-prompts
  auto* cluster = app.add_subcommand("cluster-prompts", "Cluster per-class prompt pools into prototypes");
  std::optional<std::string> c_config, c_manifest, c_clusters, c_out;
  std::vector<std::string> c_pool;
  std::optional<std::uint64_t> c_seed;
  cluster->add_option("--config", c_config, "JSON with manifest or pool, clusters, seed, out");
  cluster->add_option("--manifest", c_manifest, "Dataset manifest with a prompt pool");
  cluster->add_option("--pool", c_pool, "One prompt NPY per class (in class order)");
  cluster->add_option("--clusters", c_clusters, "Cluster count, list or range, e.g. 3, 1,3,6 or 1-10");
  cluster->add_option("--seed", c_seed, "K-means seed");
  cluster->add_option("--out", c_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) {
      return run_score(s_config, s_manifest, s_method, s_k, s_clusters, s_alpha, s_iters, s_m, s_tau, s_seed, s_out,
                       s_damped);
    }
    if (*eval) {
      gsp::cli::EvalOptions opts;
      if (e_config) {
        const auto j = gsp::cli::read_json(*e_config);
        for (const auto& s : j.value("scores", std::vector<std::string>{})) opts.scores.emplace_back(s);
        opts.flags = j.value("flags", std::string{});
        if (j.contains("out")) opts.out = j.at("out").get<std::string>();
      }
      if (!e_scores.empty()) opts.scores.assign(e_scores.begin(), e_scores.end());
      if (e_flags) opts.flags = *e_flags;
      if (e_out) opts.out = *e_out;
      for (const auto& r : gsp::cli::cmd_eval(opts)) {
        std::cout << r.method << " auroc=" << r.auroc << " fpr95=" << r.fpr95 << '\n';
      }
      return 0;
    }
    if (*synth) {
      const auto m = gsp::cli::cmd_synth(*y_config, y_out.value_or("synth"), y_seed);
      std::cout << (m.root / "manifest.json").string() << '\n';
      return 0;
    }
    if (*cluster) {
      gsp::cli::ClusterOptions opts;
      if (c_config) {
        const auto j = gsp::cli::read_json(*c_config);
        opts.manifest = j.value("manifest", std::string{});
        for (const auto& p : j.value("pool", std::vector<std::string>{})) opts.pool_files.emplace_back(p);
        if (j.contains("clusters")) {
          const auto& c = j.at("clusters");
          opts.clusters = c.is_array() ? c.get<std::vector<std::size_t>>()
                                       : gsp::cli::parse_cluster_list(c.is_string() ? c.get<std::string>()
                                                                                     : std::to_string(c.get<std::size_t>()));
        }
        opts.seed = j.value("seed", opts.seed);
        if (j.contains("out")) opts.out = j.at("out").get<std::string>();
      }
      if (c_manifest) opts.manifest = *c_manifest;
      if (!c_pool.empty()) opts.pool_files.assign(c_pool.begin(), c_pool.end());
      if (c_clusters) opts.clusters = gsp::cli::parse_cluster_list(*c_clusters);
      if (c_seed) opts.seed = *c_seed;
      if (c_out) opts.out = *c_out;
      if (opts.manifest.empty() && opts.pool_files.empty()) {
        throw gsp::InvalidArgument("cluster-prompts needs --manifest or --pool");
      }
      for (const auto& o : gsp::cli::cmd_cluster_prompts(opts)) std::cout << o.matrix.string() << '\n';
      return 0;
    }
  } catch (const gsp::MissingFile& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gsp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
