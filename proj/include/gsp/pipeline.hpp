#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsp/baselines.hpp"
#include "gsp/error.hpp"
#include "gsp/graph.hpp"
#include "gsp/labels.hpp"
#include "gsp/matrix.hpp"
#include "gsp/prompt_bank.hpp"
#include "gsp/propagation.hpp"

namespace gsp {

/// Scoring methods; the last four form the ablation ladder.
enum class Method { cosine, manifold, score_prop_only, gsp_no_cluster, gsp_no_neg, gsp };

/// Ablation order: baselines, plain propagation, +clustering, +self-training, both.
inline constexpr std::array<Method, 6> kAllMethods = {Method::cosine,     Method::manifold,
                                                      Method::score_prop_only, Method::gsp_no_neg,
                                                      Method::gsp_no_cluster,  Method::gsp};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cosine: return "cosine";
    case Method::manifold: return "manifold";
    case Method::score_prop_only: return "score_prop_only";
    case Method::gsp_no_cluster: return "gsp_no_cluster";
    case Method::gsp_no_neg: return "gsp_no_neg";
    case Method::gsp: return "gsp";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (auto m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

/// Whether the method uses clustered prototypes (otherwise per-class means).
inline bool uses_prompt_clustering(Method m) { return m == Method::gsp || m == Method::gsp_no_neg; }

/// Whether the method runs the self-training second pass.
inline bool uses_self_training(Method m) { return m == Method::gsp || m == Method::gsp_no_cluster; }

struct MethodConfig {
  GraphConfig graph;
  PropagationConfig propagation;
  BaselineConfig baseline;
  std::size_t clusters = 3;
  std::uint64_t seed = 0;
};

/// In-memory inputs, all rows unit-normalized.
struct Dataset {
  std::optional<PromptPool> pool;
  std::optional<PrototypeSet> prototypes;  // used when no pool is given
  EmbeddingMatrix labeled;
  LabelTable labels;
  EmbeddingMatrix unlabeled;
  std::optional<std::vector<bool>> is_id;
  std::vector<std::string> class_names;
};

struct MethodResult {
  Method method = Method::gsp;
  std::vector<double> scores;
  std::size_t n_prototypes = 0;
  std::optional<GspDiagnostics> gsp;
};

inline PrototypeSet prototypes_for(const Dataset& ds, Method method, const MethodConfig& cfg) {
  if (ds.pool) {
    return uses_prompt_clustering(method) ? cluster_prompts(*ds.pool, cfg.clusters, cfg.seed)
                                          : mean_prototypes(*ds.pool);
  }
  if (ds.prototypes) return *ds.prototypes;
  throw InvalidArgument("dataset has neither a prompt pool nor prototypes");
}

inline MethodResult run_method(const Dataset& ds, Method method, const MethodConfig& cfg) {
  MethodResult res;
  res.method = method;
  const auto protos = prototypes_for(ds, method, cfg);
  res.n_prototypes = protos.size();
  switch (method) {
    case Method::cosine:
      res.scores = cosine_scores(ds.unlabeled, protos, cfg.baseline);
      break;
    case Method::manifold: {
      const auto adj = build_adjacency(protos, ds.labeled, ds.unlabeled, cfg.graph);
      res.scores = manifold_score(adj, adj.partition, cfg.baseline);
      break;
    }
    default: {
      auto out = run_gsp(protos, ds.labeled, ds.unlabeled, cfg.propagation, cfg.graph, uses_self_training(method));
      res.scores = std::move(out.scores);
      res.gsp = std::move(out.diagnostics);
      break;
    }
  }
  return res;
}

}  // namespace gsp
