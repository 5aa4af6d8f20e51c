#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/graph.hpp"
#include "gsp/matrix.hpp"

namespace gsp {

/// Per-node scores laid out like the graph's NodePartition.
struct ScoreVector {
  std::vector<double> values;
  NodePartition partition;

  [[nodiscard]] std::span<const double> unlabeled() const noexcept {
    return std::span<const double>(values).subspan(partition.unlabeled_begin(), partition.n_unlabeled);
  }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

struct PropagationConfig {
  double alpha = 0.5;
  std::size_t iterations = 5;
  double m_percent = 5.0;
  /// S_t = (1 - alpha) W~ S_{t-1} + alpha S_0 instead of the undamped rule.
  bool damped_variant = false;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must be in (0, 1]");
    if (iterations == 0) throw InvalidArgument("iterations must be positive");
    if (!(m_percent > 0.0 && m_percent < 50.0)) throw InvalidArgument("m_percent must be in (0, 50)");
  }
};

/// Pseudo prompts chosen from the unlabeled segment (global node indices).
struct PseudoPromptSelection {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  double positive_threshold = 0.0;  // lowest score admitted to positives
  double negative_threshold = 0.0;  // highest score admitted to negatives
};

/// +1 on prototype and labeled nodes, 0 on unlabeled nodes.
inline ScoreVector init_scores(const NodePartition& partition) {
  ScoreVector s;
  s.partition = partition;
  s.values.assign(partition.total(), 0.0);
  std::fill_n(s.values.begin(), partition.source_count(), 1.0);
  return s;
}

/// Runs exactly cfg.iterations steps of S_t = W~ S_{t-1} + alpha S_0 from S_0.
inline ScoreVector propagate(const NormalizedAdjacency& w, const ScoreVector& s0, const PropagationConfig& cfg) {
  const std::size_t n = w.weights.size();
  if (s0.values.size() != n) {
    throw InvalidArgument("score vector has " + std::to_string(s0.values.size()) + " entries, graph has " +
                          std::to_string(n) + " nodes");
  }
  const double decay = cfg.damped_variant ? 1.0 - cfg.alpha : 1.0;
  ScoreVector cur = s0;
  std::vector<double> next(n);
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    w.weights.multiply(cur.values, next);
    for (std::size_t i = 0; i < n; ++i) next[i] = decay * next[i] + cfg.alpha * s0.values[i];
    cur.values.swap(next);
  }
  return cur;
}

/// Number of pseudo prompts per side: max(1, round(m/100 * n)).
inline std::size_t pseudo_prompt_count(std::size_t n_unlabeled, double m_percent) {
  const auto q = static_cast<std::size_t>(std::llround(m_percent / 100.0 * static_cast<double>(n_unlabeled)));
  return std::max<std::size_t>(1, q);
}

/**
 * Highest-scoring q unlabeled nodes become positives, lowest-scoring q
 * (excluding positives) become negatives. Ties go to the lower index on
 * both ends.
 */
inline PseudoPromptSelection select_pseudo_prompts(const ScoreVector& scores, double m_percent) {
  if (!(m_percent > 0.0 && m_percent < 50.0)) throw InvalidArgument("m_percent must be in (0, 50)");
  const auto& part = scores.partition;
  if (part.n_unlabeled < 2) {
    throw InvalidArgument("pseudo prompt selection needs at least 2 unlabeled nodes, got " +
                          std::to_string(part.n_unlabeled));
  }
  const std::size_t q = pseudo_prompt_count(part.n_unlabeled, m_percent);
  const auto& v = scores.values;

  std::vector<std::size_t> idx(part.n_unlabeled);
  std::iota(idx.begin(), idx.end(), part.unlabeled_begin());
  std::vector<std::size_t> high = idx;
  std::partial_sort(high.begin(), high.begin() + static_cast<std::ptrdiff_t>(q), high.end(),
                    [&](std::size_t a, std::size_t b) { return v[a] != v[b] ? v[a] > v[b] : a < b; });
  high.resize(q);
  std::vector<std::size_t> low;
  low.reserve(idx.size());
  std::vector<bool> taken(v.size(), false);
  for (auto i : high) taken[i] = true;
  for (auto i : idx) {
    if (!taken[i]) low.push_back(i);
  }
  std::partial_sort(low.begin(), low.begin() + static_cast<std::ptrdiff_t>(q), low.end(),
                    [&](std::size_t a, std::size_t b) { return v[a] != v[b] ? v[a] < v[b] : a < b; });
  low.resize(q);

  PseudoPromptSelection sel;
  sel.positive_threshold = v[high.back()];
  sel.negative_threshold = v[low.back()];
  sel.positives = std::move(high);
  sel.negatives = std::move(low);
  return sel;
}

/// S~_0: S_0 with +1 at positives and -1 at negatives.
inline ScoreVector reinit_scores(const ScoreVector& s0, const PseudoPromptSelection& sel) {
  ScoreVector out = s0;
  std::vector<bool> positive(s0.values.size(), false);
  for (auto i : sel.positives) {
    if (!s0.partition.is_unlabeled(i)) {
      throw InvalidArgument("positive pseudo prompt " + std::to_string(i) + " is not an unlabeled node");
    }
    positive[i] = true;
    out.values[i] = 1.0;
  }
  for (auto i : sel.negatives) {
    if (!s0.partition.is_unlabeled(i)) {
      throw InvalidArgument("negative pseudo prompt " + std::to_string(i) + " is not an unlabeled node");
    }
    if (positive[i]) throw InvalidArgument("node " + std::to_string(i) + " selected as both positive and negative");
    out.values[i] = -1.0;
  }
  return out;
}

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct GspDiagnostics {
  ScoreVector first_pass;
  ScoreVector second_pass;  // empty when self-training is disabled
  PseudoPromptSelection selection;
  bool self_training = true;
  std::vector<StageTiming> timings;
  GraphConfig graph;
  std::size_t nnz = 0;
};

struct GspResult {
  std::vector<double> scores;  // aligned with the unlabeled input rows
  GspDiagnostics diagnostics;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink), last_(std::chrono::steady_clock::now()) {}
  void lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.push_back({std::move(stage), std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<StageTiming>& sink_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace detail

/**
 * Graph score propagation end to end: build and normalize the graph,
 * propagate from S_0, pick pseudo prompts, re-initialize and propagate
 * again on the same graph. With `self_training` off the first-pass scores
 * are returned.
 */
inline GspResult run_gsp(const EmbeddingMatrix& prototypes, const EmbeddingMatrix& labeled,
                         const EmbeddingMatrix& unlabeled, const PropagationConfig& cfg,
                         const GraphConfig& graph_cfg, bool self_training = true) {
  cfg.validate();
  GspResult res;
  auto& diag = res.diagnostics;
  diag.self_training = self_training;
  diag.graph = graph_cfg;
  detail::StageClock clock(diag.timings);

  const auto adj = build_adjacency(prototypes, labeled, unlabeled, graph_cfg);
  clock.lap("build_graph");
  const auto w = normalize(adj);
  diag.nnz = adj.weights.nnz();
  clock.lap("normalize");

  const auto s0 = init_scores(adj.partition);
  diag.first_pass = propagate(w, s0, cfg);
  clock.lap("propagate_1");

  const ScoreVector* final_scores = &diag.first_pass;
  if (self_training) {
    if (adj.partition.n_unlabeled >= 2) {
      diag.selection = select_pseudo_prompts(diag.first_pass, cfg.m_percent);
    } else {
      // a lone test node can only be a positive
      diag.selection.positives = {adj.partition.unlabeled_begin()};
      diag.selection.positive_threshold = diag.first_pass.values.back();
    }
    const auto s0_refined = reinit_scores(s0, diag.selection);
    clock.lap("select_pseudo_prompts");
    diag.second_pass = propagate(w, s0_refined, cfg);
    clock.lap("propagate_2");
    final_scores = &diag.second_pass;
  }
  const auto u = final_scores->unlabeled();
  res.scores.assign(u.begin(), u.end());
  return res;
}

inline GspResult run_gsp(const PrototypeSet& prototypes, const EmbeddingMatrix& labeled,
                         const EmbeddingMatrix& unlabeled, const PropagationConfig& cfg,
                         const GraphConfig& graph_cfg, bool self_training = true) {
  return run_gsp(prototypes.vectors, labeled, unlabeled, cfg, graph_cfg, self_training);
}

}  // namespace gsp
