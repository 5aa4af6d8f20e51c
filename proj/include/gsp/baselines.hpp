#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/graph.hpp"
#include "gsp/matrix.hpp"
#include "gsp/prompt_bank.hpp"
#include "gsp/sparse.hpp"

namespace gsp {

struct BaselineConfig {
  double temperature = 1.0;
  double epsilon = 1e-9;

  void validate() const {
    if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  }
};

/**
 * Maximum softmax over classes of exp(-d_c / tau), where d_c is the cosine
 * distance from the sample to the closest prototype of class c. Returns a
 * value in [1/C, 1]; higher means more in-distribution.
 */
inline double cosine_score(std::span<const double> sample, const PrototypeSet& prototypes,
                           const BaselineConfig& cfg = {}) {
  if (prototypes.size() == 0) throw InvalidArgument("empty prototype set");
  cfg.validate();
  std::vector<double> best_sim(prototypes.num_classes(), -std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < prototypes.size(); ++p) {
    auto& b = best_sim[static_cast<std::size_t>(prototypes.class_of[p])];
    b = std::max(b, dot(sample, prototypes.vectors.row(p)));
  }
  // logits -d_c/tau, shifted by their max for a stable softmax
  std::vector<double> logits;
  logits.reserve(best_sim.size());
  for (double s : best_sim) {
    if (std::isinf(s)) continue;  // class with no prototype
    logits.push_back(-(1.0 - s) / cfg.temperature);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - top);
  return 1.0 / denom;
}

inline std::vector<double> cosine_scores(const EmbeddingMatrix& samples, const PrototypeSet& prototypes,
                                         const BaselineConfig& cfg = {}) {
  std::vector<double> out(samples.count());
  for (std::size_t i = 0; i < samples.count(); ++i) out[i] = cosine_score(samples.row(i), prototypes, cfg);
  return out;
}

/// Multi-source Dijkstra over non-negative edge lengths. Unreachable nodes
/// get +infinity.
inline std::vector<double> shortest_distances(const CsrMatrix& lengths, std::span<const std::size_t> sources) {
  const std::size_t n = lengths.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (auto s : sources) {
    if (s >= n) throw InvalidArgument("source node " + std::to_string(s) + " outside graph");
    dist[s] = 0.0;
    heap.emplace(0.0, s);
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (std::size_t e = lengths.row_begin(u); e < lengths.row_end(u); ++e) {
      const double len = lengths.value(e);
      if (len < 0.0) throw InvalidArgument("negative edge length");
      const auto v = lengths.col(e);
      const double nd = d + len;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

/// Reciprocal manifold distance from the nearest prototype or labeled node,
/// for each unlabeled node in input order. Unreachable nodes score 0.
inline std::vector<double> manifold_score(const BlockAdjacency& adj, const NodePartition& partition,
                                          const BaselineConfig& cfg = {}) {
  cfg.validate();
  std::vector<std::size_t> sources(partition.source_count());
  for (std::size_t i = 0; i < sources.size(); ++i) sources[i] = i;
  const auto dist = shortest_distances(adj.lengths, sources);
  std::vector<double> out(partition.n_unlabeled);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double d = dist[partition.unlabeled_begin() + j];
    out[j] = std::isinf(d) ? 0.0 : 1.0 / (d + cfg.epsilon);
  }
  return out;
}

}  // namespace gsp
