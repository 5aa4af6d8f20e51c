#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/knn.hpp"
#include "gsp/log.hpp"
#include "gsp/matrix.hpp"
#include "gsp/prompt_bank.hpp"
#include "gsp/sparse.hpp"

namespace gsp {

/// Node layout: prototypes, then labeled samples, then unlabeled samples.
struct NodePartition {
  std::size_t n_proto = 0;
  std::size_t n_labeled = 0;
  std::size_t n_unlabeled = 0;

  [[nodiscard]] std::size_t total() const noexcept { return n_proto + n_labeled + n_unlabeled; }
  [[nodiscard]] std::size_t labeled_begin() const noexcept { return n_proto; }
  [[nodiscard]] std::size_t unlabeled_begin() const noexcept { return n_proto + n_labeled; }
  /// Prototype and labeled nodes carry the +1 initial score.
  [[nodiscard]] std::size_t source_count() const noexcept { return n_proto + n_labeled; }
  [[nodiscard]] bool is_unlabeled(std::size_t i) const noexcept {
    return i >= unlabeled_begin() && i < total();
  }

  void validate() const {
    if (n_proto == 0) throw InvalidArgument("partition needs at least one prototype");
    if (n_unlabeled == 0) throw InvalidArgument("partition needs at least one unlabeled sample");
  }

  friend bool operator==(const NodePartition&, const NodePartition&) = default;
};

struct GraphConfig {
  std::size_t k = 10;
  double weight_exponent = 1.0;  // edge weight = max(cos, 0)^exponent
};

/**
 * Symmetric KNN adjacency over [prototypes | labeled | unlabeled].
 *
 * Prototype and labeled diagonal blocks are identity, the block between
 * them is empty, unlabeled nodes have no self-loops. `lengths` shares the
 * sparsity pattern of `weights` and stores the L2 distance between the
 * endpoint embeddings.
 */
struct BlockAdjacency {
  CsrMatrix weights;
  CsrMatrix lengths;
  NodePartition partition;
  std::size_t k = 0;
  // k actually used per block after clamping
  std::size_t k_proto = 0;
  std::size_t k_labeled = 0;
  std::size_t k_unlabeled = 0;
};

struct NormalizedAdjacency {
  CsrMatrix weights;
  std::vector<double> degree;  // floored row sums of W
  NodePartition partition;
};

inline constexpr double kDegreeFloor = 1e-12;

namespace detail {

inline std::size_t clamp_k(std::size_t k, std::size_t available, const char* block) {
  if (k > available) {
    log::warn("k=" + std::to_string(k) + " exceeds the " + std::to_string(available) + " neighbors available for " +
              block + "; clamping");
    return available;
  }
  return k;
}

inline double edge_weight(double similarity, double exponent) {
  const double s = std::max(similarity, 0.0);
  return exponent == 1.0 ? s : std::pow(s, exponent);
}

}  // namespace detail

inline BlockAdjacency build_adjacency(const EmbeddingMatrix& prototypes, const EmbeddingMatrix& labeled,
                                      const EmbeddingMatrix& unlabeled, const GraphConfig& cfg) {
  if (cfg.weight_exponent < 1.0) throw InvalidArgument("weight exponent must be >= 1");
  BlockAdjacency adj;
  adj.partition = {prototypes.count(), labeled.count(), unlabeled.count()};
  adj.partition.validate();
  const std::size_t d = unlabeled.dim();
  if (prototypes.dim() != d || (!labeled.empty() && labeled.dim() != d)) {
    throw InvalidArgument("dim mismatch between prototypes, labeled and unlabeled matrices");
  }
  const auto& part = adj.partition;
  adj.k = cfg.k;
  adj.k_proto = detail::clamp_k(cfg.k, part.n_unlabeled, "prototype->unlabeled");
  adj.k_labeled = part.n_labeled == 0 ? 0 : detail::clamp_k(cfg.k, part.n_unlabeled, "labeled->unlabeled");
  adj.k_unlabeled = detail::clamp_k(cfg.k, part.n_unlabeled - 1, "unlabeled->unlabeled");

  std::vector<Triplet> w;
  std::vector<Triplet> len;
  auto add_edge = [&](std::size_t a, std::size_t b, double sim, std::span<const double> xa,
                      std::span<const double> xb) {
    const double weight = detail::edge_weight(sim, cfg.weight_exponent);
    if (weight <= 0.0) return;
    const double l = std::sqrt(squared_distance(xa, xb));
    w.push_back({a, b, weight});
    w.push_back({b, a, weight});
    len.push_back({a, b, l});
    len.push_back({b, a, l});
  };

  for (std::size_t i = 0; i < part.source_count(); ++i) {
    w.push_back({i, i, 1.0});
    len.push_back({i, i, 0.0});
  }
  const std::size_t u0 = part.unlabeled_begin();
  if (adj.k_proto > 0) {
    for (const auto& nb : knn_exact(prototypes, unlabeled, adj.k_proto, false)) {
      add_edge(nb.query, u0 + nb.neighbor, nb.similarity, prototypes.row(nb.query), unlabeled.row(nb.neighbor));
    }
  }
  if (adj.k_labeled > 0) {
    const std::size_t l0 = part.labeled_begin();
    for (const auto& nb : knn_exact(labeled, unlabeled, adj.k_labeled, false)) {
      add_edge(l0 + nb.query, u0 + nb.neighbor, nb.similarity, labeled.row(nb.query), unlabeled.row(nb.neighbor));
    }
  }
  if (adj.k_unlabeled > 0) {
    for (const auto& nb : knn_exact(unlabeled, unlabeled, adj.k_unlabeled, true)) {
      add_edge(u0 + nb.query, u0 + nb.neighbor, nb.similarity, unlabeled.row(nb.query), unlabeled.row(nb.neighbor));
    }
  }
  adj.weights = CsrMatrix::from_triplets(part.total(), std::move(w));
  adj.lengths = CsrMatrix::from_triplets(part.total(), std::move(len));
  return adj;
}

inline BlockAdjacency build_adjacency(const PrototypeSet& prototypes, const EmbeddingMatrix& labeled,
                                      const EmbeddingMatrix& unlabeled, const GraphConfig& cfg) {
  return build_adjacency(prototypes.vectors, labeled, unlabeled, cfg);
}

/// W~ = D^-1/2 W D^-1/2 with D_ii = max(sum_j W_ij, 1e-12).
inline NormalizedAdjacency normalize(const BlockAdjacency& adj) {
  NormalizedAdjacency out;
  out.partition = adj.partition;
  out.degree = adj.weights.row_sums();
  for (double& d : out.degree) d = std::max(d, kDegreeFloor);
  std::vector<double> inv_sqrt(out.degree.size());
  for (std::size_t i = 0; i < inv_sqrt.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(out.degree[i]);

  const auto& w = adj.weights;
  std::vector<double> values(w.nnz());
  for (std::size_t r = 0; r < w.size(); ++r) {
    for (std::size_t e = w.row_begin(r); e < w.row_end(r); ++e) {
      values[e] = w.value(e) * inv_sqrt[r] * inv_sqrt[w.col(e)];
    }
  }
  // D^-1/2 W D^-1/2 is symmetric mathematically; force bitwise symmetry.
  for (std::size_t r = 0; r < w.size(); ++r) {
    for (std::size_t e = w.row_begin(r); e < w.row_end(r); ++e) {
      const auto c = w.col(e);
      if (c > r) values[w.find(c, r)] = values[e];
    }
  }
  out.weights = w.with_values(std::move(values));
  return out;
}

/// Debug dump: `row,col,weight` CSV plus a JSON header with partition and k.
inline void write_graph_dump(const BlockAdjacency& adj, const std::filesystem::path& csv_path,
                             const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw IoError("cannot open '" + csv_path.string() + "' for writing");
  csv << "row,col,weight\n" << std::setprecision(17);
  const auto& w = adj.weights;
  for (std::size_t r = 0; r < w.size(); ++r) {
    for (std::size_t e = w.row_begin(r); e < w.row_end(r); ++e) csv << r << ',' << w.col(e) << ',' << w.value(e) << '\n';
  }
  std::ofstream js(json_path, std::ios::trunc);
  if (!js) throw IoError("cannot open '" + json_path.string() + "' for writing");
  js << "{\"n_proto\": " << adj.partition.n_proto << ", \"n_labeled\": " << adj.partition.n_labeled
     << ", \"n_unlabeled\": " << adj.partition.n_unlabeled << ", \"k\": " << adj.k << ", \"nnz\": " << w.nnz()
     << "}\n";
  if (!csv || !js) throw IoError("graph dump write failed");
}

}  // namespace gsp
