#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/matrix.hpp"

namespace gsp {

struct Neighbor {
  std::size_t query = 0;
  std::size_t neighbor = 0;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/**
 * Exact k nearest neighbors by cosine similarity (dot product on unit rows).
 *
 * Results are grouped by query in ascending order; within a query the
 * neighbors are sorted by decreasing similarity, lower corpus index first
 * on ties. With `exclude_self` the corpus is assumed to be the query set
 * and row i never lists itself.
 */
inline std::vector<Neighbor> knn_exact(const EmbeddingMatrix& queries, const EmbeddingMatrix& corpus,
                                       std::size_t k, bool exclude_self) {
  if (queries.dim() != corpus.dim()) {
    throw InvalidArgument("dim mismatch: queries have " + std::to_string(queries.dim()) + ", corpus has " +
                          std::to_string(corpus.dim()));
  }
  if (exclude_self && queries.count() != corpus.count()) {
    throw InvalidArgument("self-exclusion requires the corpus to be the query set");
  }
  const std::size_t available = corpus.count() == 0 ? 0 : corpus.count() - (exclude_self ? 1 : 0);
  if (k > available || available == 0) {
    throw InvalidArgument("k=" + std::to_string(k) + " too large: only " + std::to_string(available) +
                          " candidate neighbors");
  }

  std::vector<Neighbor> out;
  out.reserve(queries.count() * k);
  std::vector<double> sims(corpus.count());
  std::vector<std::size_t> order(corpus.count());
  for (std::size_t q = 0; q < queries.count(); ++q) {
    const auto qrow = queries.row(q);
    for (std::size_t c = 0; c < corpus.count(); ++c) sims[c] = dot(qrow, corpus.row(c));
    order.resize(corpus.count());
    std::iota(order.begin(), order.end(), 0);
    if (exclude_self) order.erase(order.begin() + static_cast<std::ptrdiff_t>(q));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (sims[a] != sims[b]) return sims[a] > sims[b];
                        return a < b;
                      });
    for (std::size_t i = 0; i < k; ++i) out.push_back({q, order[i], sims[order[i]]});
  }
  return out;
}

}  // namespace gsp
