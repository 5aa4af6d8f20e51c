#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/log.hpp"
#include "gsp/matrix.hpp"
#include "gsp/rng.hpp"

namespace gsp {

/// Encoded prompt templates, one matrix per in-distribution class.
struct PromptPool {
  std::vector<EmbeddingMatrix> per_class;

  [[nodiscard]] std::size_t num_classes() const noexcept { return per_class.size(); }
  [[nodiscard]] std::size_t template_count() const noexcept {
    return per_class.empty() ? 0 : per_class.front().count();
  }
  [[nodiscard]] std::size_t dim() const noexcept {
    return per_class.empty() ? 0 : per_class.front().dim();
  }

  void validate() const {
    if (per_class.empty()) throw InvalidArgument("empty prompt pool");
    const auto t = template_count();
    const auto d = dim();
    if (t == 0) throw InvalidArgument("empty prompt pool: class 0 has no templates");
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      if (per_class[c].count() != t) {
        throw InvalidArgument("class " + std::to_string(c) + " has " + std::to_string(per_class[c].count()) +
                              " templates, class 0 has " + std::to_string(t));
      }
      if (per_class[c].dim() != d) {
        throw InvalidArgument("class " + std::to_string(c) + " prompts have dim " +
                              std::to_string(per_class[c].dim()) + ", expected " + std::to_string(d));
      }
    }
  }
};

/// Stacked ID prototypes with the class each one stands for.
struct PrototypeSet {
  EmbeddingMatrix vectors;
  std::vector<int> class_of;
  std::size_t clusters_per_class = 1;

  [[nodiscard]] std::size_t size() const noexcept { return vectors.count(); }
  [[nodiscard]] std::size_t num_classes() const noexcept {
    return class_of.empty() ? 0 : static_cast<std::size_t>(*std::max_element(class_of.begin(), class_of.end())) + 1;
  }
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;  // max center displacement
};

struct KMeansResult {
  EmbeddingMatrix centers;              // raw (not normalized) means
  std::vector<std::size_t> assignment;  // point -> center
  std::vector<double> objective;        // sum of squared distances after each update
  std::size_t iterations = 0;
};

namespace detail {

/// Mean of the given rows, summed in row order.
inline std::vector<double> centroid(const EmbeddingMatrix& points) {
  std::vector<double> mean(points.dim(), 0.0);
  for (std::size_t r = 0; r < points.count(); ++r) {
    const auto row = points.row(r);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
  }
  for (double& v : mean) v /= static_cast<double>(points.count());
  return mean;
}

// Nearest center; lowest index wins ties.
inline std::size_t nearest(std::span<const double> x, const EmbeddingMatrix& centers, double* dist2 = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centers.count(); ++k) {
    const double d = squared_distance(x, centers.row(k));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (dist2 != nullptr) *dist2 = best_d;
  return best;
}

inline EmbeddingMatrix kmeanspp_seed(const EmbeddingMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.count();
  EmbeddingMatrix centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centers.append_row(points.row(first));
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centers.row(0));

  while (centers.count() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding at the upper end
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // every point coincides with a center; take the first unused one
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    centers.append_row(points.row(pick));
    chosen[pick] = true;
    const auto c = centers.row(centers.count() - 1);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), c));
  }
  return centers;
}

}  // namespace detail

/**
 * Squared-L2 K-means with k-means++ seeding and Lloyd iterations.
 *
 * Stops when assignments no longer change, when no center moves more than
 * `tolerance`, or after `max_iterations` updates. A cluster that becomes
 * empty receives the point farthest from its current center. Centers are
 * returned in lexicographic order so the result does not depend on the
 * order of the input rows.
 */
inline KMeansResult kmeans(const EmbeddingMatrix& points, std::size_t k, std::uint64_t seed,
                           std::uint64_t stream = 0, const KMeansOptions& opts = {}) {
  const std::size_t n = points.count();
  if (n == 0) throw InvalidArgument("kmeans: no points");
  if (k == 0 || k > n) {
    throw InvalidArgument("kmeans: k=" + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  }
  Rng rng(seed, stream);
  KMeansResult res;
  res.centers = detail::kmeanspp_seed(points, k, rng);
  res.assignment.assign(n, k);  // sentinel: unassigned

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    bool changed = false;
    std::vector<double> d2(n);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = detail::nearest(points.row(i), res.centers, &d2[i]);
      if (c != res.assignment[i]) changed = true;
      res.assignment[i] = c;
      ++sizes[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[res.assignment[i]] > 1 && (far == n || d2[i] > d2[far])) far = i;
      }
      --sizes[res.assignment[far]];
      res.assignment[far] = c;
      d2[far] = 0.0;
      sizes[c] = 1;
      changed = true;
    }
    if (!changed) break;

    EmbeddingMatrix updated(k, points.dim());
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = updated.row(res.assignment[i]);
      const auto src = points.row(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : updated.row(c)) v /= static_cast<double>(sizes[c]);
      movement = std::max(movement, std::sqrt(squared_distance(updated.row(c), res.centers.row(c))));
    }
    res.centers = std::move(updated);
    ++res.iterations;

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) objective += squared_distance(points.row(i), res.centers.row(res.assignment[i]));
    res.objective.push_back(objective);

    if (movement < opts.tolerance) break;
  }

  // canonical center order
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = res.centers.row(a);
    const auto rb = res.centers.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;
  res.centers = res.centers.select(order);
  for (auto& a : res.assignment) a = rank[a];
  return res;
}

namespace detail {

inline std::vector<double> unit(std::vector<double> v, std::size_t cls) {
  const double n = norm(v);
  if (n == 0.0) throw InvalidArgument("zero-norm mean for class " + std::to_string(cls));
  for (double& x : v) x /= n;
  return v;
}

}  // namespace detail

/// One prototype per class: the normalized mean of its templates.
inline PrototypeSet mean_prototypes(const PromptPool& pool) {
  pool.validate();
  PrototypeSet out;
  out.clusters_per_class = 1;
  for (std::size_t c = 0; c < pool.num_classes(); ++c) {
    out.vectors.append_row(detail::unit(detail::centroid(pool.per_class[c]), c));
    out.class_of.push_back(static_cast<int>(c));
  }
  return out;
}

/// Per-class K-means over the prompt pool; the normalized centers become
/// the prototypes. Class c uses RNG stream c of `seed`.
inline PrototypeSet cluster_prompts(const PromptPool& pool, std::size_t clusters, std::uint64_t seed) {
  pool.validate();
  if (clusters == 0) throw InvalidArgument("number of clusters must be at least 1");
  if (clusters > pool.template_count()) {
    log::warn("requested " + std::to_string(clusters) + " clusters but only " +
              std::to_string(pool.template_count()) + " templates per class; clamping");
    clusters = pool.template_count();
  }
  PrototypeSet out;
  out.clusters_per_class = clusters;
  for (std::size_t c = 0; c < pool.num_classes(); ++c) {
    const auto km = kmeans(pool.per_class[c], clusters, seed, c);
    for (std::size_t k = 0; k < km.centers.count(); ++k) {
      const auto row = km.centers.row(k);
      out.vectors.append_row(detail::unit({row.begin(), row.end()}, c));
      out.class_of.push_back(static_cast<int>(c));
    }
  }
  return out;
}

}  // namespace gsp
