#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/labels.hpp"
#include "gsp/matrix.hpp"
#include "gsp/prompt_bank.hpp"
#include "gsp/rng.hpp"

namespace gsp::synth {

enum class Shape { gaussian_blobs, bridged_chain };

inline std::string to_string(Shape s) { return s == Shape::gaussian_blobs ? "gaussian_blobs" : "bridged_chain"; }

inline Shape parse_shape(const std::string& s) {
  if (s == "gaussian_blobs") return Shape::gaussian_blobs;
  if (s == "bridged_chain") return Shape::bridged_chain;
  throw InvalidArgument("unknown manifold shape '" + s + "'");
}

/**
 * One generating cluster. ID clusters define a class (and its prompt pool);
 * OOD clusters only contribute unlabeled samples.
 *
 * Under `bridged_chain`, ID samples are spread along the geodesic from
 * `mean` toward `chain_toward`, covering `chain_degrees` of arc; only the
 * head of the chain sits near the class prototype.
 */
struct Cluster {
  std::vector<double> mean;
  std::size_t count = 0;
  double spread = 0.05;  // std of isotropic tangent-space noise
  bool in_distribution = true;
  std::vector<double> chain_toward;  // bridged_chain only (ID clusters)
  double chain_degrees = 0.0;
};

struct SynthSpec {
  std::size_t dim = 0;
  Shape shape = Shape::gaussian_blobs;
  std::uint64_t seed = 0;
  std::vector<Cluster> clusters;
  std::size_t templates_per_class = 16;
  double prompt_spread = 0.05;
  double prototype_offset_degrees = 0.0;  // rotation of the prompt anchor away from the class mean
  std::size_t labeled_per_class = 0;

  [[nodiscard]] std::size_t num_classes() const {
    return static_cast<std::size_t>(
        std::count_if(clusters.begin(), clusters.end(), [](const Cluster& c) { return c.in_distribution; }));
  }
};

struct SynthDataset {
  PromptPool pool;
  PrototypeSet prototypes;  // mean prototypes of the pool
  EmbeddingMatrix unlabeled;
  std::vector<bool> is_id;
  std::vector<int> unlabeled_class;  // -1 for OOD samples
  EmbeddingMatrix labeled;
  LabelTable labels;
};

// Stream ids; each component draws from its own stream of the spec seed.
inline constexpr std::uint64_t kStreamPrompts = 1;
inline constexpr std::uint64_t kStreamSamples = 2;
inline constexpr std::uint64_t kStreamLabeled = 3;
inline constexpr std::uint64_t kStreamShuffle = 4;
inline constexpr std::uint64_t kStreamAnchor = 5;

namespace detail {

inline std::vector<double> unit_vector(std::vector<double> v, const std::string& what) {
  const double n = norm(v);
  if (n == 0.0 || !std::isfinite(n)) throw InvalidArgument(what + " has zero norm");
  for (double& x : v) x /= n;
  return v;
}

// Gaussian in the tangent space at `base`, mapped back to the sphere.
inline std::vector<double> perturb(const std::vector<double>& base, double spread, Rng& rng) {
  std::vector<double> g(base.size());
  for (double& x : g) x = rng.normal();
  const double along = dot(g, base);
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + spread * (g[i] - along * base[i]);
  return unit_vector(std::move(out), "perturbed sample");
}

// Point at `radians` along the great circle from unit `from` toward `toward`.
inline std::vector<double> rotate_toward(const std::vector<double>& from, const std::vector<double>& toward,
                                         double radians) {
  std::vector<double> ortho(from.size());
  const double c = dot(toward, from);
  for (std::size_t i = 0; i < from.size(); ++i) ortho[i] = toward[i] - c * from[i];
  ortho = unit_vector(std::move(ortho), "chain direction (parallel to the mean)");
  std::vector<double> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) out[i] = std::cos(radians) * from[i] + std::sin(radians) * ortho[i];
  return out;
}

inline std::vector<double> random_direction(std::size_t dim, Rng& rng) {
  std::vector<double> g(dim);
  for (double& x : g) x = rng.normal();
  return unit_vector(std::move(g), "random direction");
}

}  // namespace detail

inline void validate(const SynthSpec& spec) {
  if (spec.dim < 2) throw InvalidArgument("synth: dim must be at least 2");
  if (spec.num_classes() == 0) throw InvalidArgument("synth: need at least one in-distribution cluster");
  if (spec.templates_per_class == 0) throw InvalidArgument("synth: templates_per_class must be positive");
  if (spec.prompt_spread < 0.0) throw InvalidArgument("synth: prompt_spread must be non-negative");
  bool any_ood = false;
  for (std::size_t i = 0; i < spec.clusters.size(); ++i) {
    const auto& c = spec.clusters[i];
    const auto tag = "synth: cluster " + std::to_string(i);
    if (c.mean.size() != spec.dim) throw InvalidArgument(tag + " mean has wrong dimension");
    detail::unit_vector(c.mean, tag + " mean");
    if (c.count == 0) throw InvalidArgument(tag + " count must be at least 1");
    if (c.spread < 0.0) throw InvalidArgument(tag + " spread must be non-negative");
    any_ood = any_ood || !c.in_distribution;
    if (spec.shape == Shape::bridged_chain && c.in_distribution) {
      if (c.chain_toward.size() != spec.dim) throw InvalidArgument(tag + " needs chain_toward of dimension dim");
      if (c.chain_degrees <= 0.0) throw InvalidArgument(tag + " needs positive chain_degrees");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = spec.clusters[j];
      if (c.spread == 0.0 && o.spread == 0.0 && c.mean == o.mean) {
        throw InvalidArgument(tag + " duplicates the mean of cluster " + std::to_string(j) + " with zero spread");
      }
    }
  }
  if (!any_ood) throw InvalidArgument("synth: need at least one out-of-distribution cluster");
}

/// Deterministic for a fixed spec (including its seed).
inline SynthDataset generate(const SynthSpec& spec) {
  validate(spec);
  SynthDataset ds;
  Rng prompt_rng(spec.seed, kStreamPrompts);
  Rng sample_rng(spec.seed, kStreamSamples);
  Rng labeled_rng(spec.seed, kStreamLabeled);
  Rng anchor_rng(spec.seed, kStreamAnchor);
  const double deg = std::numbers::pi / 180.0;

  EmbeddingMatrix samples;
  std::vector<int> sample_class;
  int cls = 0;
  for (const auto& c : spec.clusters) {
    const auto mean = detail::unit_vector(c.mean, "cluster mean");
    std::vector<double> toward;
    if (spec.shape == Shape::bridged_chain && c.in_distribution) {
      toward = detail::unit_vector(c.chain_toward, "chain_toward");
    }
    auto draw = [&](Rng& rng) {
      if (toward.empty()) return detail::perturb(mean, c.spread, rng);
      const double t = rng.uniform();
      return detail::perturb(detail::rotate_toward(mean, toward, t * c.chain_degrees * deg), c.spread, rng);
    };
    for (std::size_t i = 0; i < c.count; ++i) {
      samples.append_row(draw(sample_rng));
      sample_class.push_back(c.in_distribution ? cls : -1);
    }
    if (!c.in_distribution) continue;

    auto anchor = mean;
    if (spec.prototype_offset_degrees > 0.0) {
      anchor = detail::rotate_toward(mean, detail::random_direction(spec.dim, anchor_rng),
                                     spec.prototype_offset_degrees * deg);
    }
    EmbeddingMatrix prompts;
    for (std::size_t t = 0; t < spec.templates_per_class; ++t) {
      prompts.append_row(detail::perturb(anchor, spec.prompt_spread, prompt_rng));
    }
    ds.pool.per_class.push_back(std::move(prompts));

    for (std::size_t i = 0; i < spec.labeled_per_class; ++i) {
      ds.labels.entries.push_back({ds.labeled.count(), cls});
      ds.labeled.append_row(draw(labeled_rng));
    }
    ++cls;
  }

  // shuffle so that row order carries no class information
  std::vector<std::size_t> order(samples.count());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(spec.seed, kStreamShuffle);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
  ds.unlabeled = samples.select(order);
  for (auto i : order) {
    ds.unlabeled_class.push_back(sample_class[i]);
    ds.is_id.push_back(sample_class[i] >= 0);
  }
  ds.prototypes = mean_prototypes(ds.pool);
  return ds;
}

}  // namespace gsp::synth
