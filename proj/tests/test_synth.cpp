#include <gtest/gtest.h>

#include <algorithm>

#include "gsp/commands.hpp"
#include "gsp/metrics.hpp"
#include "gsp/pipeline.hpp"
#include "gsp/synth.hpp"
#include "oracles.hpp"

namespace {

gsp::synth::SynthSpec published(const char* name) {
  return gsp::cli::load_synth_spec(std::string(GSP_DATA_DIR) + "/" + name).spec;
}

gsp::Dataset as_dataset(const gsp::synth::SynthDataset& d) {
  gsp::Dataset ds;
  ds.pool = d.pool;
  ds.unlabeled = d.unlabeled;
  ds.labeled = d.labeled;
  ds.labels = d.labels;
  return ds;
}

}  // namespace

TEST(Synth, Deterministic) {
  auto spec = published("bridged_chain.json");
  spec.labeled_per_class = 3;
  const auto a = gsp::synth::generate(spec);
  const auto b = gsp::synth::generate(spec);
  EXPECT_EQ(a.unlabeled, b.unlabeled);
  EXPECT_EQ(a.prototypes.vectors, b.prototypes.vectors);
  EXPECT_EQ(a.labeled, b.labeled);
  EXPECT_EQ(a.is_id, b.is_id);
  spec.seed = 1;
  EXPECT_NE(gsp::synth::generate(spec).unlabeled, a.unlabeled);
}

TEST(Synth, UnitRowsAndExactCounts) {
  for (const char* name : {"bridged_chain.json", "gaussian_blobs.json"}) {
    auto spec = published(name);
    spec.labeled_per_class = 2;
    const auto d = gsp::synth::generate(spec);
    std::size_t id = 0, ood = 0;
    for (const auto& c : spec.clusters) (c.in_distribution ? id : ood) += c.count;
    EXPECT_EQ(static_cast<std::size_t>(std::count(d.is_id.begin(), d.is_id.end(), true)), id);
    EXPECT_EQ(static_cast<std::size_t>(std::count(d.is_id.begin(), d.is_id.end(), false)), ood);
    for (const auto* m : {&d.unlabeled, &d.labeled, &d.prototypes.vectors}) {
      for (std::size_t r = 0; r < m->count(); ++r) EXPECT_NEAR(gsp::norm(m->row(r)), 1.0, 1e-6);
    }
    for (const auto& p : d.pool.per_class) {
      for (std::size_t r = 0; r < p.count(); ++r) EXPECT_NEAR(gsp::norm(p.row(r)), 1.0, 1e-6);
    }
    EXPECT_EQ(d.labels.entries.size(), 2 * spec.num_classes());
    EXPECT_EQ(d.pool.num_classes(), spec.num_classes());
  }
}

TEST(Synth, RejectsDegenerateSpecs) {
  gsp::synth::SynthSpec spec;
  spec.dim = 2;
  spec.clusters = {{{1, 0}, 5, 0.0, true, {}, 0}, {{1, 0}, 5, 0.0, false, {}, 0}};
  EXPECT_THROW(gsp::synth::generate(spec), gsp::InvalidArgument);
  spec.clusters = {{{1, 0}, 5, 0.1, true, {}, 0}};
  EXPECT_THROW(gsp::synth::generate(spec), gsp::InvalidArgument);  // no OOD cluster
  spec.clusters = {{{0, 0}, 5, 0.1, true, {}, 0}, {{0, 1}, 5, 0.1, false, {}, 0}};
  EXPECT_THROW(gsp::synth::generate(spec), gsp::InvalidArgument);  // zero mean
  spec.shape = gsp::synth::Shape::bridged_chain;
  spec.clusters = {{{1, 0}, 5, 0.1, true, {}, 0}, {{0, 1}, 5, 0.1, false, {}, 0}};
  EXPECT_THROW(gsp::synth::generate(spec), gsp::InvalidArgument);  // chain without direction
}

TEST(Synth, BlobsAreEasyForCosine) {
  const auto d = gsp::synth::generate(published("gaussian_blobs.json"));
  EXPECT_EQ(d.unlabeled.count(), 200u);
  const auto scores = gsp::cosine_scores(d.unlabeled, d.prototypes);
  EXPECT_GE(gsp::auroc(scores, d.is_id), 0.99);
}

TEST(Synth, ChainTailIsFarFromPrototype) {
  const auto spec = published("bridged_chain.json");
  const auto d = gsp::synth::generate(spec);
  // some ID samples lie beyond 60 degrees from every prototype
  std::size_t far = 0;
  for (std::size_t i = 0; i < d.unlabeled.count(); ++i) {
    if (!d.is_id[i]) continue;
    double best = -1;
    for (std::size_t p = 0; p < d.prototypes.size(); ++p) {
      best = std::max(best, gsp::dot(d.unlabeled.row(i), d.prototypes.vectors.row(p)));
    }
    if (best < 0.5) ++far;
  }
  EXPECT_GT(far, 10u);
}

TEST(Synth, GspBeatsCosineOnBridgedChain) {
  auto spec = published("bridged_chain.json");
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    spec.seed = seed;
    const auto d = gsp::synth::generate(spec);
    const auto ds = as_dataset(d);
    gsp::MethodConfig cfg;
    cfg.seed = seed;
    const double cos = gsp::auroc(gsp::run_method(ds, gsp::Method::cosine, cfg).scores, d.is_id);
    const double full = gsp::auroc(gsp::run_method(ds, gsp::Method::gsp, cfg).scores, d.is_id);
    if (full - cos >= 0.05) ++wins;
  }
  EXPECT_GE(wins, 90);
}

TEST(Synth, ShapeNames) {
  EXPECT_EQ(gsp::synth::parse_shape("bridged_chain"), gsp::synth::Shape::bridged_chain);
  EXPECT_EQ(gsp::synth::to_string(gsp::synth::Shape::gaussian_blobs), "gaussian_blobs");
  EXPECT_THROW(gsp::synth::parse_shape("spiral"), gsp::InvalidArgument);
}
