#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "gsp/dataset.hpp"
#include "gsp/labels.hpp"
#include "gsp/matrix.hpp"
#include "gsp/npy.hpp"
#include "oracles.hpp"

namespace {

// Writes an NPY v1.0 file with an arbitrary header dict and raw payload.
void write_npy(const std::filesystem::path& p, const std::string& dict, const std::string& payload) {
  std::string header = dict;
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  std::ofstream out(p, std::ios::binary);
  out.write("\x93NUMPY\x01\x00", 8);
  const char len[2] = {static_cast<char>(header.size() & 0xff), static_cast<char>(header.size() >> 8)};
  out.write(len, 2);
  out << header << payload;
}

template <typename T>
std::string bytes_of(const std::vector<T>& v) {
  std::string s(v.size() * sizeof(T), '\0');
  std::memcpy(s.data(), v.data(), s.size());
  return s;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Npy, LoadsTwoByThree) {
  oracle::TempDir dir;
  const auto p = dir / "m.npy";
  write_npy(p, "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }",
            bytes_of(std::vector<double>{1, 0, 0, 0, 1, 0}));
  const auto m = gsp::npy::load_matrix(p);
  EXPECT_EQ(m.count(), 2u);
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m(1, 1), 1.0);
}

TEST(Npy, WidensFloat32) {
  oracle::TempDir dir;
  const auto p = dir / "f4.npy";
  write_npy(p, "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2), }",
            bytes_of(std::vector<float>{0.25f, -1.5f}));
  const auto m = gsp::npy::load_matrix(p);
  EXPECT_EQ(m(0, 0), 0.25);
  EXPECT_EQ(m(0, 1), -1.5);
}

TEST(Npy, DistinctDiagnostics) {
  oracle::TempDir dir;
  const auto fortran = dir / "f.npy";
  write_npy(fortran, "{'descr': '<f8', 'fortran_order': True, 'shape': (1, 1), }", bytes_of(std::vector<double>{1}));
  EXPECT_TRUE(contains(error_of([&] { gsp::npy::load_matrix(fortran); }), "unsupported layout"));

  const auto ints = dir / "i.npy";
  write_npy(ints, "{'descr': '<i4', 'fortran_order': False, 'shape': (1, 1), }", bytes_of(std::vector<int>{1}));
  EXPECT_TRUE(contains(error_of([&] { gsp::npy::load_matrix(ints); }), "descr"));

  const auto rank3 = dir / "r.npy";
  write_npy(rank3, "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1), }",
            bytes_of(std::vector<double>{1}));
  EXPECT_TRUE(contains(error_of([&] { gsp::npy::load_matrix(rank3); }), "rank"));

  const auto nan = dir / "n.npy";
  write_npy(nan, "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 1), }",
            bytes_of(std::vector<double>{1, std::nan("")}));
  EXPECT_TRUE(contains(error_of([&] { gsp::npy::load_matrix(nan); }), "row 1"));

  const auto truncated = dir / "t.npy";
  write_npy(truncated, "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }",
            bytes_of(std::vector<double>{1, 2, 3}));
  EXPECT_TRUE(contains(error_of([&] { gsp::npy::load_matrix(truncated); }), "shape"));

  const auto junk = dir / "j.npy";
  std::ofstream(junk) << "not an npy file";
  EXPECT_TRUE(contains(error_of([&] { gsp::npy::load_matrix(junk); }), "magic"));
}

TEST(Npy, RoundTripIsBitwise) {
  oracle::TempDir dir;
  gsp::Rng rng(7);
  for (auto [n, d] : {std::pair<std::size_t, std::size_t>{17, 8}, {100, 16}}) {
    const auto m = oracle::random_matrix(rng, n, d);
    const auto p = dir / "rt.npy";
    gsp::npy::save_matrix(m, p);
    const auto back = gsp::npy::load_matrix(p);
    ASSERT_EQ(back.count(), n);
    ASSERT_EQ(back.dim(), d);
    EXPECT_EQ(std::memcmp(back.data().data(), m.data().data(), n * d * sizeof(double)), 0);
    // payload bytes are the tail of the file
    const auto file = oracle::slurp(p);
    EXPECT_EQ(file.size() % 64, (n * d * 8) % 64);
    EXPECT_EQ(file.substr(file.size() - n * d * 8), bytes_of(m.data()));
  }
}

TEST(Npy, OneByOneAndEmptyPath) {
  oracle::TempDir dir;
  const auto m = gsp::EmbeddingMatrix::from_rows({{0.5}});
  gsp::npy::save_matrix(m, dir / "one.npy");
  EXPECT_EQ(gsp::npy::load_matrix(dir / "one.npy"), m);
  EXPECT_THROW(gsp::npy::save_matrix(m, ""), gsp::IoError);
}

TEST(L2Normalize, PythagoreanRow) {
  const auto n = gsp::l2_normalize(gsp::EmbeddingMatrix::from_rows({{3, 4}}));
  EXPECT_DOUBLE_EQ(n(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(n(0, 1), 0.8);
}

TEST(L2Normalize, ZeroRowNamed) {
  EXPECT_EQ(error_of([] { gsp::l2_normalize(gsp::EmbeddingMatrix::from_rows({{1, 0}, {0, 0}})); }),
            "zero-norm row 1");
  EXPECT_EQ(error_of([] { gsp::l2_normalize(gsp::EmbeddingMatrix::from_rows({{0, 0}})); }), "zero-norm row 0");
}

TEST(L2Normalize, IdempotentAndCosineIsDot) {
  gsp::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = oracle::random_matrix(rng, 12, 9);
    const auto once = gsp::l2_normalize(raw);
    const auto twice = gsp::l2_normalize(once);
    for (std::size_t i = 0; i < once.data().size(); ++i) EXPECT_NEAR(once.data()[i], twice.data()[i], 1e-12);
    for (std::size_t r = 0; r < raw.count(); ++r) {
      EXPECT_NEAR(gsp::norm(once.row(r)), 1.0, 1e-6);
      for (std::size_t s = 0; s < raw.count(); ++s) {
        const double cos = gsp::dot(raw.row(r), raw.row(s)) / (gsp::norm(raw.row(r)) * gsp::norm(raw.row(s)));
        EXPECT_NEAR(gsp::dot(once.row(r), once.row(s)), cos, 1e-9);
      }
    }
  }
}

TEST(Labels, ParsesTable) {
  std::istringstream in("index,label\n0,2\n1,0");
  const auto t = gsp::parse_labels(in, 2, 3);
  ASSERT_EQ(t.entries.size(), 2u);
  EXPECT_EQ(t.entries[0].class_id, 2);
  EXPECT_EQ(t.entries[1].row_index, 1u);
}

TEST(Labels, Rejections) {
  auto parse = [](const std::string& text, std::size_t n, int c) {
    return error_of([&] {
      std::istringstream in(text);
      gsp::parse_labels(in, n, c);
    });
  };
  EXPECT_TRUE(contains(parse("index,label\n0,1\n0,2\n", 2, 3), "duplicate index"));
  EXPECT_TRUE(contains(parse("index,label\n0,3\n", 2, 3), "label out of range"));
  EXPECT_TRUE(contains(parse("index,label\n5,0\n", 2, 3), "out of range"));
  EXPECT_TRUE(contains(parse("idx,label\n0,0\n", 2, 3), "header"));
  EXPECT_TRUE(contains(parse("index,label\n0;1\n", 2, 3), "two fields"));
}

TEST(Labels, SaveLoadRoundTrip) {
  oracle::TempDir dir;
  gsp::LabelTable t{{{0, 1}, {3, 0}, {2, 1}}};
  gsp::save_labels(t, dir / "labels.csv");
  const auto back = gsp::load_labels(dir / "labels.csv", gsp::EmbeddingMatrix(4, 2), 2);
  ASSERT_EQ(back.entries.size(), 3u);
  EXPECT_EQ(back.entries[1].row_index, 3u);
  EXPECT_EQ(back.entries[2].class_id, 1);
}

TEST(Manifest, MissingFileIsDistinct) {
  oracle::TempDir dir;
  EXPECT_THROW(gsp::load_manifest(dir / "nope.json"), gsp::MissingFile);
}

TEST(Manifest, StackedPromptsAndPrototypes) {
  oracle::TempDir dir;
  gsp::Rng rng(3);
  const auto prompts = oracle::random_unit(rng, 6, 4);  // 2 classes x 3 templates
  const auto unl = oracle::random_unit(rng, 5, 4);
  gsp::npy::save_matrix(prompts, dir / "prompts.npy");
  gsp::npy::save_matrix(unl, dir / "unl.npy");
  std::ofstream(dir / "bounds.json") << R"({"offsets": [0, 3, 6]})";
  std::ofstream(dir / "manifest.json") << R"({"num_classes": 2, "class_names": ["a", "b"],
    "prompts": {"stacked": "prompts.npy", "boundaries": "bounds.json"}, "unlabeled": "unl.npy"})";
  const auto ds = gsp::load_dataset(gsp::load_manifest(dir / "manifest.json"));
  ASSERT_TRUE(ds.pool.has_value());
  EXPECT_EQ(ds.pool->num_classes(), 2u);
  EXPECT_EQ(ds.pool->template_count(), 3u);
  EXPECT_EQ(ds.unlabeled.count(), 5u);

  // prototype matrix + class map instead of a pool
  gsp::PrototypeSet set{prompts.slice(0, 2), {0, 1}, 1};
  gsp::save_prototypes(set, dir / "protos.npy", dir / "protos.json", {"a", "b"});
  std::ofstream(dir / "manifest2.json") << R"({"num_classes": 2, "class_names": ["a", "b"],
    "prototypes": {"matrix": "protos.npy", "class_map": "protos.json"}, "unlabeled": "unl.npy"})";
  const auto ds2 = gsp::load_dataset(gsp::load_manifest(dir / "manifest2.json"));
  ASSERT_TRUE(ds2.prototypes.has_value());
  EXPECT_EQ(ds2.prototypes->class_of, (std::vector<int>{0, 1}));
}

TEST(Manifest, ParseErrorCarriesPosition) {
  oracle::TempDir dir;
  std::ofstream(dir / "bad.json") << "{\n  \"num_classes\": 2,\n  oops\n}";
  const auto msg = error_of([&] { gsp::load_manifest(dir / "bad.json"); });
  EXPECT_TRUE(contains(msg, "line 3")) << msg;
}
