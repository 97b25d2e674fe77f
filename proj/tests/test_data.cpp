#include "gadv/data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gadv;

TEST(Generate, TwoMoonsCountsAndDomain) {
  DataConfig c;
  c.n_per_class = 100;
  const Dataset ds = generate(c);
  ASSERT_EQ(ds.size(), 200);
  ASSERT_EQ(ds.dim(), 2);
  EXPECT_EQ(ds.class_names.size(), 2u);
  int ones = 0;
  for (int y : ds.labels) {
    EXPECT_TRUE(y == 0 || y == 1);
    ones += y;
  }
  EXPECT_EQ(ones, 100);
  EXPECT_TRUE(in_unit_box(ds.inputs.transpose()));
}

TEST(Generate, NoiselessMoonsLieOnArcs) {
  DataConfig c;
  c.n_per_class = 60;
  c.noise_scale = 0;
  const Dataset ds = generate(c);
  // Invert the affine map [-1,2]x[-0.5,1] -> [0.1,0.9]^2 and check the radius
  // about each arc's center, plus the half-plane of each arc.
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const double x = -1.0 + (ds.inputs(i, 0) - 0.1) / 0.8 * 3.0;
    const double y = -0.5 + (ds.inputs(i, 1) - 0.1) / 0.8 * 1.5;
    if (ds.labels[std::size_t(i)] == 0) {
      EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-12);
      EXPECT_GE(y, -1e-12);
    } else {
      EXPECT_NEAR(std::hypot(x - 1.0, y - 0.5), 1.0, 1e-12);
      EXPECT_LE(y, 0.5 + 1e-12);
    }
  }
}

TEST(Generate, SameSeedSameData) {
  DataConfig c;
  c.rng_seed = 42;
  c.meaningless_fraction = 0.1;
  const Dataset a = generate(c), b = generate(c);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  c.rng_seed = 43;
  EXPECT_NE(generate(c).inputs, a.inputs);
}

TEST(Generate, OtherKindsAndEmbedding) {
  for (DataKind k : {DataKind::blobs, DataKind::rings, DataKind::two_moons}) {
    DataConfig c;
    c.kind = k;
    c.n_per_class = 50;
    c.dim = 7;
    c.noise_scale = 0.3;
    const Dataset ds = generate(c);
    EXPECT_EQ(ds.dim(), 7);
    EXPECT_NO_THROW(ds.validate());
  }
  DataConfig bad;
  bad.n_per_class = 0;
  EXPECT_THROW(generate(bad), Error);
  bad.n_per_class = 5;
  bad.noise_scale = -1;
  EXPECT_THROW(generate(bad), Error);
}

TEST(Augment, OneTenth) {
  DataConfig c;
  c.n_per_class = 100;
  const Dataset base = generate(c);
  const Dataset ds = augment_meaningless(base, 0.1, 9);
  ASSERT_EQ(ds.size(), 220);
  ASSERT_EQ(ds.class_names.back(), "meaningless");
  EXPECT_EQ(ds.meaningless_class(), 2);
  int extra = 0;
  for (int y : ds.labels) extra += y == 2;
  EXPECT_EQ(extra, 20);
  EXPECT_EQ(ds.inputs.topRows(200), base.inputs);
  EXPECT_TRUE(std::equal(base.labels.begin(), base.labels.end(), ds.labels.begin()));
}

TEST(Augment, ZeroFractionOnlyAddsClass) {
  DataConfig c;
  c.n_per_class = 30;
  const Dataset base = generate(c);
  const Dataset ds = augment_meaningless(base, 0.0, 1);
  EXPECT_EQ(ds.inputs, base.inputs);
  EXPECT_EQ(ds.labels, base.labels);
  EXPECT_EQ(ds.class_names.size(), 3u);
  EXPECT_EQ(ds.class_names.back(), "meaningless");
}

TEST(Augment, AppendedPointsLookUniform) {
  DataConfig c;
  c.n_per_class = 300;
  c.dim = 4;
  const Dataset ds = augment_meaningless(generate(c), 1.0, 77);
  const Matrix extra = ds.inputs.bottomRows(600);
  for (Eigen::Index j = 0; j < extra.cols(); ++j) {
    const double mean = extra.col(j).mean();
    EXPECT_GE(mean, 0.4);
    EXPECT_LE(mean, 0.6);
  }
}

TEST(Split, PartitionsRows) {
  DataConfig c;
  c.n_per_class = 50;
  const Dataset ds = generate(c);
  const Split s = train_test_split(ds, 0.2, 7);
  EXPECT_EQ(s.test.size(), 20);
  EXPECT_EQ(s.train.size(), 80);
  const Split again = train_test_split(ds, 0.2, 7);
  EXPECT_EQ(s.test.inputs, again.test.inputs);
}

TEST(DatasetFile, RoundTrip) {
  DataConfig c;
  c.n_per_class = 40;
  c.dim = 3;
  c.meaningless_fraction = 0.1;
  const Dataset ds = generate(c);
  const auto path = std::filesystem::temp_directory_path() / "gadv_data_roundtrip.csv";
  save_dataset(ds, path.string());
  const Dataset back = load_dataset(path.string());
  EXPECT_EQ(back.inputs, ds.inputs);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.class_names, ds.class_names);
  std::filesystem::remove(path);
}

TEST(DatasetFile, RejectsOutOfBoxRow) {
  const auto path = std::filesystem::temp_directory_path() / "gadv_data_bad.csv";
  {
    std::ofstream os(path);
    os << "gadv-dataset,2,a,b\n0.1,0.2,0\n1.5,0.2,1\n";
  }
  EXPECT_THROW(load_dataset(path.string()), Error);
  std::filesystem::remove(path);
}
