#pragma once

#include "gadv/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gadv {

inline constexpr const char* kMeaninglessClass = "meaningless";

enum class DataKind { two_moons, blobs, rings };

struct DataConfig {
  DataKind kind = DataKind::two_moons;
  int n_per_class = 100;
  double noise_scale = 0.1;
  double meaningless_fraction = 0.0;
  std::uint64_t rng_seed = 0;
  // Inputs above 2 dimensions are a seeded linear embedding of the 2-D data.
  int dim = 2;
};

/// Labeled points in the unit box, one example per row of `inputs`.
struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
  Vector input(Eigen::Index i) const { return inputs.row(i).transpose(); }

  /// Index of the trailing "meaningless" class, or -1.
  int meaningless_class() const;

  void validate() const;
};

Dataset generate(const DataConfig& cfg);

/// Appends ceil(fraction * size) uniform points from the unit box under a new
/// final class "meaningless". Existing rows are left untouched.
Dataset augment_meaningless(const Dataset& ds, double fraction,
                            std::uint64_t rng_seed);

struct Split {
  Dataset train;
  Dataset test;
};

/// Seeded shuffle, then the first round(test_fraction * size) rows go to test.
Split train_test_split(const Dataset& ds, double test_fraction,
                       std::uint64_t rng_seed);

/// Rows of `ds` whose label satisfies `keep`.
template <typename Pred>
Dataset filter(const Dataset& ds, Pred keep) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    if (keep(ds.labels[std::size_t(i)])) rows.push_back(i);
  Dataset out;
  out.class_names = ds.class_names;
  out.inputs.resize(Eigen::Index(rows.size()), ds.dim());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.inputs.row(Eigen::Index(k)) = ds.inputs.row(rows[k]);
    out.labels.push_back(ds.labels[std::size_t(rows[k])]);
  }
  return out;
}

// Text format: a header row `gadv-dataset,<D>,<class names...>` followed by
// one row per example with D floats and the integer label.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

DataKind parse_data_kind(const std::string& s);

}  // namespace gadv
