#include "gadv/data.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gadv {

namespace {

struct Box {
  double x_lo, x_hi, y_lo, y_hi;
};

// Canonical layouts are mapped affinely onto [0.1, 0.9]^2.
constexpr Box kMoonBox{-1.0, 2.0, -0.5, 1.0};
constexpr Box kRingBox{-1.0, 1.0, -1.0, 1.0};
constexpr Box kBlobBox{0.0, 1.0, 0.0, 1.0};

Eigen::Vector2d to_unit(const Box& b, double x, double y) {
  return {0.1 + 0.8 * (x - b.x_lo) / (b.x_hi - b.x_lo),
          0.1 + 0.8 * (y - b.y_lo) / (b.y_hi - b.y_lo)};
}

void check_config(const DataConfig& cfg) {
  require(cfg.n_per_class >= 1, "config", "n_per_class must be >= 1");
  require(cfg.noise_scale >= 0, "config", "noise_scale must be >= 0");
  require(cfg.meaningless_fraction >= 0 && cfg.meaningless_fraction <= 1,
          "config", "meaningless_fraction must be in [0, 1]");
  require(cfg.dim >= 2 && cfg.dim <= 20, "config", "dim must be in [2, 20]");
}

}  // namespace

int Dataset::meaningless_class() const {
  if (!class_names.empty() && class_names.back() == kMeaninglessClass)
    return int(class_names.size()) - 1;
  return -1;
}

void Dataset::validate() const {
  require(std::size_t(inputs.rows()) == labels.size(), "shape",
          "inputs and labels differ in length");
  require(inputs.allFinite(), "non_finite", "dataset contains NaN or Inf");
  require(in_unit_box(inputs), "domain", "dataset input outside [0,1]^D");
  for (int y : labels)
    require(y >= 0 && std::size_t(y) < class_names.size(), "label",
            "label " + std::to_string(y) + " out of range");
}

Dataset generate(const DataConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double pi = std::numbers::pi;

  const int n = cfg.n_per_class;
  Dataset ds;
  ds.inputs.resize(2 * n, 2);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n; ++i) {
      double x = 0, y = 0;
      Box box = kMoonBox;
      switch (cfg.kind) {
        case DataKind::two_moons: {
          const double t = pi * unit(rng);
          x = c == 0 ? std::cos(t) : 1.0 - std::cos(t);
          y = c == 0 ? std::sin(t) : 0.5 - std::sin(t);
          break;
        }
        case DataKind::rings: {
          const double t = 2 * pi * unit(rng);
          const double r = c == 0 ? 0.5 : 1.0;
          x = r * std::cos(t);
          y = r * std::sin(t);
          box = kRingBox;
          break;
        }
        case DataKind::blobs:
          x = c == 0 ? 0.25 : 0.75;
          y = x;
          box = kBlobBox;
          break;
      }
      // Noise is drawn in canonical units before rescaling.
      x += cfg.noise_scale * noise(rng);
      y += cfg.noise_scale * noise(rng);
      const Eigen::Vector2d u = to_unit(box, x, y).cwiseMax(0.0).cwiseMin(1.0);
      ds.inputs.row(c * n + i) = u.transpose();
      ds.labels.push_back(c);
    }
  }
  const char* stem = cfg.kind == DataKind::two_moons ? "moon_"
                     : cfg.kind == DataKind::rings   ? "ring_"
                                                     : "blob_";
  ds.class_names = {std::string(stem) + "0", std::string(stem) + "1"};

  if (cfg.dim > 2) {
    // Orthonormal columns scaled by 1/sqrt(2) keep 0.5 + Q (p - 0.5) inside
    // the unit box for any p in it.
    Matrix gauss(cfg.dim, 2);
    for (Eigen::Index i = 0; i < gauss.size(); ++i) gauss.data()[i] = noise(rng);
    Eigen::HouseholderQR<Matrix> qr(gauss);
    const Matrix q = qr.householderQ() * Matrix::Identity(cfg.dim, 2);
    const Matrix centered = ds.inputs.array() - 0.5;
    Matrix lifted = (centered * q.transpose() / std::sqrt(2.0)).array() + 0.5;
    ds.inputs = lifted.cwiseMax(0.0).cwiseMin(1.0);
  }

  if (cfg.meaningless_fraction > 0)
    ds = augment_meaningless(ds, cfg.meaningless_fraction, cfg.rng_seed + 1);
  return ds;
}

Dataset augment_meaningless(const Dataset& ds, double fraction,
                            std::uint64_t rng_seed) {
  require(fraction >= 0, "config", "meaningless fraction must be >= 0");
  // The small slack keeps e.g. 0.1 * 200 from rounding up to 21.
  const auto extra =
      Eigen::Index(std::ceil(fraction * double(ds.size()) - 1e-9));
  Dataset out;
  out.class_names = ds.class_names;
  out.class_names.emplace_back(kMeaninglessClass);
  const int label = int(out.class_names.size()) - 1;
  out.inputs.resize(ds.size() + extra, ds.dim());
  out.inputs.topRows(ds.size()) = ds.inputs;
  out.labels = ds.labels;
  Rng rng(rng_seed);
  for (Eigen::Index i = 0; i < extra; ++i) {
    out.inputs.row(ds.size() + i) = uniform_vector(ds.dim(), 0.0, 1.0, rng).transpose();
    out.labels.push_back(label);
  }
  return out;
}

Split train_test_split(const Dataset& ds, double test_fraction,
                       std::uint64_t rng_seed) {
  require(test_fraction >= 0 && test_fraction < 1, "config",
          "test_fraction must be in [0, 1)");
  std::vector<Eigen::Index> order(std::size_t(ds.size()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  Rng rng(rng_seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = std::size_t(std::lround(test_fraction * double(ds.size())));

  auto take = [&](std::size_t from, std::size_t to) {
    Dataset part;
    part.class_names = ds.class_names;
    part.inputs.resize(Eigen::Index(to - from), ds.dim());
    for (std::size_t k = from; k < to; ++k) {
      part.inputs.row(Eigen::Index(k - from)) = ds.inputs.row(order[k]);
      part.labels.push_back(ds.labels[std::size_t(order[k])]);
    }
    return part;
  };
  return {take(n_test, order.size()), take(0, n_test)};
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  require(bool(os), "io", "cannot open " + path + " for writing");
  os << "gadv-dataset," << ds.dim();
  for (const auto& name : ds.class_names) os << ',' << name;
  os << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.inputs(i, j));
      os << buf << ',';
    }
    os << ds.labels[std::size_t(i)] << '\n';
  }
  require(bool(os), "io", "write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), "io", "cannot open " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };

  std::string line;
  require(bool(std::getline(is, line)), "parse", path + ": empty file");
  const auto header = split(line);
  require(header.size() >= 4 && header[0] == "gadv-dataset", "parse",
          path + ": missing gadv-dataset header");
  const int dim = std::atoi(header[1].c_str());
  require(dim > 0, "parse", path + ": bad dimension in header");

  Dataset ds;
  ds.class_names.assign(header.begin() + 2, header.end());
  std::vector<double> values;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    require(cells.size() == std::size_t(dim) + 1, "parse",
            path + ": row " + std::to_string(row) + " has " +
                std::to_string(cells.size()) + " fields, expected " +
                std::to_string(dim + 1));
    for (int j = 0; j < dim; ++j) {
      char* end = nullptr;
      const double v = std::strtod(cells[std::size_t(j)].c_str(), &end);
      require(end && *end == '\0' && !cells[std::size_t(j)].empty(), "parse",
              path + ": row " + std::to_string(row) + ": bad number '" +
                  cells[std::size_t(j)] + "'");
      values.push_back(v);
    }
    ds.labels.push_back(std::atoi(cells.back().c_str()));
  }
  ds.inputs = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>(
      values.data(), Eigen::Index(ds.labels.size()), dim);
  ds.validate();
  return ds;
}

DataKind parse_data_kind(const std::string& s) {
  if (s == "two_moons" || s == "moons") return DataKind::two_moons;
  if (s == "blobs") return DataKind::blobs;
  if (s == "rings") return DataKind::rings;
  throw Error("config", "unknown dataset kind '" + s + "'");
}

}  // namespace gadv
