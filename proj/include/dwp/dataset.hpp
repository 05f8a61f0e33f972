#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwp/matrix.hpp"

namespace dwp::io {

struct Dataset {
  Matrix x;  // P x D
  Matrix y;  // P x 1
  int rows() const { return x.rows(); }
};

struct DatasetSpec {
  std::string path;
  int target_column = -1;  // -1 selects the last column
  uint64_t split_seed = 0;
  int split_index = 0;
  double train_fraction = 0.9;
  bool skip_header = false;
  std::string train_index_file;  // optional externally supplied split
  std::string test_index_file;
};

// Strict numeric CSV. Throws ParseError(row, col) on the first non-numeric
// cell (including a header row unless skip_header), EmptyDataset when no data
// rows remain.
Dataset load_csv(const std::string& path, int target_column = -1, bool skip_header = false);

struct Split {
  Dataset train, test;
};

// Honors externally supplied index files when given, otherwise a seeded
// disjoint and exhaustive train/test partition.
Split split_dataset(const Dataset& d, const DatasetSpec& spec);

// Column statistics from the training set only; the same transform applies
// to test data, and the stored target scale converts log-likelihoods back to
// the original units.
struct Standardizer {
  std::vector<double> x_mean, x_std;
  double y_mean = 0.0, y_std = 1.0;

  static Standardizer fit(const Dataset& train);
  Dataset apply(const Dataset& d) const;
  Dataset invert(const Dataset& d) const;
};

}  // namespace dwp::io
