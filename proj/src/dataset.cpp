#include "dwp/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dwp/rng.hpp"

namespace dwp::io {

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, int row, int col) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s) throw ParseError(row, col, "not a number: '" + cell + "'");
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  if (*end != '\0') throw ParseError(row, col, "trailing junk: '" + cell + "'");
  return v;
}

std::vector<int> read_index_file(const std::string& path, int max_row) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read index file " + path);
  std::vector<int> idx;
  long v;
  while (f >> v) {
    if (v < 0 || v >= max_row) throw Error("index out of range in " + path);
    idx.push_back(int(v));
  }
  return idx;
}

Dataset take_rows(const Dataset& d, const std::vector<int>& idx) {
  Dataset out;
  out.x = Matrix(int(idx.size()), d.x.cols());
  out.y = Matrix(int(idx.size()), 1);
  for (size_t r = 0; r < idx.size(); ++r) {
    for (int c = 0; c < d.x.cols(); ++c) out.x(int(r), c) = d.x(idx[r], c);
    out.y(int(r), 0) = d.y(idx[r], 0);
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path, int target_column, bool skip_header) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int file_row = 0;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      ++file_row;
      continue;
    }
    if (first && skip_header) {
      first = false;
      ++file_row;
      continue;
    }
    first = false;
    const auto cells = split_cells(line);
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c)
      vals.push_back(parse_cell(cells[c], file_row, int(c)));
    if (!rows.empty() && vals.size() != rows.front().size())
      throw ParseError(file_row, 0, "inconsistent column count");
    rows.push_back(std::move(vals));
    ++file_row;
  }
  if (rows.empty()) throw EmptyDataset();

  const int ncol = int(rows.front().size());
  if (ncol < 2) throw ParseError(0, 0, "need at least one feature and one target column");
  const int tcol = target_column < 0 ? ncol - 1 : target_column;
  if (tcol >= ncol) throw DomainError("target column out of range");

  Dataset d;
  d.x = Matrix(int(rows.size()), ncol - 1);
  d.y = Matrix(int(rows.size()), 1);
  for (size_t r = 0; r < rows.size(); ++r) {
    int xc = 0;
    for (int c = 0; c < ncol; ++c) {
      if (c == tcol)
        d.y(int(r), 0) = rows[r][c];
      else
        d.x(int(r), xc++) = rows[r][c];
    }
  }
  return d;
}

Split split_dataset(const Dataset& d, const DatasetSpec& spec) {
  const int n = d.rows();
  if (n < 2) throw EmptyDataset();

  std::vector<int> train_idx, test_idx;
  if (!spec.train_index_file.empty() || !spec.test_index_file.empty()) {
    if (spec.train_index_file.empty() || spec.test_index_file.empty())
      throw Error("both train and test index files are required");
    train_idx = read_index_file(spec.train_index_file, n);
    test_idx = read_index_file(spec.test_index_file, n);
  } else {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    RngStream rng(spec.split_seed, uint64_t(spec.split_index));
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[int(rng.next_u64() % uint64_t(i + 1))]);
    int ntrain = int(std::lround(spec.train_fraction * n));
    ntrain = std::min(std::max(ntrain, 1), n - 1);
    train_idx.assign(perm.begin(), perm.begin() + ntrain);
    test_idx.assign(perm.begin() + ntrain, perm.end());
  }

  return {take_rows(d, train_idx), take_rows(d, test_idx)};
}

Standardizer Standardizer::fit(const Dataset& train) {
  if (train.rows() < 1) throw EmptyDataset();
  const int n = train.rows(), dcols = train.x.cols();
  Standardizer s;
  s.x_mean.assign(dcols, 0.0);
  s.x_std.assign(dcols, 0.0);
  for (int c = 0; c < dcols; ++c) {
    double m = 0.0;
    for (int r = 0; r < n; ++r) m += train.x(r, c);
    m /= n;
    double v = 0.0;
    for (int r = 0; r < n; ++r) v += (train.x(r, c) - m) * (train.x(r, c) - m);
    s.x_mean[c] = m;
    s.x_std[c] = std::max(std::sqrt(v / n), 1e-8);
  }
  double m = 0.0;
  for (int r = 0; r < n; ++r) m += train.y(r, 0);
  m /= n;
  double v = 0.0;
  for (int r = 0; r < n; ++r) v += (train.y(r, 0) - m) * (train.y(r, 0) - m);
  s.y_mean = m;
  s.y_std = std::max(std::sqrt(v / n), 1e-8);
  return s;
}

Dataset Standardizer::apply(const Dataset& d) const {
  Dataset out = d;
  for (int r = 0; r < d.rows(); ++r) {
    for (int c = 0; c < d.x.cols(); ++c) out.x(r, c) = (d.x(r, c) - x_mean[c]) / x_std[c];
    out.y(r, 0) = (d.y(r, 0) - y_mean) / y_std;
  }
  return out;
}

Dataset Standardizer::invert(const Dataset& d) const {
  Dataset out = d;
  for (int r = 0; r < d.rows(); ++r) {
    for (int c = 0; c < d.x.cols(); ++c) out.x(r, c) = d.x(r, c) * x_std[c] + x_mean[c];
    out.y(r, 0) = d.y(r, 0) * y_std + y_mean;
  }
  return out;
}

}  // namespace dwp::io
