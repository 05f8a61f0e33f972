#pragma once

#include <stdexcept>
#include <string>

namespace dwp {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Cholesky pivot fell below the positive-definiteness threshold.
struct NotPositiveDefinite : Error {
  int pivot;
  explicit NotPositiveDefinite(int pivot_index)
      : Error("matrix not positive definite at pivot " +
              std::to_string(pivot_index)),
        pivot(pivot_index) {}
};

struct SingularTriangular : Error {
  int index;
  explicit SingularTriangular(int diag_index)
      : Error("triangular matrix has zero diagonal at index " +
              std::to_string(diag_index)),
        index(diag_index) {}
};

struct SingularLeadingBlock : Error {
  explicit SingularLeadingBlock(const std::string& msg) : Error(msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
  int row, col;
  ParseError(int r, int c, const std::string& what)
      : Error("parse error at row " + std::to_string(r) + ", column " +
              std::to_string(c) + ": " + what),
        row(r),
        col(c) {}
};

struct EmptyDataset : Error {
  EmptyDataset() : Error("dataset contains no rows") {}
};

struct NonFiniteGradient : Error {
  std::string param;
  explicit NonFiniteGradient(const std::string& param_name)
      : Error("non-finite gradient for parameter '" + param_name + "'"),
        param(param_name) {}
};

}  // namespace dwp
