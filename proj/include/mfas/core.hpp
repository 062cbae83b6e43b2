#pragma once

// Shared domain types: datasets, parameter boxes, error types and CSV I/O.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfas {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: dimension mismatch, out-of-range option, malformed file.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a result (factorization, divergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A higher-fidelity input row is missing from the lower-fidelity design.
class HierarchyError : public InvalidArgument {
 public:
  HierarchyError(std::size_t level, Index row, const std::string& what)
      : InvalidArgument(what), level_(level), row_(row) {}

  /// Zero-based index of the higher-fidelity dataset that failed.
  std::size_t level() const { return level_; }
  /// Row of that dataset absent from the level below.
  Index row() const { return row_; }

 private:
  std::size_t level_;
  Index row_;
};

/// Axis-aligned parameter box with lower[j] < upper[j].
class Box {
 public:
  Box(Vector lower, Vector upper);

  /// The box [-1, 1]^dim used for normalized design coordinates.
  static Box centered(Index dim);
  static Box unit(Index dim);

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector width() const { return upper_ - lower_; }

  bool contains(const Eigen::Ref<const Vector>& x) const;

  /// Rows of `x` mapped affinely onto [-1, 1]^dim.
  Matrix to_centered(const Matrix& x) const;
  /// Inverse of to_centered.
  Matrix from_centered(const Matrix& t) const;
  /// Rows of `t` in [0, 1]^dim mapped into the box.
  Matrix from_unit(const Matrix& t) const;

  bool operator==(const Box&) const = default;

 private:
  Vector lower_;
  Vector upper_;
};

/// Samples of a scalar function at one fidelity level.
///
/// Inputs are N x m, outputs N, optional gradients N x m. All entries finite,
/// N >= 1 and m >= 1. Immutable after construction.
class Dataset {
 public:
  Dataset(Matrix inputs, Vector outputs, std::optional<Matrix> gradients = std::nullopt);

  Index size() const { return inputs_.rows(); }
  Index dim() const { return inputs_.cols(); }
  const Matrix& inputs() const { return inputs_; }
  const Vector& outputs() const { return outputs_; }
  bool has_gradients() const { return gradients_.has_value(); }
  /// Throws InvalidArgument when the dataset carries no gradients.
  const Matrix& gradients() const;

  /// First n rows.
  Dataset head(Index n) const;
  /// Row of `x` among the inputs (exact comparison), if present.
  std::optional<Index> find_row(const Eigen::Ref<const Vector>& x) const;

 private:
  Matrix inputs_;
  Vector outputs_;
  std::optional<Matrix> gradients_;
};

/// Row of `high` that does not appear among the rows of `low`, if any.
/// Membership uses exact floating-point equality.
std::optional<Index> first_missing_row(const Dataset& low, const Dataset& high);

/// True iff every input row of `high` is present in the inputs of `low`.
bool validate_hierarchy(const Dataset& low, const Dataset& high);

/// Two nested fidelity levels; the constructor enforces the hierarchy.
struct FidelityPair {
  FidelityPair(Dataset low_fidelity, Dataset high_fidelity);

  Dataset low;
  Dataset high;
};

// CSV: header `x1,...,xm,y[,g1,...,gm]`, one sample per row.

Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Reads only the x1..xm columns of a CSV; y and gradient columns are ignored.
Matrix read_inputs_csv(std::istream& in);
Matrix read_inputs_csv(const std::string& path);
/// Writes an inputs-only CSV with header x1..xm.
void write_inputs_csv(std::ostream& out, const Matrix& inputs);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace mfas
