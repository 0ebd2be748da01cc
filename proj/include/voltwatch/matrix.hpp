#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace voltwatch::numerics {

// Shape mismatches and similar caller mistakes.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered where a finite value is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Misuse of the computation graph (backward on a non-scalar, unknown node
// kind, parameter lookups without a bound store, ...).
struct GraphError : std::logic_error {
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Dense row-major matrix of doubles.  Column vectors are rows x 1.
// ---------------------------------------------------------------------------

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionError("matrix " + shape_string() + " needs " +
                           std::to_string(rows_ * cols_) + " values, got " +
                           std::to_string(data_.size()));
  }

  static Matrix column(std::initializer_list<double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values));
  }

  static Matrix column(std::vector<double> values) {
    const std::size_t n = values.size();
    return Matrix(n, 1, std::move(values));
  }

  static Matrix zeros_like(const Matrix& other) {
    return Matrix(other.rows_, other.cols_);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_column() const { return cols_ == 1; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  void fill(double v) {
    for (double& x : data_) x = v;
  }

  // Extracts row r as a column vector.
  Matrix row_as_column(std::size_t r) const {
    if (r >= rows_)
      throw DimensionError("row " + std::to_string(r) + " out of range for " +
                           shape_string());
    Matrix out(cols_, 1);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
    return out;
  }

  // True if every entry is finite.
  bool all_finite() const;

  // Throws NumericError naming `context` if any entry is NaN/Inf.
  void require_finite(const std::string& context) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool bitwise_equal(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Named parameter tensors.  Iteration order is lexicographic by name, always —
// the optimizer and serializer rely on that determinism.
// ---------------------------------------------------------------------------

class ParameterStore {
 public:
  void create(const std::string& name, Matrix value) {
    auto [it, inserted] = entries_.emplace(name, std::move(value));
    if (!inserted)
      throw DimensionError("parameter '" + name + "' already exists");
  }

  bool contains(const std::string& name) const {
    return entries_.count(name) != 0;
  }

  const Matrix& get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw DimensionError("unknown parameter '" + name + "'");
    return it->second;
  }

  // Mutable access for in-place updates; shape must stay fixed.
  Matrix& value(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw DimensionError("unknown parameter '" + name + "'");
    return it->second;
  }

  std::size_t count() const { return entries_.size(); }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : entries_) n += m.size();
    return n;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, m] : entries_) out.push_back(name);
    return out;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

 private:
  std::map<std::string, Matrix> entries_;
};

// Gradients (or Adam moments) matching a ParameterStore key-for-key.
class GradientStore {
 public:
  GradientStore() = default;

  static GradientStore zeros_like(const ParameterStore& params) {
    GradientStore g;
    for (const auto& [name, m] : params)
      g.entries_.emplace(name, Matrix(m.rows(), m.cols()));
    return g;
  }

  Matrix& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw DimensionError("unknown gradient entry '" + name + "'");
    return it->second;
  }

  const Matrix& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw DimensionError("unknown gradient entry '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const {
    return entries_.count(name) != 0;
  }

  std::size_t count() const { return entries_.size(); }

  void reset() {
    for (auto& [name, m] : entries_) m.fill(0.0);
  }

  void scale_all(double alpha);

  // sqrt of the sum of squares over every entry.
  double global_norm() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

 private:
  std::map<std::string, Matrix> entries_;
};

}  // namespace voltwatch::numerics
