#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsp/error.hpp"

namespace gsp {

/**
 * Dense row-major matrix of feature vectors, one sample per row.
 *
 * Rows are exposed as spans so callers never deal with raw offsets. The
 * class only guarantees the shape; finiteness and unit norm are established
 * by the loader and by l2_normalize().
 */
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::size_t count, std::size_t dim)
      : count_(count), dim_(dim), data_(count * dim, 0.0) {}

  EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<double> data)
      : count_(count), dim_(dim), data_(std::move(data)) {
    if (data_.size() != count_ * dim_) {
      throw InvalidArgument("matrix payload has " + std::to_string(data_.size()) +
                            " values, expected " + std::to_string(count_ * dim_));
    }
  }

  /// Build from nested rows; every row must have the same length.
  static EmbeddingMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t dim = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != dim) {
        throw InvalidArgument("ragged row " + std::to_string(r));
      }
      data.insert(data.end(), rows[r].begin(), rows[r].end());
    }
    return {rows.size(), dim, std::move(data)};
  }

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }

  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * dim_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }

  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

  /// Rows [first, first + n) as a new matrix.
  [[nodiscard]] EmbeddingMatrix slice(std::size_t first, std::size_t n) const {
    std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                            data_.begin() + static_cast<std::ptrdiff_t>((first + n) * dim_));
    return {n, dim_, std::move(out)};
  }

  /// Rows in the given order.
  [[nodiscard]] EmbeddingMatrix select(std::span<const std::size_t> rows) const {
    EmbeddingMatrix out(rows.size(), dim_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = row(rows[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  void append_row(std::span<const double> values) {
    if (count_ == 0 && dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) {
      throw InvalidArgument("row of length " + std::to_string(values.size()) +
                            " appended to matrix of dim " + std::to_string(dim_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++count_;
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Throws FormatError naming the first row holding NaN or Inf.
inline void require_finite(const EmbeddingMatrix& m, const std::string& what = "matrix") {
  for (std::size_t r = 0; r < m.count(); ++r) {
    for (double v : m.row(r)) {
      if (!std::isfinite(v)) {
        throw FormatError(what + ": non-finite value in row " + std::to_string(r));
      }
    }
  }
}

/// Divide every row by its L2 norm. Throws on an all-zero row.
inline EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m) {
  EmbeddingMatrix out = m;
  for (std::size_t r = 0; r < out.count(); ++r) {
    auto row = out.row(r);
    const double n = norm(row);
    if (n == 0.0) throw InvalidArgument("zero-norm row " + std::to_string(r));
    for (double& v : row) v /= n;
  }
  return out;
}

/// Stack matrices vertically; dims must agree (empty matrices are skipped).
inline EmbeddingMatrix vstack(std::initializer_list<const EmbeddingMatrix*> parts) {
  EmbeddingMatrix out;
  for (const auto* p : parts) {
    for (std::size_t r = 0; r < p->count(); ++r) out.append_row(p->row(r));
  }
  return out;
}

}  // namespace gsp
