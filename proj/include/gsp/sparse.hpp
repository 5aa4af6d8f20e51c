#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gsp/error.hpp"

namespace gsp {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Square compressed-row matrix with sorted, unique column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::size_t n) : n_(n), row_ptr_(n + 1, 0) {}

  /// Duplicated (row, col) entries are merged by taking the maximum.
  static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
      if (t.row >= n || t.col >= n) {
        throw InvalidArgument("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                              ") outside " + std::to_string(n) + "x" + std::to_string(n));
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    CsrMatrix m(n);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& t = entries[i];
      if (!m.col_.empty() && i > 0 && entries[i - 1].row == t.row && entries[i - 1].col == t.col) {
        m.val_.back() = std::max(m.val_.back(), t.value);
        continue;
      }
      m.col_.push_back(t.col);
      m.val_.push_back(t.value);
      ++m.row_ptr_[t.row + 1];
    }
    for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return col_.size(); }

  [[nodiscard]] std::size_t row_begin(std::size_t r) const noexcept { return row_ptr_[r]; }
  [[nodiscard]] std::size_t row_end(std::size_t r) const noexcept { return row_ptr_[r + 1]; }
  [[nodiscard]] std::size_t col(std::size_t e) const noexcept { return col_[e]; }
  [[nodiscard]] double value(std::size_t e) const noexcept { return val_[e]; }
  [[nodiscard]] std::span<const std::size_t> cols() const noexcept { return col_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return val_; }

  /// Entry (r, c), zero when not stored.
  [[nodiscard]] double at(std::size_t r, std::size_t c) const noexcept {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
  }

  /// Index of entry (r, c) in the value array, or nnz() when absent.
  [[nodiscard]] std::size_t find(std::size_t r, std::size_t c) const noexcept {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? static_cast<std::size_t>(it - col_.begin()) : nnz();
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const noexcept {
    for (std::size_t r = 0; r < n_; ++r) {
      double s = 0.0;
      for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) s += val_[e] * x[col_[e]];
      y[r] = s;
    }
  }

  [[nodiscard]] std::vector<double> row_sums() const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) out[r] += val_[e];
    }
    return out;
  }

  /// Same sparsity pattern, new values.
  [[nodiscard]] CsrMatrix with_values(std::vector<double> values) const {
    if (values.size() != nnz()) throw InvalidArgument("value array does not match sparsity pattern");
    CsrMatrix m = *this;
    m.val_ = std::move(values);
    return m;
  }

  [[nodiscard]] bool is_symmetric() const noexcept {
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
        const auto t = find(col_[e], r);
        if (t == nnz() || val_[t] != val_[e]) return false;
      }
    }
    return true;
  }

  /// Row-major dense copy; meant for tests and small graphs.
  [[nodiscard]] std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) d[r * n_ + col_[e]] = val_[e];
    }
    return d;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

}  // namespace gsp
