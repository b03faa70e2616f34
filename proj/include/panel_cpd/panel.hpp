#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "panel_cpd/error.hpp"

namespace panel_cpd {

/// N x T panel stored row-major; row i is the time series of individual i.
/// Rows are assumed to be mutually independent units.
class Panel {
 public:
  Panel() = default;

  Panel(std::size_t n, std::size_t t, std::vector<double> data)
      : n_(n), t_(t), data_(std::move(data)) {
    if (n_ < 1) throw DataError("panel: need at least one individual");
    if (t_ < 2) throw DataError("panel: need at least two time points");
    if (data_.size() != n_ * t_) {
      throw DataError("panel: " + std::to_string(data_.size()) + " values do not form a " +
                      std::to_string(n_) + "x" + std::to_string(t_) + " matrix");
    }
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
      if (!std::isfinite(data_[idx])) {
        throw DataError("panel: non-finite value at row " + std::to_string(idx / t_ + 1) +
                        ", column " + std::to_string(idx % t_ + 1));
      }
    }
  }

  static Panel from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DataError("panel: need at least one individual");
    const std::size_t t = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * t);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != t) {
        throw DataError("panel: row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[i].size()) + " values, expected " + std::to_string(t));
      }
      data.insert(data.end(), rows[i].begin(), rows[i].end());
    }
    return Panel(rows.size(), t, std::move(data));
  }

  std::size_t individuals() const noexcept { return n_; }
  std::size_t periods() const noexcept { return t_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * t_, t_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * t_, t_}; }

  double operator()(std::size_t i, std::size_t t) const noexcept { return data_[i * t_ + t]; }

  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Panel&, const Panel&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t t_ = 0;
  std::vector<double> data_;
};

}  // namespace panel_cpd
