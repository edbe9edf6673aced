#include "girf/swarm.hpp"

#include <algorithm>

namespace girf {

Matrix Matrix::gather(std::span<const std::size_t> ancestors) const {
  Matrix out(ancestors.size(), cols_);
  for (std::size_t i = 0; i < ancestors.size(); ++i) {
    const auto src = row(ancestors[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<double> Matrix::column_means() const {
  std::vector<double> mean(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    for (std::size_t j = 0; j < cols_; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(rows_);
  return mean;
}

}  // namespace girf
