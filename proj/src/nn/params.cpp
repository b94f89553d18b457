#include "coxsde/nn/params.hpp"

#include <cmath>

namespace coxsde::nn {

void ParamLayout::add(std::string name, std::size_t rows, std::size_t cols) {
  blocks_.push_back({std::move(name), size_, rows, cols});
  size_ += rows * cols;
}

void ParamLayout::append(const ParamLayout& other, const std::string& prefix) {
  for (const auto& b : other.blocks()) add(prefix + b.name, b.rows, b.cols);
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace coxsde::nn
