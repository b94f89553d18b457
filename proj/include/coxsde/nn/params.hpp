#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace coxsde::nn {

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  bool operator==(const ParamBlock&) const = default;
};

/// Maps a flat parameter array back to named tensors.
class ParamLayout {
 public:
  void add(std::string name, std::size_t rows, std::size_t cols);
  void append(const ParamLayout& other, const std::string& prefix);

  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return size_; }

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t size_ = 0;
};

struct ParamVector {
  ParamLayout layout;
  std::vector<double> values;

  std::span<double> block(std::size_t i) { return std::span(values).subspan(layout.blocks()[i].offset, layout.blocks()[i].size()); }
  bool operator==(const ParamVector&) const = default;
};

double l2_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

}  // namespace coxsde::nn
