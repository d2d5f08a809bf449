#ifndef ADB_CORE_TYPES_HPP
#define ADB_CORE_TYPES_HPP

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/errors.hpp"

namespace adb {

// Reserved name of the rejected (K+1)-th class. Never a known class name.
inline constexpr std::string_view kOpenLabel = "open";

inline bool is_open_label(std::string_view name) { return name == kOpenLabel; }

// Ordered set of K known class names with index lookup.
class LabelMap {
 public:
  LabelMap() = default;

  explicit LabelMap(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (is_open_label(names_[i]))
        throw_argument("label map must not contain the reserved label \"open\"");
      if (!index_.emplace(names_[i], static_cast<int>(i)).second)
        throw_argument("duplicate class name in label map: " + names_[i]);
    }
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  // Index of a known class name; -1 for "open" or unrecognized names.
  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  bool operator==(const LabelMap& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct EmbeddingRecord {
  std::string label;
  std::vector<double> vec;
};

// Labeled feature vectors with a shared dimension and a known-class label map.
// Records labeled "open" are permitted (test partitions) but never appear in
// the label map.
struct EmbeddedDataset {
  std::vector<EmbeddingRecord> records;
  LabelMap label_map;
  std::size_t dim = 0;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Dense row-major matrix; small sizes only, no BLAS.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  // Row view for distance computations.
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace adb

#endif  // ADB_CORE_TYPES_HPP
