#ifndef ADB_TESTS_TEST_UTIL_HPP
#define ADB_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "core/boundary.hpp"
#include "core/types.hpp"

namespace adbtest {

inline adb::EmbeddedDataset make_dataset(
    std::initializer_list<std::pair<std::string, std::vector<double>>> rows) {
  adb::EmbeddedDataset ds;
  std::vector<std::string> names;
  for (const auto& [label, vec] : rows) {
    ds.records.push_back({label, vec});
    if (!adb::is_open_label(label) &&
        std::find(names.begin(), names.end(), label) == names.end())
      names.push_back(label);
  }
  ds.dim = ds.records.empty() ? 0 : ds.records.front().vec.size();
  ds.label_map = adb::LabelMap(names);
  return ds;
}

// delta_hat whose softplus equals target exactly; fails loudly if no such
// double exists in the ulp neighborhood (targets 1, 2, 3 all work).
inline double delta_for_exact_radius(double target) {
  double base = adb::inverse_softplus(target);
  for (int dir = 0; dir < 2; ++dir) {
    double x = base;
    for (int i = 0; i < 16; ++i) {
      if (adb::softplus(x) == target) return x;
      x = std::nextafter(x, dir == 0 ? -1e300 : 1e300);
    }
  }
  throw std::runtime_error("no exact softplus preimage for target");
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::current_path() / "test_tmp" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string write_file(const std::filesystem::path& path,
                              const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

}  // namespace adbtest

#endif  // ADB_TESTS_TEST_UTIL_HPP
