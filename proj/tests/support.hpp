#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "eltd/error.hpp"

namespace eltd_test {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

/// Fresh scratch directory under the system temp dir; removed first if it exists.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eltd_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Runs f and returns the ErrorCode it threw; fails the test when nothing is thrown.
template <class F>
eltd::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const eltd::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected eltd::Error");
}

}  // namespace eltd_test
