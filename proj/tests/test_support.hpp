#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "modalign/rng.hpp"

namespace testing_support {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("modalign_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// d x n matrix of independent unit columns drawn uniformly on the sphere.
inline Eigen::MatrixXd unit_columns(modalign::SplitMix64& rng, Eigen::Index d, Eigen::Index n) {
  Eigen::MatrixXd m(d, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) = rng.normal();
    m.col(c) /= m.col(c).norm();
  }
  return m;
}

inline std::string data_file(const std::string& name) { return std::string(MODALIGN_TEST_DATA) + "/" + name; }

}  // namespace testing_support
