#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "lirlab/embedding_store.hpp"
#include "lirlab/token_matrix.hpp"

namespace testing_support {

/// Code of the lirlab::Error thrown by fn; fails the test if none is thrown.
inline lirlab::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const lirlab::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return lirlab::ErrorCode::InvalidArgument;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lirlab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Gaussian rows normalized with plain std::mt19937_64; independent of the
/// library's generators.
template <typename T = double>
lirlab::BasicTokenMatrix<T> random_unit(std::mt19937_64& rng, std::size_t p, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<T> v(p * d);
  for (std::size_t s = 0; s < p; ++s) {
    double sq = 0.0;
    std::vector<double> row(d);
    for (auto& x : row) {
      x = g(rng);
      sq += x * x;
    }
    const double n = std::sqrt(sq);
    for (std::size_t k = 0; k < d; ++k) v[s * d + k] = static_cast<T>(row[k] / n);
  }
  return lirlab::normalize_tokens(lirlab::BasicTokenMatrix<T>(p, d, std::move(v)));
}

/// Textbook MaxSim, written independently of the library kernels.
template <typename T>
double naive_maxsim(const lirlab::BasicTokenMatrix<T>& a, const lirlab::BasicTokenMatrix<T>& b) {
  double total = 0.0;
  for (std::size_t s = 0; s < a.tokens(); ++s) {
    std::vector<double> dots;
    for (std::size_t r = 0; r < b.tokens(); ++r) {
      double dot = 0.0;
      for (std::size_t k = 0; k < a.dim(); ++k) dot += double(a.row(s)[k]) * double(b.row(r)[k]);
      dots.push_back(dot);
    }
    total += *std::max_element(dots.begin(), dots.end());
  }
  return total / double(a.tokens());
}

}  // namespace testing_support
