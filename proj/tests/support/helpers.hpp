#pragma once

// Small conveniences shared by the unit tests: seeded random tensors, a
// scratch directory per test, and bitwise tensor comparison.

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "surprisenet/rng.hpp"
#include "surprisenet/tensor.hpp"

namespace testutil {

inline surprisenet::Tensor random_tensor(std::vector<int64_t> shape, surprisenet::Rng& rng,
                                         float lo = -1.f, float hi = 1.f) {
  surprisenet::Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline bool bit_equal(const surprisenet::Tensor& a, const surprisenet::Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<size_t>(a.size())) == 0;
}

// Fresh empty directory under the system temp root; removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    const uint64_t n = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("surprisenet_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(n));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
