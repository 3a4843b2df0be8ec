#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "ncderp/ncd.hpp"

namespace testing_support {

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ncderp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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

// Symmetric matrix with zero diagonal and uniform off-diagonal entries.
inline ncderp::DistanceMatrix random_matrix(std::size_t n, std::mt19937_64& rng, double lo = 0.1, double hi = 1.0) {
    std::vector<std::string> ids;
    std::vector<ncderp::Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("x" + std::to_string(i));
        labels.push_back(i % 2 ? ncderp::Label::P300 : ncderp::Label::NonP300);
    }
    auto m = ncderp::make_matrix(ids, labels);
    std::uniform_real_distribution<double> u(lo, hi);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = m.at(j, i) = u(rng);
    return m;
}

}  // namespace testing_support
