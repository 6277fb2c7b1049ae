#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hedonia/network.hpp"
#include "hedonia/rng.hpp"

namespace hedonia::testing {

// Central finite-difference gradient of the scalar loss
// L(w) = mse(forward(net, input), target) with respect to every parameter.
// Independent of the analytic backward path.
inline GradientBundle finite_difference_grads(const NetworkSpec& spec,
                                              Weights weights,
                                              const Tensor& input,
                                              const Tensor& target,
                                              double h = 1e-5) {
    GradientBundle fd;
    for (std::size_t li = 0; li < weights.layers.size(); ++li) {
        fd.emplace_back(weights.layers[li].size(), 0.0);
        for (std::size_t j = 0; j < weights.layers[li].size(); ++j) {
            const double orig = weights.layers[li][j];
            weights.layers[li][j] = orig + h;
            const double lp =
                mse_loss(forward(spec, weights, input).final(), target).loss;
            weights.layers[li][j] = orig - h;
            const double lm =
                mse_loss(forward(spec, weights, input).final(), target).loss;
            weights.layers[li][j] = orig;
            fd[li][j] = (lp - lm) / (2.0 * h);
        }
    }
    return fd;
}

inline double max_relative_error(const GradientBundle& a,
                                 const GradientBundle& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            const double scale =
                std::max({std::abs(a[i][j]), std::abs(b[i][j]), 1e-6});
            worst = std::max(worst, std::abs(a[i][j] - b[i][j]) / scale);
        }
    }
    return worst;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                            double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

// Scratch directory helper for tests that touch the filesystem.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("hedonia_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace hedonia::testing
