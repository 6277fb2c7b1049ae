#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hedonia/common.hpp"

namespace hedonia {

struct GbtConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 6;
    double shrinkage = 0.3;
    std::size_t min_leaf = 1;
    double subsample = 1.0;
    std::uint64_t seed = 1;
};

// feature < 0 marks a leaf carrying value; internal nodes route
// x[feature] < threshold to left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(const std::vector<double>& row) const;
};

struct GbtModel {
    GbtConfig config;
    double f0 = 0.0;  // mean of the training target
    std::vector<RegressionTree> trees;
    std::vector<double> train_mse;  // after each appended tree

    double predict(const std::vector<double>& row) const;
};

// Stagewise squared-error boosting: each tree greedily fits the current
// residuals by variance-reduction splits; ties go to the lowest feature
// index, then the lowest threshold.
GbtModel gbt_fit(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& y, const GbtConfig& config);
std::vector<double> gbt_predict(const GbtModel& model,
                                const std::vector<std::vector<double>>& rows);

// One line per node: tree, depth, feature, threshold, value.
std::string format_gbt_dump(const GbtModel& model);

}  // namespace hedonia
