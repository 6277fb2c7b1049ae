#include "hedonia/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hedonia/csv.hpp"
#include "hedonia/rng.hpp"

namespace hedonia {

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

SplitChoice best_split(const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& resid,
                       const std::vector<std::size_t>& index,
                       std::size_t min_leaf) {
    const std::size_t n = index.size();
    double sum = 0.0;
    for (std::size_t i : index) sum += resid[i];
    const std::size_t n_features = rows[0].size();

    SplitChoice best;
    std::vector<std::size_t> order(index);
    for (std::size_t f = 0; f < n_features; ++f) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return rows[a][f] < rows[b][f];
                         });
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += resid[order[i]];
            const double lo = rows[order[i]][f];
            const double hi = rows[order[i + 1]][f];
            if (!(hi > lo)) continue;  // ties can't be separated
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            // SSE drop = nL*meanL^2 + nR*meanR^2 - n*mean^2
            const double right_sum = sum - left_sum;
            const double gain =
                left_sum * left_sum / static_cast<double>(n_left) +
                right_sum * right_sum / static_cast<double>(n_right) -
                sum * sum / static_cast<double>(n);
            if (gain > best.gain + 1e-12) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (lo + hi);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow(RegressionTree& tree, const std::vector<std::vector<double>>& rows,
         const std::vector<double>& resid, std::vector<std::size_t> index,
         std::size_t depth, const GbtConfig& cfg) {
    double mean = 0.0;
    for (std::size_t i : index) mean += resid[i];
    mean /= static_cast<double>(index.size());

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].value = mean;
    if (depth >= cfg.max_depth || index.size() < 2 * cfg.min_leaf)
        return node_id;

    const SplitChoice split = best_split(rows, resid, index, cfg.min_leaf);
    if (!split.found) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : index)
        (rows[i][split.feature] < split.threshold ? left : right).push_back(i);
    index.clear();
    index.shrink_to_fit();

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    const int l = grow(tree, rows, resid, std::move(left), depth + 1, cfg);
    tree.nodes[node_id].left = l;
    const int r = grow(tree, rows, resid, std::move(right), depth + 1, cfg);
    tree.nodes[node_id].right = r;
    return node_id;
}

}  // namespace

double RegressionTree::predict(const std::vector<double>& row) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = row[nodes[node].feature] < nodes[node].threshold
                   ? nodes[node].left
                   : nodes[node].right;
    return nodes[node].value;
}

double GbtModel::predict(const std::vector<double>& row) const {
    double acc = f0;
    for (const auto& tree : trees)
        acc += config.shrinkage * tree.predict(row);
    return acc;
}

GbtModel gbt_fit(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& y, const GbtConfig& config) {
    if (rows.size() < 2) throw DataError("gbt_fit: need at least 2 rows");
    if (rows.size() != y.size())
        throw DataError("gbt_fit: row/target size mismatch");
    if (config.shrinkage <= 0 || config.subsample <= 0 ||
        config.subsample > 1.0 || config.n_trees == 0 || config.min_leaf == 0)
        throw ConfigError("gbt_fit: invalid boosting configuration");
    const std::size_t n_features = rows[0].size();
    for (const auto& r : rows) {
        if (r.size() != n_features) throw DataError("gbt_fit: ragged row");
        for (double v : r)
            if (!std::isfinite(v)) throw DataError("gbt_fit: non-finite feature");
    }

    GbtModel model;
    model.config = config;
    model.f0 = std::accumulate(y.begin(), y.end(), 0.0) /
               static_cast<double>(y.size());

    std::vector<double> pred(y.size(), model.f0);
    std::vector<double> resid(y.size());
    Rng rng(config.seed);
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);

    for (std::size_t t = 0; t < config.n_trees; ++t) {
        for (std::size_t i = 0; i < y.size(); ++i) resid[i] = y[i] - pred[i];

        std::vector<std::size_t> index = all;
        if (config.subsample < 1.0) {
            rng.shuffle(index);
            index.resize(std::max<std::size_t>(
                1, static_cast<std::size_t>(std::round(
                       config.subsample * static_cast<double>(y.size())))));
            std::sort(index.begin(), index.end());
        }

        RegressionTree tree;
        grow(tree, rows, resid, std::move(index), 0, config);
        for (std::size_t i = 0; i < y.size(); ++i)
            pred[i] += config.shrinkage * tree.predict(rows[i]);
        model.trees.push_back(std::move(tree));

        double mse = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            mse += (y[i] - pred[i]) * (y[i] - pred[i]);
        model.train_mse.push_back(mse / static_cast<double>(y.size()));
    }
    return model;
}

std::vector<double> gbt_predict(const GbtModel& model,
                                const std::vector<std::vector<double>>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(model.predict(r));
    return out;
}

std::string format_gbt_dump(const GbtModel& model) {
    std::ostringstream out;
    out << "tree,depth,feature,threshold,value\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& nodes = model.trees[t].nodes;
        // recover depths by walking from the root
        std::vector<int> depth(nodes.size(), 0);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].feature >= 0) {
                depth[nodes[i].left] = depth[i] + 1;
                depth[nodes[i].right] = depth[i] + 1;
            }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            out << t << "," << depth[i] << "," << nodes[i].feature << ","
                << format_double(nodes[i].threshold) << ","
                << format_double(nodes[i].value) << "\n";
        }
    }
    return out.str();
}

}  // namespace hedonia
