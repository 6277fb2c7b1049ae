#include "hedonia/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hedonia/csv.hpp"

namespace hedonia {

Metrics compute_metrics(const std::vector<double>& pred,
                        const std::vector<double>& y) {
    if (y.empty()) throw DataError("metrics on an empty fold");
    if (pred.size() != y.size())
        throw DataError("metrics: prediction/target size mismatch");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        rss += (y[i] - pred[i]) * (y[i] - pred[i]);
        tss += (y[i] - mean) * (y[i] - mean);
    }
    Metrics m;
    m.mse = rss / static_cast<double>(y.size());
    if (tss <= 0.0)
        throw DataError("metrics: zero-variance target fold");
    m.r2 = 100.0 * (1.0 - rss / tss);
    return m;
}

void write_prediction_pairs(const std::string& path,
                            const std::vector<PredictionPair>& pairs) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write prediction pairs: " + path);
    f << "street_id,y,yhat\n";
    for (const auto& p : pairs)
        f << p.street_id << "," << format_double(p.y) << ","
          << format_double(p.yhat) << "\n";
}

ModelRows EvalDataset::fold(Partition p) const {
    return select_rows(*streets, *images, split.ids_in(p));
}

Evaluation evaluate(const FullModel& model, const EvalDataset& dataset,
                    Partition fold) {
    const ModelRows rows = dataset.fold(fold);
    if (rows.size() == 0)
        throw DataError(std::string("empty evaluation fold: ") +
                        partition_name(fold));
    Evaluation ev;
    const std::vector<double> pred = model.predict(rows);
    ev.metrics = compute_metrics(pred, rows.y);
    for (std::size_t i = 0; i < rows.size(); ++i)
        ev.pairs.push_back({rows.street_ids[i], rows.y[i], pred[i]});
    return ev;
}

const std::vector<InputConfig>& ablation_configs() {
    static const std::vector<InputConfig> configs{
        {true, false, false},  // X
        {false, true, false},  // S
        {false, false, true},  // A
        {true, true, false},   // X+S
        {true, false, true},   // X+A
        {true, true, true},    // X+S+A
    };
    return configs;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

AblationCell median_cell(const std::vector<AblationCell>& cells) {
    std::vector<double> mse, r2, train;
    for (const auto& c : cells) {
        mse.push_back(c.test.mse);
        r2.push_back(c.test.r2);
        train.push_back(c.train_mse);
    }
    AblationCell out;
    out.test.mse = median_of(mse);
    out.test.r2 = median_of(r2);
    out.train_mse = median_of(train);
    return out;
}

AblationCell run_cell(const EvalDataset& dataset, const InputConfig& config,
                      const TrainOptions& opts) {
    const ModelRows train = dataset.fold(Partition::Train);
    const ModelRows val = dataset.fold(Partition::Validation);
    FullModel model = full_model_fit(train, val, config, opts);
    AblationCell cell;
    cell.test = evaluate(model, dataset, Partition::Test).metrics;
    cell.train_mse =
        compute_metrics(model.predict(train), train.y).mse;
    return cell;
}

}  // namespace

AblationResult run_ablation(const EvalDataset& dataset,
                            const std::vector<int>& depths,
                            const TrainOptions& base_opts,
                            std::size_t n_replicates) {
    if (depths.empty()) throw ConfigError("ablation needs at least one depth");
    if (n_replicates == 0) throw ConfigError("ablation needs replicates >= 1");
    AblationResult result;
    result.depths = depths;
    for (const InputConfig& config : ablation_configs()) {
        const bool uses_images = config.use_street || config.use_aerial;
        for (int depth : depths) {
            if (!uses_images && depth != depths.front())
                continue;  // depth-independent row
            std::vector<AblationCell> cells;
            for (std::size_t rep = 0; rep < n_replicates; ++rep) {
                TrainOptions opts = base_opts;
                opts.cnn_depth = depth;
                // same seed for every cell of a replicate, so orderings
                // reflect inputs rather than initialization luck
                opts.seed = base_opts.seed + rep;
                cells.push_back(run_cell(dataset, config, opts));
            }
            result.grid[config.name()][depth] = median_cell(cells);
        }
    }
    return result;
}

std::string AblationResult::to_table() const {
    std::ostringstream out;
    out << "model";
    for (int d : depths) out << ",mse_d" << d << ",r2_d" << d;
    out << "\n";
    for (const InputConfig& config : ablation_configs()) {
        const auto row = grid.find(config.name());
        if (row == grid.end()) continue;
        out << config.name();
        const bool uses_images = config.use_street || config.use_aerial;
        for (int d : depths) {
            if (!uses_images && d != depths.front()) {
                out << ",--,--";
                continue;
            }
            const AblationCell& cell = row->second.at(d);
            out << "," << format_double(cell.test.mse) << ","
                << format_double(cell.test.r2);
        }
        out << "\n";
    }
    return out.str();
}

GeneralizationResult run_generalization(
    const std::vector<StreetRecord>& streets,
    const std::vector<ImageSample>& images,
    const std::vector<Coord>& anchors, const std::vector<Coord>& polygon,
    const std::vector<int>& depths, const TrainOptions& base_opts,
    std::uint64_t split_seed, std::size_t n_replicates) {
    if (anchors.size() != streets.size())
        throw DataError("one anchor per street required");
    std::vector<std::string> ids;
    for (const auto& s : streets) ids.push_back(s.street_id);

    EvalDataset random_ds{&streets, &images,
                          make_random_split(ids, split_seed)};
    EvalDataset holdout_ds{&streets, &images,
                           make_polygon_split(ids, anchors, polygon,
                                              split_seed)};

    GeneralizationResult result;
    result.random_grid = run_ablation(random_ds, depths, base_opts,
                                      n_replicates);
    result.holdout_grid = run_ablation(holdout_ds, depths, base_opts,
                                       n_replicates);
    for (const auto& [model, cells] : result.random_grid.grid) {
        const int d = cells.begin()->first;
        result.degradation[model] =
            cells.at(d).test.r2 -
            result.holdout_grid.grid.at(model).at(d).test.r2;
    }
    return result;
}

}  // namespace hedonia
