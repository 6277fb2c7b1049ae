#pragma once

#include <map>
#include <string>
#include <vector>

#include "hedonia/models.hpp"

namespace hedonia {

struct Metrics {
    double mse = 0.0;
    double r2 = 0.0;  // percent; negative for worse-than-mean predictors
};

// r2 = 100 * (1 - SS_res / SS_tot) with the evaluated fold's own mean.
Metrics compute_metrics(const std::vector<double>& pred,
                        const std::vector<double>& y);

struct PredictionPair {
    std::string street_id;
    double y = 0.0;
    double yhat = 0.0;
};

void write_prediction_pairs(const std::string& path,
                            const std::vector<PredictionPair>& pairs);

// Fold-typed access: evaluation code sees one partition at a time, never
// the whole target column.
struct EvalDataset {
    const std::vector<StreetRecord>* streets = nullptr;
    const std::vector<ImageSample>* images = nullptr;
    SplitPlan split;

    ModelRows fold(Partition p) const;
};

struct Evaluation {
    Metrics metrics;
    std::vector<PredictionPair> pairs;
};

Evaluation evaluate(const FullModel& model, const EvalDataset& dataset,
                    Partition fold);

// The six Table-2 configurations, in reporting order.
const std::vector<InputConfig>& ablation_configs();

struct AblationCell {
    Metrics test;
    double train_mse = 0.0;
};

struct AblationResult {
    std::vector<int> depths;
    // model name -> depth -> cell; the attribute-only row has one entry
    // keyed by the first depth (it never sees an image branch)
    std::map<std::string, std::map<int, AblationCell>> grid;

    // wide delimited table, one row per model, "--" for depth-independent
    // duplicates
    std::string to_table() const;
};

// Trains every configuration with shared per-replicate seeds and reports
// the per-cell median over the replicates.
AblationResult run_ablation(const EvalDataset& dataset,
                            const std::vector<int>& depths,
                            const TrainOptions& base_opts,
                            std::size_t n_replicates = 1);

struct GeneralizationResult {
    AblationResult random_grid;
    AblationResult holdout_grid;
    // model name -> random-split R2 minus hold-out R2 at the first depth
    std::map<std::string, double> degradation;
};

GeneralizationResult run_generalization(
    const std::vector<StreetRecord>& streets,
    const std::vector<ImageSample>& images,
    const std::vector<Coord>& anchors, const std::vector<Coord>& polygon,
    const std::vector<int>& depths, const TrainOptions& base_opts,
    std::uint64_t split_seed, std::size_t n_replicates = 1);

}  // namespace hedonia
