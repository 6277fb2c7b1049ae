#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedonia/data.hpp"
#include "hedonia/network.hpp"
#include "hedonia/optim.hpp"

namespace hedonia {

// ---------- linear hedonic model ----------

struct OlsModel {
    std::vector<std::string> column_names;  // excludes the intercept
    double beta0 = 0.0;
    std::vector<double> beta;        // aligned with column_names
    std::vector<double> std_errors;  // [intercept, columns...]
    std::vector<double> t_values;    // same alignment
    bool has_gamma = false;          // last column is the visual proxy
    double sigma2 = 0.0;
    double rss = 0.0;
    double r2_train = 0.0;  // percent
    double aic = 0.0;
    double gcv_score = 0.0;
    std::size_t n_rows = 0;

    double gamma() const;
    double predict(const std::vector<double>& x) const;
};

// Least squares via column-pivoted QR. Throws NumericError naming the
// dependent columns on rank deficiency. AIC = 2k - 2L with Gaussian
// log-likelihood; GCV = n RSS / (n - k)^2.
OlsModel ols_fit(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& y,
                 const std::vector<std::string>& column_names);

// Table-style coefficient report (Est, Std.E., T-val., stars, AIC, GCV).
std::string format_ols_report(const OlsModel& model);

// ---------- shared neural plumbing ----------

struct TrainOptions {
    std::size_t epochs = 80;
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    int cnn_depth = 4;  // 4, 8 or 13 conv layers
    std::size_t image_side = 64;
};

struct InputConfig {
    bool use_attributes = true;
    bool use_street = false;
    bool use_aerial = false;
    std::string name() const;
};

// Row-aligned model inputs; images may be null for attribute-only fits.
struct ModelRows {
    std::vector<std::string> street_ids;
    std::vector<std::array<double, kNumAttributes>> x;
    std::vector<double> y;
    std::vector<const ImageSample*> images;

    std::size_t size() const { return x.size(); }
};

ModelRows select_rows(const std::vector<StreetRecord>& streets,
                      const std::vector<ImageSample>& images,
                      const std::vector<std::string>& ids);

struct EpochStats {
    double train_mse;
    double val_mse;
};

// VGG-style conv stack: 3x3 filters, pooling after every conv (4 layers),
// every other conv (8), or per block (13); flattened output.
NetworkSpec make_cnn_spec(int depth, std::size_t side);
NetworkSpec make_mlp_spec(std::size_t fan_in,
                          const std::vector<std::size_t>& hidden,
                          std::size_t fan_out, bool hidden_relu_after_last);

// ---------- perceptron and fused models ----------

// The end-to-end model: optional attribute MLP branch (128/64), optional
// street/aerial CNN branches, fused by a 128/64 MLP head. The
// attribute-only configuration degenerates to the hedonic perceptron.
struct FullModel {
    InputConfig inputs;
    int cnn_depth = 4;
    double y_offset = 0.0;  // train-mean centering of the target
    NetworkSpec attr_spec, street_spec, aerial_spec, fusion_spec;
    Weights attr_w, street_w, aerial_w, fusion_w;
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;

    std::vector<double> predict(const ModelRows& rows,
                                std::size_t batch_size = 64) const;
    void save(const std::string& path) const;
    static FullModel load(const std::string& path);
};

// ADAM, MSE objective, minibatches reshuffled per epoch; returns weights
// from the best-validation epoch plus the full history.
FullModel full_model_fit(const ModelRows& train, const ModelRows& val,
                         const InputConfig& inputs, const TrainOptions& opts);

// Attributes-only perceptron H(X) (two hidden layers, 128 then 64).
FullModel fit_attribute_perceptron(const ModelRows& train,
                                   const ModelRows& val,
                                   const TrainOptions& opts);

// ---------- two-stage proxy training ----------

// V(F(S), G(A)): per-image CNNs compressed to one scalar by a
// two-layer fully-connected head.
struct VisualHeadModel {
    int cnn_depth = 4;
    NetworkSpec street_spec, aerial_spec, head_spec;
    Weights street_w, aerial_w, head_w;
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;

    std::vector<double> score(const std::vector<const ImageSample*>& images,
                              std::size_t batch_size = 64) const;
    void save(const std::string& path) const;
    static VisualHeadModel load(const std::string& path);
};

struct TwoStageResult {
    FullModel stage1;  // kept for diagnostics only; not an inference path
    VisualHeadModel visual;
    // v-hat for every street with a valid image pair, transacted or not.
    std::map<std::string, double> proxy;
};

// Stage 1 fits H(X); stage 2 trains V(F, G) on residuals R = Y - H(X);
// every sample in score_images is then scored.
TwoStageResult two_stage_train(const ModelRows& train, const ModelRows& val,
                               const std::vector<ImageSample>& score_images,
                               const TrainOptions& opts);

// OLS over [X, v-hat]; the gamma coefficient carries the visual proxy.
OlsModel hybrid_linear_fit(const std::vector<std::array<double, kNumAttributes>>& x,
                           const std::vector<double>& vhat,
                           const std::vector<double>& y);
OlsModel attributes_ols_fit(const std::vector<std::array<double, kNumAttributes>>& x,
                            const std::vector<double>& y);

}  // namespace hedonia
