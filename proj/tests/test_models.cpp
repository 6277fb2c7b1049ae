#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hedonia/models.hpp"
#include "hedonia/rng.hpp"
#include "test_helpers.hpp"

using namespace hedonia;
using namespace hedonia::testing;

namespace {

std::vector<std::string> all_ids(const SyntheticDataset& ds) {
    std::vector<std::string> ids;
    for (const auto& s : ds.streets) ids.push_back(s.street_id);
    return ids;
}

double r2_percent(const std::vector<double>& pred,
                  const std::vector<double>& y) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                        static_cast<double>(y.size());
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        rss += (y[i] - pred[i]) * (y[i] - pred[i]);
        tss += (y[i] - mean) * (y[i] - mean);
    }
    return 100.0 * (1.0 - rss / tss);
}

std::vector<std::vector<double>> design_of(const ModelRows& rows) {
    std::vector<std::vector<double>> out;
    for (const auto& r : rows.x) out.emplace_back(r.begin(), r.end());
    return out;
}

}  // namespace

TEST_CASE("ols: y = 2x + 1 recovered exactly") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({static_cast<double>(i)});
        y.push_back(2.0 * i + 1.0);
    }
    OlsModel m = ols_fit(rows, y, {"x"});
    CHECK(m.beta0 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.beta[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(m.rss == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(m.r2_train == doctest::Approx(100.0).epsilon(1e-8));
    CHECK(m.predict({5.0}) == doctest::Approx(11.0));
    CHECK(m.n_rows == 10);
    CHECK_FALSE(m.has_gamma);
    CHECK_THROWS_AS((void)m.gamma(), NumericError);
}

TEST_CASE("ols: duplicated column is reported by name") {
    Rng rng(7);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        const double a = rng.uniform();
        rows.push_back({a, rng.uniform(), a});
        y.push_back(a + rng.normal());
    }
    CHECK_THROWS_WITH_AS(ols_fit(rows, y, {"first", "middle", "copy"}),
                         doctest::Contains("dependent columns"), NumericError);
}

TEST_CASE("ols: coefficient report carries the full column layout") {
    Rng rng(11);
    std::vector<std::array<double, kNumAttributes>> x;
    std::vector<double> y;
    for (int i = 0; i < 200; ++i) {
        std::array<double, kNumAttributes> r{};
        for (auto& v : r) v = rng.uniform();
        x.push_back(r);
        y.push_back(10.0 + 3.0 * r[0] + 0.05 * rng.normal());
    }
    OlsModel m = attributes_ols_fit(x, y);
    const std::string report = format_ols_report(m);
    CHECK(report.find("Par,Est,Std.E.,T-val.,Sig") == 0);
    CHECK(report.find("Inter.,") != std::string::npos);
    for (const char* name : kAttributeNames)
        CHECK(report.find(std::string("\n") + name + ",") != std::string::npos);
    CHECK(report.find("\nAIC,") != std::string::npos);
    CHECK(report.find("\nGCV,") != std::string::npos);
    // the year coefficient is strongly significant by construction
    CHECK(report.find("***") != std::string::npos);
}

TEST_CASE("ols: synthetic generator coefficients recovered within 3 se") {
    SynthConfig cfg;
    cfg.n_streets = 2000;
    cfg.seed = 21;
    cfg.noise_sd = 0.1;
    cfg.image_side = 8;
    cfg.zero_visual = true;
    SyntheticDataset ds = synth_generate(cfg);

    std::vector<std::array<double, kNumAttributes>> x;
    std::vector<double> y;
    for (const auto& s : ds.streets) {
        x.push_back(s.x);
        y.push_back(s.y);
    }
    OlsModel m = attributes_ols_fit(x, y);
    for (std::size_t d = 0; d < kNumAttributes; ++d) {
        CAPTURE(kAttributeNames[d]);
        CHECK(std::abs(m.beta[d] - kSynthBeta[d]) <= 3.0 * m.std_errors[d + 1]);
    }
    CHECK(std::abs(m.beta0 - kSynthBeta0) <= 3.0 * m.std_errors[0]);
}

TEST_CASE("cnn specs: flattened widths per depth") {
    CHECK(output_shape(make_cnn_spec(4, 64)) ==
          std::vector<std::size_t>{512});  // 4x4x32
    CHECK(output_shape(make_cnn_spec(8, 64)) ==
          std::vector<std::size_t>{512});
    CHECK(output_shape(make_cnn_spec(13, 64)) ==
          std::vector<std::size_t>{256});  // 2x2x64
    CHECK_THROWS_AS(make_cnn_spec(5, 64), ConfigError);
}

TEST_CASE("select_rows: ids resolve to records and image pointers") {
    SynthConfig cfg;
    cfg.n_streets = 60;
    cfg.image_side = 8;
    SyntheticDataset ds = synth_generate(cfg);
    ModelRows rows = select_rows(ds.streets, ds.images,
                                 {ds.streets[3].street_id,
                                  ds.streets[0].street_id});
    REQUIRE(rows.size() == 2);
    CHECK(rows.y[0] == ds.streets[3].y);
    CHECK(rows.x[1] == ds.streets[0].x);
    REQUIRE(rows.images[0] != nullptr);
    CHECK(rows.images[0]->street_id == ds.streets[3].street_id);
    CHECK_THROWS_AS(select_rows(ds.streets, ds.images, {"no-such-street"}),
                    DataError);
}

TEST_CASE("perceptron: validation R2 within 1 point of the OLS floor") {
    SynthConfig cfg;
    cfg.n_streets = 300;
    cfg.seed = 5;
    cfg.noise_sd = 0.05;
    cfg.image_side = 8;
    cfg.zero_visual = true;
    SyntheticDataset ds = synth_generate(cfg);
    SplitPlan split = make_random_split(all_ids(ds), 99);
    ModelRows train = select_rows(ds.streets, ds.images,
                                  split.ids_in(Partition::Train));
    ModelRows val = select_rows(ds.streets, ds.images,
                                split.ids_in(Partition::Validation));

    OlsModel ols = ols_fit(design_of(train), train.y,
                           {kAttributeNames.begin(), kAttributeNames.end()});
    std::vector<double> ols_val;
    for (const auto& r : val.x)
        ols_val.push_back(ols.predict({r.begin(), r.end()}));

    TrainOptions opts;
    opts.epochs = 220;
    opts.learning_rate = 0.01;
    opts.seed = 3;
    FullModel m = fit_attribute_perceptron(train, val, opts);
    CHECK(m.history.size() == opts.epochs);
    CHECK(m.best_epoch < opts.epochs);
    const double nn_r2 = r2_percent(m.predict(val), val.y);
    const double ols_r2 = r2_percent(ols_val, val.y);
    CAPTURE(nn_r2);
    CAPTURE(ols_r2);
    CHECK(nn_r2 >= ols_r2 - 1.0);
}

TEST_CASE("perceptron: constant target converges to the constant") {
    ModelRows train, val;
    Rng rng(4);
    for (int i = 0; i < 80; ++i) {
        ModelRows& dest = i < 60 ? train : val;
        std::array<double, kNumAttributes> x{};
        for (auto& v : x) v = rng.uniform();
        dest.street_ids.push_back("s" + std::to_string(i));
        dest.x.push_back(x);
        dest.y.push_back(7.5);
        dest.images.push_back(nullptr);
    }
    TrainOptions opts;
    opts.epochs = 40;
    FullModel m = fit_attribute_perceptron(train, val, opts);
    for (double p : m.predict(val))
        CHECK(p == doctest::Approx(7.5).epsilon(0.01));
    CHECK(m.history.back().val_mse < 1e-3);
}

TEST_CASE("full model: image configurations require images") {
    ModelRows rows;
    rows.street_ids = {"a", "b"};
    rows.x = {{}, {}};
    rows.y = {1.0, 2.0};
    rows.images = {nullptr, nullptr};
    TrainOptions opts;
    opts.epochs = 1;
    CHECK_THROWS_AS(full_model_fit(rows, rows, {true, true, false}, opts),
                    DataError);
    CHECK_THROWS_AS(full_model_fit(rows, rows, {false, false, false}, opts),
                    ConfigError);
}

TEST_CASE("full model: same seed reproduces predictions bit for bit") {
    SynthConfig cfg;
    cfg.n_streets = 80;
    cfg.seed = 12;
    cfg.image_side = 8;
    SyntheticDataset ds = synth_generate(cfg);
    SplitPlan split = make_random_split(all_ids(ds), 1);
    ModelRows train = select_rows(ds.streets, ds.images,
                                  split.ids_in(Partition::Train));
    ModelRows val = select_rows(ds.streets, ds.images,
                                split.ids_in(Partition::Validation));
    TrainOptions opts;
    opts.epochs = 6;
    opts.seed = 77;
    FullModel a = fit_attribute_perceptron(train, val, opts);
    FullModel b = fit_attribute_perceptron(train, val, opts);
    CHECK(a.predict(val) == b.predict(val));
    CHECK(a.best_epoch == b.best_epoch);
}

TEST_CASE("full model: image-only fit on no-signal data explains nothing") {
    SynthConfig cfg;
    cfg.n_streets = 100;
    cfg.seed = 8;
    cfg.noise_sd = 0.1;
    cfg.image_side = 16;
    SyntheticDataset ds = synth_generate(cfg);
    // keep the images (they vary with v*) but remove their price term
    std::vector<StreetRecord> streets = ds.streets;
    std::map<std::string, double> v;
    for (const auto& t : ds.truth) v[t.street_id] = t.latent_visual;
    for (auto& s : streets) s.y -= synth_visual_effect(v.at(s.street_id));

    SplitPlan split = make_random_split(all_ids(ds), 2);
    ModelRows train =
        select_rows(streets, ds.images, split.ids_in(Partition::Train));
    ModelRows val =
        select_rows(streets, ds.images, split.ids_in(Partition::Validation));
    ModelRows test =
        select_rows(streets, ds.images, split.ids_in(Partition::Test));

    TrainOptions opts;
    opts.epochs = 8;
    opts.image_side = 16;
    opts.seed = 6;
    FullModel m = full_model_fit(train, val, {false, true, true}, opts);
    CHECK(r2_percent(m.predict(test), test.y) <= 5.0);
}

TEST_CASE("full model: checkpoint round-trip preserves predictions") {
    SynthConfig cfg;
    cfg.n_streets = 60;
    cfg.seed = 3;
    cfg.image_side = 16;
    SyntheticDataset ds = synth_generate(cfg);
    SplitPlan split = make_random_split(all_ids(ds), 5);
    ModelRows train = select_rows(ds.streets, ds.images,
                                  split.ids_in(Partition::Train));
    ModelRows val = select_rows(ds.streets, ds.images,
                                split.ids_in(Partition::Validation));
    TrainOptions opts;
    opts.epochs = 2;
    opts.image_side = 16;
    FullModel m = full_model_fit(train, val, {true, true, true}, opts);

    TempDir dir("models_ckpt");
    const std::string path = (dir.path / "full.bin").string();
    m.save(path);
    FullModel loaded = FullModel::load(path);
    CHECK(loaded.inputs.name() == "X+S+A");
    CHECK(loaded.y_offset == m.y_offset);
    CHECK(loaded.predict(val) == m.predict(val));
}

TEST_CASE("two-stage: proxy tracks the latent visual score out of sample") {
    SynthConfig cfg;
    cfg.n_streets = 160;
    cfg.seed = 31;
    cfg.noise_sd = 0.03;
    cfg.image_side = 32;
    SyntheticDataset ds = synth_generate(cfg);
    SplitPlan split = make_random_split(all_ids(ds), 17);
    ModelRows train = select_rows(ds.streets, ds.images,
                                  split.ids_in(Partition::Train));
    ModelRows val = select_rows(ds.streets, ds.images,
                                split.ids_in(Partition::Validation));

    TrainOptions opts;
    opts.epochs = 25;
    opts.image_side = 32;
    opts.seed = 9;
    TwoStageResult res = two_stage_train(train, val, ds.images, opts);

    // every street with a valid image pair gets a finite score, trained or not
    REQUIRE(res.proxy.size() == ds.images.size());
    for (const auto& [id, v] : res.proxy) CHECK(std::isfinite(v));

    std::map<std::string, double> truth;
    for (const auto& t : ds.truth) truth[t.street_id] = t.latent_visual;
    std::vector<double> vhat_test, vstar_test;
    for (const auto& id : split.ids_in(Partition::Test)) {
        vhat_test.push_back(res.proxy.at(id));
        vstar_test.push_back(truth.at(id));
    }
    const double r = pearson(vhat_test, vstar_test);
    CAPTURE(r);
    CHECK(std::abs(r) >= 0.8);

    // orthogonality: v* is drawn independently of the attribute fields
    std::vector<double> vhat_train;
    for (const auto& id : train.street_ids)
        vhat_train.push_back(res.proxy.at(id));
    for (std::size_t d = 0; d < kNumAttributes; ++d) {
        std::vector<double> col;
        for (const auto& r2 : train.x) col.push_back(r2[d]);
        CAPTURE(kAttributeNames[d]);
        CHECK(std::abs(pearson(vhat_train, col)) < 0.2);
    }

    // visual head survives a checkpoint round-trip
    TempDir dir("visual_ckpt");
    const std::string path = (dir.path / "visual.bin").string();
    res.visual.save(path);
    VisualHeadModel loaded = VisualHeadModel::load(path);
    const auto scorable = valid_samples(ds.images);
    CHECK(loaded.score(scorable) == res.visual.score(scorable));
}

TEST_CASE("two-stage: nothing to learn when y is exactly linear") {
    SynthConfig cfg;
    cfg.n_streets = 60;
    cfg.seed = 13;
    cfg.noise_sd = 0.0;
    cfg.image_side = 16;
    cfg.zero_visual = false;  // images vary, but strip g(v*) from y below
    SyntheticDataset ds = synth_generate(cfg);
    std::vector<StreetRecord> streets = ds.streets;
    std::map<std::string, double> v;
    for (const auto& t : ds.truth) v[t.street_id] = t.latent_visual;
    for (auto& s : streets) s.y -= synth_visual_effect(v.at(s.street_id));

    SplitPlan split = make_random_split(all_ids(ds), 3);
    ModelRows train =
        select_rows(streets, ds.images, split.ids_in(Partition::Train));
    ModelRows val =
        select_rows(streets, ds.images, split.ids_in(Partition::Validation));
    TrainOptions opts;
    opts.epochs = 4;
    opts.image_side = 16;
    TwoStageResult res = two_stage_train(train, val, ds.images, opts);

    // residual variance explained by the proxy stays near zero
    std::vector<double> resid = res.stage1.predict(train);
    std::vector<double> vhat;
    for (std::size_t i = 0; i < train.size(); ++i) {
        resid[i] = train.y[i] - resid[i];
        vhat.push_back(res.proxy.at(train.street_ids[i]));
    }
    const double r = pearson(vhat, resid);
    CHECK(r * r < 0.3);
}

TEST_CASE("hybrid fit: gamma recovered and nested R2 dominance holds") {
    Rng rng(23);
    std::vector<std::array<double, kNumAttributes>> x;
    std::vector<double> vhat, y;
    for (int i = 0; i < 400; ++i) {
        std::array<double, kNumAttributes> r{};
        for (auto& c : r) c = rng.uniform();
        const double v = 2.0 * rng.uniform() - 1.0;
        x.push_back(r);
        vhat.push_back(v);
        y.push_back(10.0 + 1.5 * r[0] - 0.7 * r[4] + 1.3 * v +
                    0.05 * rng.normal());
    }
    OlsModel base = attributes_ols_fit(x, y);
    OlsModel hybrid = hybrid_linear_fit(x, vhat, y);
    CHECK(hybrid.has_gamma);
    CHECK(hybrid.column_names.back() == "vis");
    CHECK(std::abs(hybrid.gamma() - 1.3) <= 3.0 * hybrid.std_errors.back());
    CHECK(hybrid.r2_train >= base.r2_train);  // nested models
    CHECK(hybrid.aic < base.aic);
}

TEST_CASE("hybrid fit: all-zero proxy column is rejected by name") {
    Rng rng(29);
    std::vector<std::array<double, kNumAttributes>> x;
    std::vector<double> vhat, y;
    for (int i = 0; i < 60; ++i) {
        std::array<double, kNumAttributes> r{};
        for (auto& c : r) c = rng.uniform();
        x.push_back(r);
        vhat.push_back(0.0);
        y.push_back(rng.normal());
    }
    CHECK_THROWS_WITH_AS(hybrid_linear_fit(x, vhat, y),
                         doctest::Contains("vis"), NumericError);
}
