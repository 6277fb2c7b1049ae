#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hedonia/gam.hpp"
#include "hedonia/models.hpp"
#include "hedonia/rng.hpp"
#include "test_helpers.hpp"

using namespace hedonia;
using namespace hedonia::testing;

namespace {

struct Column {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
};

Column one_column(std::size_t n, std::uint64_t seed, double noise_sd,
                  double (*truth)(double)) {
    Rng rng(seed);
    Column c;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform();
        c.rows.push_back({x});
        c.y.push_back(truth(x) + noise_sd * rng.normal());
    }
    return c;
}

}  // namespace

TEST_CASE("gam: linear truth drives the smooth to a straight line") {
    Column c = one_column(2000, 1, 0.05,
                          [](double x) { return 2.0 + 3.0 * x; });
    GamModel m = gam_fit(c.rows, c.y, {"x"});
    CAPTURE(m.terms[0].edf);
    CHECK(m.terms[0].edf >= 1.0 - 1e-9);
    CHECK(m.terms[0].edf <= 1.3);
}

TEST_CASE("gam: sine shape recovered by the partial dependence curve") {
    Column c = one_column(800, 7, 0.1, [](double x) {
        return std::sin(2.0 * M_PI * x);
    });
    GamModel m = gam_fit(c.rows, c.y, {"x"});
    CHECK(m.terms[0].edf > 3.0);  // decisively nonlinear

    std::vector<double> grid;
    for (int i = 0; i <= 80; ++i) grid.push_back(0.1 + 0.8 * i / 80.0);
    PartialDependence pd = partial_dependence(m, "x", grid);
    double sq = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double err = pd.f[i] - std::sin(2.0 * M_PI * grid[i]);
        sq += err * err;
    }
    const double rmse = std::sqrt(sq / static_cast<double>(grid.size()));
    CAPTURE(rmse);
    CHECK(rmse < 0.15);
    for (double se : pd.se) CHECK(se > 0.0);
}

TEST_CASE("gam: grid-maximum smoothing reproduces the linear model") {
    Rng rng(11);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 300; ++i) {
        rows.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
        y.push_back(1.0 + 2.0 * rows.back()[0] - 0.5 * rows.back()[1] +
                    0.3 * rows.back()[2] + 0.2 * rng.normal());
    }
    const std::vector<std::string> names{"a", "b", "c"};
    const double lambda_max = gam_lambda_grid().back();
    GamModel gam = gam_fit_fixed(rows, y, names, {lambda_max, lambda_max,
                                                  lambda_max});
    OlsModel ols = ols_fit(rows, y, names);
    double sq = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double d = gam.predict(rows[i]) - ols.predict(rows[i]);
        sq += d * d;
    }
    CHECK(std::sqrt(sq / static_cast<double>(rows.size())) < 1e-6);
    for (const auto& t : gam.terms) CHECK(t.edf == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gam: smoothing selection agrees with the exhaustive oracle") {
    Column c = one_column(400, 19, 0.15, [](double x) {
        return std::cos(3.0 * x) + 0.5 * x;
    });
    GamModel m = gam_fit(c.rows, c.y, {"x"});

    double best_gcv = std::numeric_limits<double>::infinity();
    double best_lambda = -1.0;
    for (double lambda : gam_lambda_grid()) {
        const double gcv = gam_fit_fixed(c.rows, c.y, {"x"}, {lambda}).gcv;
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best_lambda = lambda;
        }
    }
    CHECK(m.terms[0].lambda == best_lambda);
    CHECK(m.gcv == best_gcv);
}

TEST_CASE("gam: reported GCV satisfies its defining identity") {
    Column c = one_column(300, 23, 0.1, [](double x) { return x * x; });
    GamModel m = gam_fit(c.rows, c.y, {"x"});
    const double n = static_cast<double>(m.n_rows);
    const double denom = n - m.edf_total;
    CHECK(m.gcv == doctest::Approx(n * m.rss / (denom * denom)).epsilon(1e-12));
}

TEST_CASE("gam: EDF never increases with lambda") {
    Column c = one_column(350, 29, 0.1, [](double x) {
        return std::sin(4.0 * x);
    });
    double prev = 1e9;
    for (double lambda : gam_lambda_grid()) {
        const double edf =
            gam_fit_fixed(c.rows, c.y, {"x"}, {lambda}).terms[0].edf;
        CHECK(edf <= prev + 1e-9);
        prev = edf;
    }
}

TEST_CASE("gam: centering identities hold on the training rows") {
    Rng rng(31);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 250; ++i) {
        rows.push_back({rng.uniform(), rng.uniform()});
        y.push_back(5.0 + std::sin(3.0 * rows.back()[0]) +
                    rows.back()[1] * rows.back()[1] + 0.1 * rng.normal());
    }
    GamModel m = gam_fit(rows, y, {"p", "q"});

    double mean_y = 0.0, mean_pred = 0.0;
    std::vector<double> mean_term(m.terms.size(), 0.0);
    for (const auto& r : rows) {
        mean_y += y[&r - rows.data()];
        mean_pred += m.predict(r);
        for (std::size_t t = 0; t < m.terms.size(); ++t)
            mean_term[t] += m.term_value(t, r[t]);
    }
    const double n = static_cast<double>(rows.size());
    CHECK(mean_pred / n == doctest::Approx(mean_y / n).epsilon(1e-8));
    CHECK(m.intercept == doctest::Approx(mean_y / n).epsilon(1e-8));
    for (double s : mean_term) CHECK(s / n == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
}

TEST_CASE("gam: adding an informative column lowers RSS and AIC") {
    Rng rng(37);
    std::vector<std::vector<double>> base, wide;
    std::vector<double> y;
    for (int i = 0; i < 400; ++i) {
        const double x = rng.uniform();
        const double v = rng.uniform();
        base.push_back({x});
        wide.push_back({x, v});
        y.push_back(2.0 * x + 1.5 * std::sin(2.0 * M_PI * v) +
                    0.1 * rng.normal());
    }
    GamModel small = gam_fit(base, y, {"x"});
    GamModel big = gam_fit(wide, y, {"x", "vis"});
    CHECK(big.rss <= small.rss);
    CHECK(big.aic < small.aic);
}

TEST_CASE("gam: range effect recovers a known span") {
    Rng rng(41);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 600; ++i) {
        const double v = 2.0 * rng.uniform() - 1.0;
        rows.push_back({v});
        y.push_back(synth_visual_effect(v) + 0.02 * rng.normal());
    }
    GamModel m = gam_fit(rows, y, {"vis"});
    const double span = range_effect(m, "vis");
    CAPTURE(span);
    // generator effect has range exactly 0.5 log-points
    CHECK(span == doctest::Approx(std::exp(0.5)).epsilon(0.15));
}

TEST_CASE("gam: constant response gives a unit range effect") {
    Rng rng(43);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 200; ++i) {
        rows.push_back({rng.uniform()});
        y.push_back(4.2);
    }
    GamModel m = gam_fit(rows, y, {"x"});
    CHECK(range_effect(m, "x") == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gam: infinite smoothing gives straight partial dependence") {
    Column c = one_column(300, 47, 0.1, [](double x) {
        return std::sin(5.0 * x);
    });
    GamModel m = gam_fit_fixed(c.rows, c.y, {"x"},
                               {gam_lambda_grid().back()});
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    PartialDependence pd = partial_dependence(m, "x", grid);
    for (std::size_t i = 2; i < grid.size(); ++i) {
        const double second_diff = pd.f[i] - 2.0 * pd.f[i - 1] + pd.f[i - 2];
        CHECK(second_diff == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
}

TEST_CASE("gam: report carries the parametric and smooth blocks") {
    Column c = one_column(300, 53, 0.1, [](double x) { return x; });
    GamModel m = gam_fit(c.rows, c.y, {"year"});
    const std::string report = format_gam_report(m);
    CHECK(report.find("Par,Est,Std.E.,T-val.") == 0);
    CHECK(report.find("Inter.,") != std::string::npos);
    CHECK(report.find("N.Par,EDF,R.df,F-val.,Sig") != std::string::npos);
    CHECK(report.find("\nyear,") != std::string::npos);
    CHECK(report.find("\nAIC,") != std::string::npos);
    CHECK(report.find("\nGCV,") != std::string::npos);
}

TEST_CASE("gam: bad inputs are rejected") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    Rng rng(59);
    for (int i = 0; i < 100; ++i) {
        rows.push_back({rng.uniform(), 0.5});
        y.push_back(rng.normal());
    }
    CHECK_THROWS_WITH_AS(gam_fit(rows, y, {"ok", "flat"}),
                         doctest::Contains("flat"), DataError);

    std::vector<std::vector<double>> tiny(rows.begin(), rows.begin() + 8);
    std::vector<double> tiny_y(y.begin(), y.begin() + 8);
    CHECK_THROWS_AS(gam_fit(tiny, tiny_y, {"a", "b"}), NumericError);

    Column c = one_column(200, 61, 0.1, [](double x) { return x; });
    GamModel m = gam_fit(c.rows, c.y, {"x"});
    CHECK_THROWS_AS(partial_dependence(m, "nope", {0.5}), ConfigError);
    CHECK_THROWS_AS(range_effect(m, "nope"), ConfigError);
}

TEST_CASE("gam: one backfit cycle never raises the training RSS") {
    SynthConfig cfg;
    cfg.n_streets = 120;
    cfg.seed = 67;
    cfg.noise_sd = 0.05;
    cfg.image_side = 16;
    SyntheticDataset ds = synth_generate(cfg);
    std::vector<std::string> ids;
    for (const auto& s : ds.streets) ids.push_back(s.street_id);
    SplitPlan split = make_random_split(ids, 5);
    ModelRows train = select_rows(ds.streets, ds.images,
                                  split.ids_in(Partition::Train));
    ModelRows val = select_rows(ds.streets, ds.images,
                                split.ids_in(Partition::Validation));
    TrainOptions opts;
    opts.epochs = 4;
    opts.image_side = 16;
    TwoStageResult two = two_stage_train(train, val, ds.images, opts);

    // interpretable refit on all transacted streets, with and without v-hat
    ModelRows all = select_rows(ds.streets, ds.images, ids);
    std::vector<std::vector<double>> base, wide;
    for (std::size_t i = 0; i < all.size(); ++i) {
        base.emplace_back(all.x[i].begin(), all.x[i].end());
        wide.push_back(base.back());
        wide.back().push_back(two.proxy.at(all.street_ids[i]));
    }
    std::vector<std::string> names(kAttributeNames.begin(),
                                   kAttributeNames.end());
    std::vector<std::string> wide_names = names;
    wide_names.push_back("vis");
    GamModel without = gam_fit(base, all.y, names);
    GamModel with = gam_fit(wide, all.y, wide_names);
    CHECK(with.rss <= without.rss + 1e-9);
}
