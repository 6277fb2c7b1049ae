#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hedonia/csv.hpp"
#include "hedonia/exporting.hpp"
#include "hedonia/rng.hpp"
#include "test_helpers.hpp"

using namespace hedonia;
using namespace hedonia::testing;

namespace {

// a hybrid model with a pinned gamma, enough for export plumbing
OlsModel hybrid_with_gamma(double gamma) {
    Rng rng(101);
    std::vector<std::array<double, kNumAttributes>> x;
    std::vector<double> vhat, y;
    for (int i = 0; i < 200; ++i) {
        std::array<double, kNumAttributes> r{};
        for (auto& c : r) c = rng.uniform();
        const double v = 2.0 * rng.uniform() - 1.0;
        x.push_back(r);
        vhat.push_back(v);
        y.push_back(1.0 + r[0] + gamma * v + 1e-9 * rng.normal());
    }
    return hybrid_linear_fit(x, vhat, y);
}

struct Fixture {
    std::map<std::string, double> proxy;
    std::map<std::string, Coord> anchors;
    std::vector<std::string> ids;
};

Fixture make_fixture(std::size_t n, std::size_t n_missing) {
    Fixture f;
    Rng rng(7);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "s" + std::to_string(1000 + i);
        f.ids.push_back(id);
        f.anchors[id] = {1000.0 * rng.uniform(), 1000.0 * rng.uniform()};
        if (i >= n_missing) f.proxy[id] = 2.0 * rng.uniform() - 1.0;
    }
    return f;
}

}  // namespace

TEST_CASE("score map: one entry per scored street, skipped sidecar for the rest") {
    Fixture f = make_fixture(40, 3);
    OlsModel hybrid = hybrid_with_gamma(1.3);
    ScoreMap map = score_map(hybrid, f.proxy, f.anchors, f.ids);

    CHECK(map.entries.size() == f.proxy.size());
    CHECK(map.skipped.size() == 3);
    for (const auto& id : map.skipped) CHECK(f.proxy.count(id) == 0);
    CHECK(std::is_sorted(map.entries.begin(), map.entries.end(),
                         [](const auto& a, const auto& b) {
                             return a.street_id < b.street_id;
                         }));

    // contribution recomputes from the model exactly
    for (const auto& e : map.entries) {
        CHECK(e.contribution ==
              doctest::Approx(hybrid.gamma() * e.vhat).epsilon(1e-10));
        CHECK(e.anchor.x == f.anchors.at(e.street_id).x);
    }
}

TEST_CASE("score map: zero gamma yields a monochrome map") {
    Fixture f = make_fixture(25, 0);
    OlsModel hybrid = hybrid_with_gamma(0.0);
    REQUIRE(std::abs(hybrid.gamma()) < 1e-6);
    ScoreMap map = score_map(hybrid, f.proxy, f.anchors, f.ids);
    for (const auto& e : map.entries)
        CHECK(e.contribution == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("score map: class breaks match a sort-based quantile oracle") {
    Fixture f = make_fixture(500, 0);
    OlsModel hybrid = hybrid_with_gamma(1.3);
    ScoreMap map = score_map(hybrid, f.proxy, f.anchors, f.ids);

    std::vector<double> sorted;
    for (const auto& e : map.entries) sorted.push_back(e.contribution);
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(map.class_breaks.size() == 4);
    for (int j = 1; j <= 4; ++j) {
        const double pos = 0.2 * j * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        const double oracle =
            sorted[lo] * (1.0 - frac) +
            sorted[std::min(lo + 1, sorted.size() - 1)] * frac;
        CHECK(map.class_breaks[j - 1] == doctest::Approx(oracle).epsilon(1e-12));
    }

    // classes are balanced within rounding for a continuous column
    std::array<int, 5> counts{};
    for (const auto& e : map.entries) {
        REQUIRE(e.cls >= 0);
        REQUIRE(e.cls <= 4);
        ++counts[e.cls];
    }
    for (int c : counts) CHECK(std::abs(c - 100) <= 1);
}

TEST_CASE("score map: geo export round-trips without property loss") {
    Fixture f = make_fixture(30, 2);
    OlsModel hybrid = hybrid_with_gamma(0.8);
    ScoreMap map = score_map(hybrid, f.proxy, f.anchors, f.ids);

    TempDir dir("geo");
    write_score_map_geojson(dir.file("map.geojson"), map);
    ScoreMap back = read_score_map_geojson(dir.file("map.geojson"));
    CHECK(back.gamma == map.gamma);
    CHECK(back.class_breaks == map.class_breaks);
    REQUIRE(back.entries.size() == map.entries.size());
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        CHECK(back.entries[i].street_id == map.entries[i].street_id);
        CHECK(back.entries[i].anchor.x == map.entries[i].anchor.x);
        CHECK(back.entries[i].anchor.y == map.entries[i].anchor.y);
        CHECK(back.entries[i].vhat == map.entries[i].vhat);
        CHECK(back.entries[i].contribution == map.entries[i].contribution);
        CHECK(back.entries[i].cls == map.entries[i].cls);
    }

    write_score_map_table(dir.file("map.csv"), map);
    Table t = read_table(dir.file("map.csv"));
    CHECK(t.rows.size() == map.entries.size());
    write_skipped_sidecar(dir.file("skipped.csv"), map.skipped);
    CHECK(read_table(dir.file("skipped.csv")).rows.size() == 2);
}

TEST_CASE("rank: top and bottom ends with deterministic ties") {
    const std::map<std::string, double> scores{
        {"a", 1.0}, {"b", 2.0}, {"c", 3.0}};
    RankResult r = rank_images(scores, {{"a", "a.ppm"}}, 1);
    REQUIRE(r.top.size() == 1);
    CHECK(r.top[0].street_id == "c");
    CHECK(r.bottom[0].street_id == "a");
    CHECK(r.bottom[0].image_path == "a.ppm");
    CHECK(r.top[0].image_path.empty());

    const std::map<std::string, double> tied{
        {"d", 1.0}, {"c", 1.0}, {"b", 1.0}, {"a", 1.0}};
    RankResult rt = rank_images(tied, {}, 2);
    CHECK(rt.top[0].street_id == "a");
    CHECK(rt.top[1].street_id == "b");
    CHECK(rt.bottom[0].street_id == "a");
    CHECK(rt.bottom[1].street_id == "b");

    CHECK_THROWS_AS(rank_images(scores, {}, 0), ConfigError);
    CHECK_THROWS_AS(rank_images(scores, {}, 2), ConfigError);
}

TEST_CASE("rank: decile ends align with the generator truth") {
    SynthConfig cfg;
    cfg.n_streets = 100;
    cfg.seed = 19;
    cfg.image_side = 8;
    SyntheticDataset ds = synth_generate(cfg);
    std::map<std::string, double> truth, proxy;
    Rng rng(33);
    for (const auto& t : ds.truth) {
        truth[t.street_id] = t.latent_visual;
        proxy[t.street_id] = t.latent_visual + 0.2 * rng.normal();
    }
    RankResult r = rank_images(proxy, {}, 10);
    double top_mean = 0.0, bottom_mean = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        top_mean += truth.at(r.top[i].street_id);
        bottom_mean += truth.at(r.bottom[i].street_id);
    }
    CHECK(top_mean / 10.0 > bottom_mean / 10.0);

    TempDir dir("rank");
    write_rank_table(dir.file("rank.csv"), r);
    Table t = read_table(dir.file("rank.csv"));
    CHECK(t.header == std::vector<std::string>{"end", "rank", "street_id",
                                               "score", "image_path"});
    CHECK(t.rows.size() == 20);
}
