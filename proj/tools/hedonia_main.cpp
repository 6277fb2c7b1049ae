#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hedonia/boosting.hpp"
#include "hedonia/csv.hpp"
#include "hedonia/data.hpp"
#include "hedonia/evaluation.hpp"
#include "hedonia/exporting.hpp"
#include "hedonia/gam.hpp"
#include "hedonia/models.hpp"
#include "hedonia/spatial.hpp"

namespace fs = std::filesystem;
using namespace hedonia;

namespace {

struct RunConfig {
    std::uint64_t seed = 1;
    std::string out = "runs";

    // input artifacts
    std::string transactions, streets, segments, pois, manifest, polygon;
    std::string split, model_path, proxy, hybrid, scores;

    // synth
    std::size_t n_streets = 500;
    double noise_sd = 0.1;
    bool zero_visual = false;

    // features
    double gravity_cutoff = 5000.0;
    double shop_radius = 800.0;

    // split / ablate
    std::string mode = "random";

    // train
    std::string model = "full";
    std::string inputs = "X+S+A";
    int cnn_depth = 4;
    std::size_t epochs = 80;
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    std::size_t image_side = 64;
    bool normalize = false;

    // ablate / evaluate / rank
    std::vector<int> depths{4};
    std::size_t replicates = 1;
    std::string fold = "test";
    std::size_t k = 10;
};

// Canonical key=value dump of every setting that affects the run; the
// output root is deliberately excluded so the same config reproduces the
// same run id anywhere.
std::string canonical_config(const std::string& sub, const RunConfig& c) {
    std::ostringstream s;
    s << "subcommand=" << sub << "\n";
    s << "batch_size=" << c.batch_size << "\n";
    s << "cnn_depth=" << c.cnn_depth << "\n";
    std::ostringstream d;
    for (int x : c.depths) d << x << " ";
    s << "depths=" << d.str() << "\n";
    s << "epochs=" << c.epochs << "\n";
    s << "fold=" << c.fold << "\n";
    s << "gravity_cutoff=" << format_double(c.gravity_cutoff) << "\n";
    s << "hybrid=" << c.hybrid << "\n";
    s << "image_side=" << c.image_side << "\n";
    s << "inputs=" << c.inputs << "\n";
    s << "k=" << c.k << "\n";
    s << "learning_rate=" << format_double(c.learning_rate) << "\n";
    s << "manifest=" << c.manifest << "\n";
    s << "mode=" << c.mode << "\n";
    s << "model=" << c.model << "\n";
    s << "model_path=" << c.model_path << "\n";
    s << "n_streets=" << c.n_streets << "\n";
    s << "noise_sd=" << format_double(c.noise_sd) << "\n";
    s << "normalize=" << c.normalize << "\n";
    s << "pois=" << c.pois << "\n";
    s << "polygon=" << c.polygon << "\n";
    s << "proxy=" << c.proxy << "\n";
    s << "replicates=" << c.replicates << "\n";
    s << "scores=" << c.scores << "\n";
    s << "seed=" << c.seed << "\n";
    s << "segments=" << c.segments << "\n";
    s << "shop_radius=" << format_double(c.shop_radius) << "\n";
    s << "split=" << c.split << "\n";
    s << "streets=" << c.streets << "\n";
    s << "transactions=" << c.transactions << "\n";
    s << "zero_visual=" << c.zero_visual << "\n";
    return s.str();
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

struct Run {
    fs::path dir;
    std::string hash;
    std::chrono::steady_clock::time_point start;
};

Run open_run(const std::string& sub, const RunConfig& cfg) {
    Run run;
    run.hash = hash_hex(fnv1a64(canonical_config(sub, cfg)));
    run.dir = fs::path(cfg.out) / (sub + "-" + run.hash);
    if (fs::exists(run.dir))
        throw ConfigError("run directory already exists (no overwrites): " +
                          run.dir.string());
    fs::create_directories(run.dir);
    run.start = std::chrono::steady_clock::now();
    return run;
}

// Prepends the provenance line so every delimited artifact carries its
// config hash; read_table skips '#' lines.
void embed_hash(const fs::path& path, const std::string& hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot reopen artifact: " + path.string());
    std::ostringstream body;
    body << in.rdbuf();
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "# config_hash=" << hash << "\n" << body.str();
}

void write_text(const fs::path& path, const std::string& hash,
                const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write artifact: " + path.string());
    out << "# config_hash=" << hash << "\n" << body;
}

void close_run(const Run& run, const std::string& sub, const RunConfig& cfg) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - run.start)
                        .count();
    std::ofstream meta(run.dir / "run.txt");
    meta << "subcommand=" << sub << "\n"
         << "config_hash=" << run.hash << "\n"
         << "seed=" << cfg.seed << "\n"
         << "elapsed_ms=" << ms << "\n";
    std::cout << run.dir.string() << "\n";
}

// ---------- shared loading ----------

std::vector<StreetRecord> load_streets(const RunConfig& cfg) {
    if (cfg.streets.empty()) throw ConfigError("missing --streets");
    return read_streets(cfg.streets);
}

std::vector<ImageSample> load_images(const RunConfig& cfg) {
    if (cfg.manifest.empty()) return {};
    ManifestLoadResult res = load_image_manifest(cfg.manifest, cfg.image_side);
    if (!res.row_errors.empty())
        throw DataError("manifest row errors, first: " + res.row_errors[0]);
    return std::move(res.samples);
}

std::map<std::string, Coord> anchors_by_street(const RunConfig& cfg) {
    if (cfg.segments.empty()) throw ConfigError("missing --segments");
    std::map<std::string, Coord> out;
    for (const auto& seg : read_segments(cfg.segments))
        out[seg.street_id] = anchor_and_bearing(seg).anchor;
    return out;
}

SplitPlan load_split(const RunConfig& cfg) {
    if (cfg.split.empty()) throw ConfigError("missing --split");
    return read_split(cfg.split);
}

TrainOptions train_options(const RunConfig& cfg) {
    TrainOptions opts;
    opts.epochs = cfg.epochs;
    opts.learning_rate = cfg.learning_rate;
    opts.batch_size = cfg.batch_size;
    opts.seed = cfg.seed;
    opts.cnn_depth = cfg.cnn_depth;
    opts.image_side = cfg.image_side;
    return opts;
}

InputConfig parse_inputs(const std::string& s) {
    InputConfig ic{false, false, false};
    std::string part;
    std::istringstream ss(s);
    while (std::getline(ss, part, '+')) {
        if (part == "X")
            ic.use_attributes = true;
        else if (part == "S")
            ic.use_street = true;
        else if (part == "A")
            ic.use_aerial = true;
        else
            throw ConfigError("bad --inputs token: " + part);
    }
    return ic;
}

// Normalization is fit on the training fold only and applied everywhere.
std::vector<StreetRecord> maybe_normalize(std::vector<StreetRecord> streets,
                                          const SplitPlan& split,
                                          bool enabled) {
    if (!enabled) return streets;
    std::vector<StreetRecord> train_rows;
    for (const auto& s : streets) {
        auto it = split.assignment.find(s.street_id);
        if (it != split.assignment.end() && it->second == Partition::Train)
            train_rows.push_back(s);
    }
    NormalizationSpec spec = fit_normalization(train_rows);
    return apply_normalization(spec, std::move(streets));
}

std::map<std::string, double> read_proxy(const std::string& path) {
    Table t = read_table(path);
    const int ci = t.require_column("street_id");
    const int cv = t.require_column("vhat");
    std::map<std::string, double> out;
    for (const auto& row : t.rows) out[row[ci]] = std::stod(row[cv]);
    return out;
}

void write_proxy(const fs::path& path, const std::string& hash,
                 const std::map<std::string, double>& proxy) {
    std::ostringstream s;
    s << "street_id,vhat\n";
    for (const auto& [id, v] : proxy) s << id << "," << format_double(v) << "\n";
    write_text(path, hash, s.str());
}

std::string metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows) {
    std::ostringstream s;
    s << "fold,mse,r2\n";
    for (const auto& [name, m] : rows)
        s << name << "," << format_double(m.mse) << "," << format_double(m.r2)
          << "\n";
    return s.str();
}

// ---------- subcommands ----------

void cmd_synth(const RunConfig& cfg) {
    Run run = open_run("synth", cfg);
    SynthConfig sc;
    sc.n_streets = cfg.n_streets;
    sc.seed = cfg.seed;
    sc.noise_sd = cfg.noise_sd;
    sc.image_side = cfg.image_side;
    sc.zero_visual = cfg.zero_visual;
    SyntheticDataset ds = synth_generate(sc);
    write_synth_dataset(run.dir.string(), ds);
    for (const char* f : {"streets.csv", "segments.csv", "truth.csv",
                          "manifest.csv"})
        embed_hash(run.dir / f, run.hash);
    close_run(run, "synth", cfg);
}

void cmd_ingest(const RunConfig& cfg) {
    if (cfg.transactions.empty()) throw ConfigError("missing --transactions");
    Run run = open_run("ingest", cfg);
    auto streets = aggregate_to_streets(read_transactions(cfg.transactions));
    write_streets((run.dir / "streets.csv").string(), streets);
    embed_hash(run.dir / "streets.csv", run.hash);
    if (!cfg.manifest.empty()) {
        ManifestLoadResult res =
            load_image_manifest(cfg.manifest, cfg.image_side);
        std::ostringstream s;
        s << "street_id,error\n";
        for (const auto& e : res.row_errors) s << e << "\n";
        write_text(run.dir / "manifest_errors.csv", run.hash, s.str());
    }
    close_run(run, "ingest", cfg);
}

void cmd_features(const RunConfig& cfg) {
    auto streets = load_streets(cfg);
    auto anchors = anchors_by_street(cfg);
    if (cfg.pois.empty()) throw ConfigError("missing --pois");
    auto pois = read_pois(cfg.pois);
    std::vector<Poi> jobs, shops, parks;
    for (const auto& p : pois) {
        if (p.kind == Poi::Kind::JobCenter) jobs.push_back(p);
        if (p.kind == Poi::Kind::Shop) shops.push_back(p);
        if (p.kind == Poi::Kind::Park) parks.push_back(p);
    }
    Run run = open_run("features", cfg);
    const int i_park = attribute_index("park");
    const int i_shops = attribute_index("shops");
    const int i_gravity = attribute_index("gravity");
    for (auto& s : streets) {
        auto it = anchors.find(s.street_id);
        if (it == anchors.end())
            throw DataError("no segment for street " + s.street_id);
        s.x[i_park] = nearest_distance(it->second, parks);
        s.x[i_shops] = static_cast<double>(
            count_within(it->second, shops, cfg.shop_radius));
        s.x[i_gravity] =
            gravity_accessibility(it->second, jobs, cfg.gravity_cutoff);
    }
    write_streets((run.dir / "streets.csv").string(), streets);
    embed_hash(run.dir / "streets.csv", run.hash);
    close_run(run, "features", cfg);
}

void cmd_split(const RunConfig& cfg) {
    auto streets = load_streets(cfg);
    std::vector<std::string> ids;
    for (const auto& s : streets) ids.push_back(s.street_id);
    SplitPlan plan;
    if (cfg.mode == "random") {
        plan = make_random_split(ids, cfg.seed);
    } else if (cfg.mode == "polygon") {
        if (cfg.polygon.empty()) throw ConfigError("missing --polygon");
        auto by_id = anchors_by_street(cfg);
        std::vector<Coord> anchors;
        for (const auto& id : ids) {
            auto it = by_id.find(id);
            if (it == by_id.end())
                throw DataError("no segment for street " + id);
            anchors.push_back(it->second);
        }
        plan = make_polygon_split(ids, anchors, read_polygon(cfg.polygon),
                                  cfg.seed);
    } else {
        throw ConfigError("bad --mode: " + cfg.mode);
    }
    Run run = open_run("split", cfg);
    write_split((run.dir / "split.csv").string(), plan);
    embed_hash(run.dir / "split.csv", run.hash);
    close_run(run, "split", cfg);
}

void cmd_train(const RunConfig& cfg) {
    auto streets = load_streets(cfg);
    SplitPlan split = load_split(cfg);
    streets = maybe_normalize(std::move(streets), split, cfg.normalize);
    auto images = load_images(cfg);
    EvalDataset ds{&streets, &images, split};
    ModelRows train = ds.fold(Partition::Train);
    ModelRows val = ds.fold(Partition::Validation);
    ModelRows test = ds.fold(Partition::Test);
    TrainOptions opts = train_options(cfg);
    Run run = open_run("train", cfg);

    if (cfg.model == "ols" || cfg.model == "gam" || cfg.model == "gbt") {
        std::vector<std::vector<double>> rows, test_rows;
        std::vector<std::string> names(kAttributeNames.begin(),
                                       kAttributeNames.end());
        for (const auto& x : train.x) rows.emplace_back(x.begin(), x.end());
        for (const auto& x : test.x)
            test_rows.emplace_back(x.begin(), x.end());
        std::vector<double> test_pred;
        std::string report;
        if (cfg.model == "ols") {
            OlsModel m = ols_fit(rows, train.y, names);
            report = format_ols_report(m);
            for (const auto& r : test_rows) test_pred.push_back(m.predict(r));
        } else if (cfg.model == "gam") {
            GamModel m = gam_fit(rows, train.y, names);
            report = format_gam_report(m);
            for (const auto& r : test_rows) test_pred.push_back(m.predict(r));
        } else {
            GbtConfig gc;
            gc.seed = cfg.seed;
            GbtModel m = gbt_fit(rows, train.y, gc);
            report = format_gbt_dump(m);
            for (const auto& r : test_rows) test_pred.push_back(m.predict(r));
        }
        write_text(run.dir / "report.txt", run.hash, report);
        write_text(run.dir / "metrics.csv", run.hash,
                   metrics_table({{"test", compute_metrics(test_pred, test.y)}}));
    } else if (cfg.model == "perceptron" || cfg.model == "full") {
        InputConfig ic = cfg.model == "perceptron"
                             ? InputConfig{true, false, false}
                             : parse_inputs(cfg.inputs);
        FullModel m = full_model_fit(train, val, ic, opts);
        m.save((run.dir / "model.bin").string());
        Evaluation ev = evaluate(m, ds, Partition::Test);
        write_text(run.dir / "metrics.csv", run.hash,
                   metrics_table({{"test", ev.metrics}}));
        std::ostringstream h;
        h << "epoch,train_mse,val_mse\n";
        for (std::size_t e = 0; e < m.history.size(); ++e)
            h << e << "," << format_double(m.history[e].train_mse) << ","
              << format_double(m.history[e].val_mse) << "\n";
        write_text(run.dir / "history.csv", run.hash, h.str());
    } else if (cfg.model == "hybrid") {
        if (images.empty()) throw ConfigError("hybrid training needs --manifest");
        TwoStageResult ts = two_stage_train(train, val, images, opts);
        ts.visual.save((run.dir / "visual.bin").string());
        write_proxy(run.dir / "proxy.csv", run.hash, ts.proxy);

        auto vhat_for = [&](const ModelRows& rows) {
            std::vector<double> v;
            for (const auto& id : rows.street_ids) {
                auto it = ts.proxy.find(id);
                if (it == ts.proxy.end())
                    throw DataError("no proxy score for street " + id);
                v.push_back(it->second);
            }
            return v;
        };
        OlsModel base = attributes_ols_fit(train.x, train.y);
        OlsModel hybrid = hybrid_linear_fit(train.x, vhat_for(train), train.y);
        write_text(run.dir / "report.txt", run.hash,
                   format_ols_report(base) + "\n" + format_ols_report(hybrid));

        std::ostringstream coefs;
        coefs << "name,estimate\n";
        coefs << "intercept," << format_double(hybrid.beta0) << "\n";
        for (std::size_t i = 0; i < hybrid.beta.size(); ++i)
            coefs << hybrid.column_names[i] << ","
                  << format_double(hybrid.beta[i]) << "\n";
        write_text(run.dir / "hybrid.csv", run.hash, coefs.str());

        auto predict_all = [&](const OlsModel& m, const ModelRows& rows,
                               bool with_vis) {
            std::vector<double> pred;
            auto v = with_vis ? vhat_for(rows) : std::vector<double>();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                std::vector<double> row(rows.x[i].begin(), rows.x[i].end());
                if (with_vis) row.push_back(v[i]);
                pred.push_back(m.predict(row));
            }
            return pred;
        };
        write_text(
            run.dir / "metrics.csv", run.hash,
            metrics_table(
                {{"attributes_test",
                  compute_metrics(predict_all(base, test, false), test.y)},
                 {"hybrid_test",
                  compute_metrics(predict_all(hybrid, test, true), test.y)}}));
    } else {
        throw ConfigError("bad --model: " + cfg.model);
    }
    close_run(run, "train", cfg);
}

void cmd_evaluate(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw ConfigError("missing --model-path");
    auto streets = load_streets(cfg);
    SplitPlan split = load_split(cfg);
    streets = maybe_normalize(std::move(streets), split, cfg.normalize);
    auto images = load_images(cfg);
    EvalDataset ds{&streets, &images, split};
    FullModel m = FullModel::load(cfg.model_path);
    Run run = open_run("evaluate", cfg);
    Evaluation ev = evaluate(m, ds, parse_partition(cfg.fold));
    write_text(run.dir / "metrics.csv", run.hash,
               metrics_table({{cfg.fold, ev.metrics}}));
    write_prediction_pairs((run.dir / "predictions.csv").string(), ev.pairs);
    embed_hash(run.dir / "predictions.csv", run.hash);
    close_run(run, "evaluate", cfg);
}

void cmd_ablate(const RunConfig& cfg) {
    auto streets = load_streets(cfg);
    auto images = load_images(cfg);
    TrainOptions opts = train_options(cfg);
    Run run = open_run("ablate", cfg);
    if (cfg.mode == "random") {
        std::vector<std::string> ids;
        for (const auto& s : streets) ids.push_back(s.street_id);
        EvalDataset ds{&streets, &images, make_random_split(ids, cfg.seed)};
        AblationResult res =
            run_ablation(ds, cfg.depths, opts, cfg.replicates);
        write_text(run.dir / "ablation.csv", run.hash, res.to_table());
    } else if (cfg.mode == "polygon") {
        if (cfg.polygon.empty()) throw ConfigError("missing --polygon");
        auto by_id = anchors_by_street(cfg);
        std::vector<Coord> anchors;
        for (const auto& s : streets) {
            auto it = by_id.find(s.street_id);
            if (it == by_id.end())
                throw DataError("no segment for street " + s.street_id);
            anchors.push_back(it->second);
        }
        GeneralizationResult res = run_generalization(
            streets, images, anchors, read_polygon(cfg.polygon), cfg.depths,
            opts, cfg.seed, cfg.replicates);
        write_text(run.dir / "ablation_random.csv", run.hash,
                   res.random_grid.to_table());
        write_text(run.dir / "ablation_holdout.csv", run.hash,
                   res.holdout_grid.to_table());
        std::ostringstream s;
        s << "model,r2_degradation\n";
        for (const auto& [name, d] : res.degradation)
            s << name << "," << format_double(d) << "\n";
        write_text(run.dir / "degradation.csv", run.hash, s.str());
    } else {
        throw ConfigError("bad --mode: " + cfg.mode);
    }
    close_run(run, "ablate", cfg);
}

void cmd_score_map(const RunConfig& cfg) {
    if (cfg.hybrid.empty()) throw ConfigError("missing --hybrid");
    if (cfg.proxy.empty()) throw ConfigError("missing --proxy");
    Table coefs = read_table(cfg.hybrid);
    const int cn = coefs.require_column("name");
    const int ce = coefs.require_column("estimate");
    OlsModel hybrid;
    hybrid.has_gamma = true;
    for (const auto& row : coefs.rows) {
        if (row[cn] == "intercept") {
            hybrid.beta0 = std::stod(row[ce]);
        } else {
            hybrid.column_names.push_back(row[cn]);
            hybrid.beta.push_back(std::stod(row[ce]));
        }
    }
    if (hybrid.column_names.empty() || hybrid.column_names.back() != "vis")
        throw DataError("hybrid coefficient table lacks a vis column");
    auto proxy = read_proxy(cfg.proxy);
    auto anchors = anchors_by_street(cfg);
    std::vector<std::string> ids;
    for (const auto& [id, a] : anchors) ids.push_back(id);
    Run run = open_run("score-map", cfg);
    ScoreMap map = score_map(hybrid, proxy, anchors, ids);
    write_score_map_geojson((run.dir / "score_map.geojson").string(), map);
    write_score_map_table((run.dir / "score_map.csv").string(), map);
    embed_hash(run.dir / "score_map.csv", run.hash);
    write_skipped_sidecar((run.dir / "skipped.csv").string(), map.skipped);
    embed_hash(run.dir / "skipped.csv", run.hash);
    close_run(run, "score-map", cfg);
}

void cmd_rank(const RunConfig& cfg) {
    if (cfg.proxy.empty()) throw ConfigError("missing --proxy");
    auto proxy = read_proxy(cfg.proxy);
    std::map<std::string, std::string> paths;
    if (!cfg.manifest.empty()) {
        Table t = read_table(cfg.manifest);
        const int ci = t.require_column("street_id");
        const int cs = t.require_column("street_image_path");
        for (const auto& row : t.rows) paths[row[ci]] = row[cs];
    }
    Run run = open_run("rank", cfg);
    RankResult res = rank_images(proxy, paths, cfg.k);
    write_rank_table((run.dir / "rank.csv").string(), res);
    embed_hash(run.dir / "rank.csv", run.hash);
    close_run(run, "rank", cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hedonia: hedonic house-price pipeline over street-level "
                 "and aerial imagery"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override");

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "global RNG seed")
            ->envname("HEDONIA_SEED");
        sub->add_option("--out", cfg.out, "output root directory")
            ->envname("HEDONIA_OUT");
        sub->set_config("--config", "", "key=value config file");
        return sub;
    };

    auto* synth = add_common(app.add_subcommand(
        "synth", "generate a synthetic street dataset with imagery"));
    synth->add_option("--n-streets", cfg.n_streets);
    synth->add_option("--noise-sd", cfg.noise_sd);
    synth->add_option("--image-side", cfg.image_side);
    synth->add_flag("--zero-visual", cfg.zero_visual,
                    "force the latent visual score to zero");

    auto* ingest = add_common(app.add_subcommand(
        "ingest", "aggregate transactions to street records"));
    ingest->add_option("--transactions", cfg.transactions);
    ingest->add_option("--manifest", cfg.manifest);
    ingest->add_option("--image-side", cfg.image_side);

    auto* features = add_common(app.add_subcommand(
        "features", "join spatial accessibility features onto streets"));
    features->add_option("--streets", cfg.streets);
    features->add_option("--segments", cfg.segments);
    features->add_option("--pois", cfg.pois);
    features->add_option("--gravity-cutoff", cfg.gravity_cutoff);
    features->add_option("--shop-radius", cfg.shop_radius);

    auto* split = add_common(
        app.add_subcommand("split", "assign streets to train/val/test"));
    split->add_option("--streets", cfg.streets);
    split->add_option("--mode", cfg.mode, "random | polygon");
    split->add_option("--segments", cfg.segments);
    split->add_option("--polygon", cfg.polygon);

    auto* train = add_common(app.add_subcommand("train", "fit a model"));
    train->add_option("--streets", cfg.streets);
    train->add_option("--split", cfg.split);
    train->add_option("--manifest", cfg.manifest);
    train->add_option("--model", cfg.model,
                      "ols | gam | gbt | perceptron | full | hybrid");
    train->add_option("--inputs", cfg.inputs, "X, S, A joined with +");
    train->add_option("--cnn-depth", cfg.cnn_depth);
    train->add_option("--epochs", cfg.epochs);
    train->add_option("--learning-rate", cfg.learning_rate);
    train->add_option("--batch-size", cfg.batch_size);
    train->add_option("--image-side", cfg.image_side);
    train->add_flag("--normalize", cfg.normalize,
                    "fit log/min-max scaling on the training fold");

    auto* evaluate = add_common(
        app.add_subcommand("evaluate", "score a saved model on a fold"));
    evaluate->add_option("--streets", cfg.streets);
    evaluate->add_option("--split", cfg.split);
    evaluate->add_option("--manifest", cfg.manifest);
    evaluate->add_option("--model-path", cfg.model_path);
    evaluate->add_option("--fold", cfg.fold, "train | validation | test");
    evaluate->add_option("--image-side", cfg.image_side);
    evaluate->add_flag("--normalize", cfg.normalize);

    auto* ablate = add_common(app.add_subcommand(
        "ablate", "input-ablation grid over model configurations"));
    ablate->add_option("--streets", cfg.streets);
    ablate->add_option("--manifest", cfg.manifest);
    ablate->add_option("--segments", cfg.segments);
    ablate->add_option("--polygon", cfg.polygon);
    ablate->add_option("--mode", cfg.mode, "random | polygon");
    ablate->add_option("--depths", cfg.depths)->delimiter(',');
    ablate->add_option("--replicates", cfg.replicates);
    ablate->add_option("--epochs", cfg.epochs);
    ablate->add_option("--learning-rate", cfg.learning_rate);
    ablate->add_option("--batch-size", cfg.batch_size);
    ablate->add_option("--image-side", cfg.image_side);

    auto* score_map_cmd = add_common(app.add_subcommand(
        "score-map", "export the visual contribution map"));
    score_map_cmd->add_option("--hybrid", cfg.hybrid,
                              "hybrid coefficient table from train");
    score_map_cmd->add_option("--proxy", cfg.proxy, "street proxy scores");
    score_map_cmd->add_option("--segments", cfg.segments);

    auto* rank = add_common(app.add_subcommand(
        "rank", "top and bottom scored street images"));
    rank->add_option("--proxy", cfg.proxy);
    rank->add_option("--manifest", cfg.manifest);
    rank->add_option("--k", cfg.k, "streets per end");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) cmd_synth(cfg);
        if (ingest->parsed()) cmd_ingest(cfg);
        if (features->parsed()) cmd_features(cfg);
        if (split->parsed()) cmd_split(cfg);
        if (train->parsed()) cmd_train(cfg);
        if (evaluate->parsed()) cmd_evaluate(cfg);
        if (ablate->parsed()) cmd_ablate(cfg);
        if (score_map_cmd->parsed()) cmd_score_map(cfg);
        if (rank->parsed()) cmd_rank(cfg);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
