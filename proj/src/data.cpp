#include "hedonia/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "hedonia/csv.hpp"
#include "hedonia/image.hpp"

namespace hedonia {

const std::array<const char*, kNumAttributes> kAttributeNames = {
    "year", "size", "beds", "age", "type", "park", "shops", "gravity"};

int attribute_index(const std::string& name) {
    for (std::size_t i = 0; i < kNumAttributes; ++i)
        if (name == kAttributeNames[i]) return static_cast<int>(i);
    return -1;
}

std::vector<StreetRecord> aggregate_to_streets(
    const std::vector<TransactionRecord>& transactions) {
    std::map<std::string, StreetRecord> by_street;
    for (const auto& t : transactions) {
        if (t.street_id.empty())
            throw DataError("transaction " + t.transaction_id +
                            " has no street_id");
        if (!(t.price > 0.0))
            throw DataError("transaction " + t.transaction_id +
                            " has non-positive price");
        StreetRecord& s = by_street[t.street_id];
        s.street_id = t.street_id;
        s.y += std::log(t.price);
        s.x[0] += t.year;
        s.x[1] += t.size;
        s.x[2] += t.beds;
        s.x[3] += t.age;
        s.x[4] += t.type;  // becomes the street's house share
        s.n_transactions += 1;
    }
    std::vector<StreetRecord> out;
    out.reserve(by_street.size());
    for (auto& [id, s] : by_street) {
        const double n = static_cast<double>(s.n_transactions);
        s.y /= n;
        for (std::size_t d = 0; d < 5; ++d) s.x[d] /= n;
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

// Attributes that can legitimately be zero use log(1+x).
constexpr std::array<bool, kNumAttributes> kLog1p = {
    false,  // year
    false,  // size
    true,   // beds
    true,   // age
    true,   // type (house share)
    false,  // park distance
    true,   // shops count
    false,  // gravity
};

double log_transform(double raw, bool log1p_flag, const std::string& attr) {
    if (log1p_flag) {
        if (raw < 0.0) throw DataError("negative value for attribute " + attr);
        return std::log1p(raw);
    }
    if (!(raw > 0.0))
        throw DataError("non-positive value for log attribute " + attr);
    return std::log(raw);
}

}  // namespace

NormalizationSpec fit_normalization(
    const std::vector<StreetRecord>& train_rows) {
    if (train_rows.empty()) throw DataError("fit_normalization on empty data");
    NormalizationSpec spec;
    for (std::size_t d = 0; d < kNumAttributes; ++d) {
        auto& a = spec.attrs[d];
        a.log1p = kLog1p[d];
        a.min = std::numeric_limits<double>::infinity();
        a.max = -std::numeric_limits<double>::infinity();
        for (const auto& row : train_rows) {
            const double t = log_transform(row.x[d], a.log1p, kAttributeNames[d]);
            a.min = std::min(a.min, t);
            a.max = std::max(a.max, t);
        }
        if (!(a.max > a.min))
            throw DataError(std::string("constant attribute: ") +
                            kAttributeNames[d]);
    }
    return spec;
}

std::vector<StreetRecord> apply_normalization(const NormalizationSpec& spec,
                                              std::vector<StreetRecord> rows) {
    for (auto& row : rows) {
        for (std::size_t d = 0; d < kNumAttributes; ++d) {
            const auto& a = spec.attrs[d];
            const double t = log_transform(row.x[d], a.log1p, kAttributeNames[d]);
            row.x[d] = (t - a.min) / (a.max - a.min);
        }
    }
    return rows;
}

std::array<double, kNumAttributes> invert_normalization(
    const NormalizationSpec& spec, const std::array<double, kNumAttributes>& x) {
    std::array<double, kNumAttributes> raw{};
    for (std::size_t d = 0; d < kNumAttributes; ++d) {
        const auto& a = spec.attrs[d];
        const double t = x[d] * (a.max - a.min) + a.min;
        raw[d] = a.log1p ? std::expm1(t) : std::exp(t);
    }
    return raw;
}

ManifestLoadResult load_image_manifest(const std::string& path,
                                       std::size_t side) {
    Table t = read_table(path);
    const int ci = t.require_column("street_id");
    const int cs = t.require_column("street_image_path");
    const int ca = t.require_column("aerial_image_path");
    const int cv = t.require_column("valid");
    const std::filesystem::path base =
        std::filesystem::path(path).parent_path();

    ManifestLoadResult res;
    for (const auto& row : t.rows) {
        try {
            auto resolve = [&](const std::string& p) {
                std::filesystem::path fp(p);
                return fp.is_absolute() ? fp.string() : (base / fp).string();
            };
            ImageSample s;
            s.street_id = row[ci];
            s.street_image = resize_bilinear(read_ppm(resolve(row[cs])), side);
            s.aerial_image = resize_bilinear(read_ppm(resolve(row[ca])), side);
            s.valid = row[cv] == "1" || row[cv] == "true";
            res.samples.push_back(std::move(s));
        } catch (const DataError& e) {
            res.row_errors.push_back(row[ci] + ": " + e.what());
        }
    }
    return res;
}

std::vector<const ImageSample*> valid_samples(
    const std::vector<ImageSample>& samples) {
    std::vector<const ImageSample*> out;
    for (const auto& s : samples)
        if (s.valid) out.push_back(&s);
    return out;
}

const double kSynthBeta0 = 10.0;
const std::array<double, kNumAttributes> kSynthBeta = {
    1.6, 2.1, 0.3, -0.4, 0.2, -0.6, -0.1, 1.0};

double synth_visual_effect(double v) {
    return 0.25 * (v + 0.5 * v * v * v) / 1.5;
}

namespace {

// Smooth planar fields keep attributes locally similar, so a polygon
// hold-out sees genuinely shifted attribute distributions.
struct AttrField {
    double ax, ay, phase;
};
constexpr std::array<AttrField, kNumAttributes> kFields = {{
    {1.3, 0.4, 0.0},
    {0.5, 1.7, 1.1},
    {2.1, 0.9, 2.3},
    {0.8, 2.4, 3.6},
    {1.9, 1.2, 4.9},
    {0.3, 1.1, 0.7},
    {1.5, 2.0, 2.9},
    {2.3, 0.6, 5.5},
}};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Tensor render_street_image(double v, std::size_t side, Rng& rng) {
    Tensor img({side, side, 3});
    const double p_veg = 0.15 + 0.7 * (v + 1.0) / 2.0;
    const double stripe_freq = 3.0 + 9.0 * (v + 1.0) / 2.0;
    const std::size_t sky_end = side / 3, facade_end = 2 * side / 3;
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            double r, g, b;
            if (y < sky_end) {
                r = 0.55;
                g = 0.65;
                b = 0.85;
            } else if (y < facade_end) {
                const double stripe =
                    0.45 + 0.25 * std::sin(2.0 * M_PI * stripe_freq *
                                           static_cast<double>(x) /
                                           static_cast<double>(side));
                r = stripe * 0.95;
                g = stripe * 0.75;
                b = stripe * 0.60;
                if (rng.uniform() < 0.25 * p_veg) {
                    r = 0.15;
                    g = 0.50 + 0.2 * rng.uniform();
                    b = 0.15;
                }
            } else {
                if (rng.uniform() < p_veg) {
                    r = 0.12;
                    g = 0.55 + 0.25 * rng.uniform();
                    b = 0.12;
                } else {
                    r = 0.40;
                    g = 0.40;
                    b = 0.42;
                }
            }
            double* px = img.ptr() + (y * side + x) * 3;
            px[0] = clamp01(r + rng.uniform(-0.04, 0.04));
            px[1] = clamp01(g + rng.uniform(-0.04, 0.04));
            px[2] = clamp01(b + rng.uniform(-0.04, 0.04));
        }
    }
    return img;
}

Tensor render_aerial_image(double v, std::size_t side, Rng& rng) {
    Tensor img({side, side, 3});
    const double p_green = 0.15 + 0.7 * (v + 1.0) / 2.0;
    const std::size_t blocks = 8;
    const std::size_t bs = std::max<std::size_t>(1, side / blocks);
    std::vector<char> is_green(blocks * blocks);
    std::vector<double> shade(blocks * blocks);
    for (std::size_t i = 0; i < blocks * blocks; ++i) {
        is_green[i] = rng.uniform() < p_green;
        shade[i] = rng.uniform(-0.06, 0.06);
    }
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            const std::size_t bi =
                std::min(y / bs, blocks - 1) * blocks + std::min(x / bs, blocks - 1);
            double r, g, b;
            if (is_green[bi]) {
                r = 0.18;
                g = 0.52 + shade[bi];
                b = 0.18;
            } else {
                r = 0.50 + shade[bi];
                g = 0.46 + shade[bi];
                b = 0.43 + shade[bi];
            }
            // street grid lines between blocks
            if (y % bs == 0 || x % bs == 0) {
                r = g = b = 0.35;
            }
            double* px = img.ptr() + (y * side + x) * 3;
            px[0] = clamp01(r + rng.uniform(-0.04, 0.04));
            px[1] = clamp01(g + rng.uniform(-0.04, 0.04));
            px[2] = clamp01(b + rng.uniform(-0.04, 0.04));
        }
    }
    return img;
}

}  // namespace

SyntheticDataset synth_generate(const SynthConfig& config) {
    if (config.n_streets < 50)
        throw DataError("synthetic datasets need at least 50 streets");
    Rng rng(config.seed);
    SyntheticDataset ds;
    char id[16];
    for (std::size_t i = 0; i < config.n_streets; ++i) {
        std::snprintf(id, sizeof(id), "S%05zu", i);
        const double u = rng.uniform(0.0, 1000.0);
        const double w = rng.uniform(0.0, 1000.0);

        StreetRecord street;
        street.street_id = id;
        street.n_transactions = 1;
        for (std::size_t d = 0; d < kNumAttributes; ++d) {
            const auto& fld = kFields[d];
            const double smooth = 0.5 + 0.38 * std::sin(2.0 * M_PI *
                                                        (fld.ax * u / 1000.0 +
                                                         fld.ay * w / 1000.0) +
                                                        fld.phase);
            street.x[d] = clamp01(smooth + 0.06 * rng.normal());
        }

        const double v = config.zero_visual ? 0.0 : rng.uniform(-1.0, 1.0);
        street.y = kSynthBeta0 + synth_visual_effect(v);
        for (std::size_t d = 0; d < kNumAttributes; ++d)
            street.y += kSynthBeta[d] * street.x[d];
        if (config.noise_sd > 0.0) street.y += rng.normal(0.0, config.noise_sd);

        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const Coord a{u - 40.0 * std::sin(theta), w - 40.0 * std::cos(theta)};
        const Coord b{u + 40.0 * std::sin(theta), w + 40.0 * std::cos(theta)};
        ds.segments.push_back({id, {a, b}});

        ImageSample img;
        img.street_id = id;
        img.street_image = render_street_image(v, config.image_side, rng);
        img.aerial_image = render_aerial_image(v, config.image_side, rng);
        img.valid = true;

        ds.streets.push_back(std::move(street));
        ds.images.push_back(std::move(img));
        ds.truth.push_back({id, v});
    }
    return ds;
}

std::vector<TransactionRecord> read_transactions(const std::string& path) {
    Table t = read_table(path);
    const int c_tid = t.require_column("transaction_id");
    const int c_sid = t.require_column("street_id");
    const int c_price = t.require_column("price");
    const int c_year = t.require_column("year");
    const int c_size = t.require_column("size");
    const int c_beds = t.require_column("beds");
    const int c_age = t.require_column("age");
    const int c_type = t.require_column("type");
    std::vector<TransactionRecord> out;
    for (const auto& row : t.rows) {
        TransactionRecord r;
        r.transaction_id = row[c_tid];
        r.street_id = row[c_sid];
        r.price = parse_double(row[c_price], "price");
        r.year = parse_double(row[c_year], "year");
        r.size = parse_double(row[c_size], "size");
        r.beds = parse_double(row[c_beds], "beds");
        r.age = parse_double(row[c_age], "age");
        r.type = parse_double(row[c_type], "type");
        out.push_back(std::move(r));
    }
    return out;
}

void write_transactions(const std::string& path,
                        const std::vector<TransactionRecord>& rows) {
    Table t;
    t.header = {"transaction_id", "street_id", "price", "year",
                "size",           "beds",      "age",   "type"};
    for (const auto& r : rows)
        t.rows.push_back({r.transaction_id, r.street_id, format_double(r.price),
                          format_double(r.year), format_double(r.size),
                          format_double(r.beds), format_double(r.age),
                          format_double(r.type)});
    write_table(path, t);
}

std::vector<StreetRecord> read_streets(const std::string& path) {
    Table t = read_table(path);
    const int ci = t.require_column("street_id");
    const int cy = t.require_column("y");
    const int cn = t.require_column("n_transactions");
    std::array<int, kNumAttributes> cols{};
    for (std::size_t d = 0; d < kNumAttributes; ++d)
        cols[d] = t.require_column(kAttributeNames[d]);
    std::vector<StreetRecord> out;
    for (const auto& row : t.rows) {
        StreetRecord r;
        r.street_id = row[ci];
        r.y = parse_double(row[cy], "y");
        r.n_transactions =
            static_cast<std::size_t>(parse_double(row[cn], "n_transactions"));
        for (std::size_t d = 0; d < kNumAttributes; ++d)
            r.x[d] = parse_double(row[cols[d]], kAttributeNames[d]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_streets(const std::string& path,
                   const std::vector<StreetRecord>& rows) {
    Table t;
    t.header = {"street_id", "y"};
    for (auto name : kAttributeNames) t.header.push_back(name);
    t.header.push_back("n_transactions");
    for (const auto& r : rows) {
        std::vector<std::string> row = {r.street_id, format_double(r.y)};
        for (std::size_t d = 0; d < kNumAttributes; ++d)
            row.push_back(format_double(r.x[d]));
        row.push_back(std::to_string(r.n_transactions));
        t.rows.push_back(std::move(row));
    }
    write_table(path, t);
}

std::vector<SyntheticTruthRow> read_truth(const std::string& path) {
    Table t = read_table(path);
    const int ci = t.require_column("street_id");
    const int cv = t.require_column("latent_visual");
    std::vector<SyntheticTruthRow> out;
    for (const auto& row : t.rows)
        out.push_back({row[ci], parse_double(row[cv], "latent_visual")});
    return out;
}

void write_truth(const std::string& path,
                 const std::vector<SyntheticTruthRow>& rows) {
    Table t;
    t.header = {"street_id", "latent_visual"};
    for (const auto& r : rows)
        t.rows.push_back({r.street_id, format_double(r.latent_visual)});
    write_table(path, t);
}

void write_synth_dataset(const std::string& dir, const SyntheticDataset& ds) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    write_streets((fs::path(dir) / "streets.csv").string(), ds.streets);
    write_segments((fs::path(dir) / "segments.csv").string(), ds.segments);
    write_truth((fs::path(dir) / "truth.csv").string(), ds.truth);
    Table manifest;
    manifest.header = {"street_id", "street_image_path", "aerial_image_path",
                       "valid"};
    for (const auto& img : ds.images) {
        const std::string sp = "images/" + img.street_id + "_street.ppm";
        const std::string ap = "images/" + img.street_id + "_aerial.ppm";
        write_ppm((fs::path(dir) / sp).string(), img.street_image);
        write_ppm((fs::path(dir) / ap).string(), img.aerial_image);
        manifest.rows.push_back({img.street_id, sp, ap, img.valid ? "1" : "0"});
    }
    write_table((fs::path(dir) / "manifest.csv").string(), manifest);
}

}  // namespace hedonia
