#pragma once

#include <array>
#include <string>
#include <vector>

#include "hedonia/spatial.hpp"
#include "hedonia/tensor.hpp"

namespace hedonia {

// The eight modeled housing attributes, in fixed column order.
constexpr std::size_t kNumAttributes = 8;
extern const std::array<const char*, kNumAttributes> kAttributeNames;
// {"year", "size", "beds", "age", "type", "park", "shops", "gravity"}
int attribute_index(const std::string& name);

struct TransactionRecord {
    std::string transaction_id;
    std::string street_id;
    double price;  // > 0
    double year;
    double size;  // floor area > 0
    double beds;  // >= 0
    double age;   // >= 0
    double type;  // 1 house-ish, 0 flat-ish
};

struct StreetRecord {
    std::string street_id;
    double y = 0.0;  // mean log price
    std::array<double, kNumAttributes> x{};
    std::size_t n_transactions = 0;
};

struct NormalizationSpec {
    struct AttrSpec {
        bool log1p = false;  // log(1+x) for attributes that can be zero
        double min = 0.0;
        double max = 1.0;
    };
    std::array<AttrSpec, kNumAttributes> attrs;
};

struct ImageSample {
    std::string street_id;
    Tensor street_image;  // side x side x 3
    Tensor aerial_image;
    bool valid = true;
};

struct SyntheticTruthRow {
    std::string street_id;
    double latent_visual;  // v* in [-1, 1]
};

// One transaction street => one record; y is the mean of log prices and
// attributes are transaction means (type becomes the house share).
// park/shops/gravity stay zero until spatial features are joined.
std::vector<StreetRecord> aggregate_to_streets(
    const std::vector<TransactionRecord>& transactions);

// Per-attribute log (log1p for beds/shops/age/type, which can be zero)
// followed by min-max scaling fit on training rows only.
NormalizationSpec fit_normalization(const std::vector<StreetRecord>& train_rows);
std::vector<StreetRecord> apply_normalization(const NormalizationSpec& spec,
                                              std::vector<StreetRecord> rows);
std::array<double, kNumAttributes> invert_normalization(
    const NormalizationSpec& spec, const std::array<double, kNumAttributes>& x);

struct ManifestLoadResult {
    std::vector<ImageSample> samples;
    std::vector<std::string> row_errors;
};

// Manifest columns: street_id, street_image_path, aerial_image_path, valid.
// Unreadable files become per-row error records; images are bilinearly
// resized to side x side.
ManifestLoadResult load_image_manifest(const std::string& path,
                                       std::size_t side = 256);

// Valid rows only, for training selectors.
std::vector<const ImageSample*> valid_samples(
    const std::vector<ImageSample>& samples);

struct SynthConfig {
    std::size_t n_streets = 500;
    std::uint64_t seed = 1;
    double noise_sd = 0.1;
    std::size_t image_side = 64;
    bool zero_visual = false;  // force v* = 0 for every street
};

// Monotone nonlinear visual effect with range exactly 0.5 log-price units
// over v in [-1, 1].
double synth_visual_effect(double v);
extern const double kSynthBeta0;
extern const std::array<double, kNumAttributes> kSynthBeta;

struct SyntheticDataset {
    std::vector<StreetRecord> streets;  // x already on the [0,1] model scale
    std::vector<StreetSegment> segments;
    std::vector<ImageSample> images;
    std::vector<SyntheticTruthRow> truth;
};

// Streets on a 1 km square with spatially smooth attributes and an iid
// latent visual score v* that drives vegetation density and facade stripe
// frequency in the street render and green coverage in the aerial render.
// y = beta0 + beta.x + g(v*) + Normal(0, noise_sd).
SyntheticDataset synth_generate(const SynthConfig& config);

// Delimited-text IO matching the synthetic and ingestion formats.
std::vector<TransactionRecord> read_transactions(const std::string& path);
void write_transactions(const std::string& path,
                        const std::vector<TransactionRecord>& rows);
std::vector<StreetRecord> read_streets(const std::string& path);
void write_streets(const std::string& path,
                   const std::vector<StreetRecord>& rows);
std::vector<SyntheticTruthRow> read_truth(const std::string& path);
void write_truth(const std::string& path,
                 const std::vector<SyntheticTruthRow>& rows);

// Writes streets.csv, segments.csv, truth.csv, manifest.csv and one PPM
// pair per street under dir/images/.
void write_synth_dataset(const std::string& dir, const SyntheticDataset& ds);

}  // namespace hedonia
