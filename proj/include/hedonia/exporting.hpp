#pragma once

#include <map>
#include <string>
#include <vector>

#include "hedonia/models.hpp"
#include "hedonia/spatial.hpp"

namespace hedonia {

struct ScoreMapEntry {
    std::string street_id;
    Coord anchor;
    double vhat = 0.0;
    double contribution = 0.0;  // gamma * vhat, log-price units
    int cls = 0;                // quintile class 0..4 for rendering
};

struct ScoreMap {
    double gamma = 0.0;
    std::vector<ScoreMapEntry> entries;        // sorted by street_id
    std::vector<double> class_breaks;          // 4 interior quintile breaks
    std::vector<std::string> skipped;          // streets without a score
};

// One entry per street with a proxy score; streets listed without one go
// to the skipped sidecar. Classes are contribution quintiles.
ScoreMap score_map(const OlsModel& hybrid,
                   const std::map<std::string, double>& proxy,
                   const std::map<std::string, Coord>& anchors,
                   const std::vector<std::string>& street_ids);

// GeoJSON FeatureCollection with point geometry and
// {street_id, vhat, contribution, cls} properties; gamma and the class
// breaks ride along as foreign members.
void write_score_map_geojson(const std::string& path, const ScoreMap& map);
ScoreMap read_score_map_geojson(const std::string& path);

// Delimited twin of the geo output plus the skipped-rows sidecar.
void write_score_map_table(const std::string& path, const ScoreMap& map);
void write_skipped_sidecar(const std::string& path,
                           const std::vector<std::string>& skipped);

struct RankedImage {
    std::size_t rank = 0;  // 1-based within its end
    std::string street_id;
    double score = 0.0;
    std::string image_path;
};

struct RankResult {
    std::vector<RankedImage> top;     // descending score
    std::vector<RankedImage> bottom;  // ascending score
};

// Ties break by street_id, so the ordering is stable across runs.
RankResult rank_images(const std::map<std::string, double>& scores,
                       const std::map<std::string, std::string>& image_paths,
                       std::size_t k);

void write_rank_table(const std::string& path, const RankResult& ranks);

}  // namespace hedonia
