#include "hedonia/exporting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hedonia/csv.hpp"

namespace hedonia {

namespace {

using nlohmann::json;

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

int class_of(double value, const std::vector<double>& breaks) {
    int cls = 0;
    for (double b : breaks)
        if (value > b) ++cls;
    return cls;
}

}  // namespace

ScoreMap score_map(const OlsModel& hybrid,
                   const std::map<std::string, double>& proxy,
                   const std::map<std::string, Coord>& anchors,
                   const std::vector<std::string>& street_ids) {
    ScoreMap map;
    map.gamma = hybrid.gamma();
    std::vector<std::string> sorted_ids = street_ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    for (const auto& id : sorted_ids) {
        const auto score = proxy.find(id);
        if (score == proxy.end()) {
            map.skipped.push_back(id);
            continue;
        }
        const auto anchor = anchors.find(id);
        if (anchor == anchors.end())
            throw DataError("no anchor for street " + id);
        if (!std::isfinite(score->second))
            throw NumericError("non-finite proxy score for street " + id);
        ScoreMapEntry e;
        e.street_id = id;
        e.anchor = anchor->second;
        e.vhat = score->second;
        e.contribution = map.gamma * score->second;
        map.entries.push_back(std::move(e));
    }
    if (map.entries.empty()) throw DataError("no streets with proxy scores");

    std::vector<double> sorted;
    for (const auto& e : map.entries) sorted.push_back(e.contribution);
    std::sort(sorted.begin(), sorted.end());
    for (int j = 1; j <= 4; ++j)
        map.class_breaks.push_back(quantile(sorted, j / 5.0));
    for (auto& e : map.entries)
        e.cls = class_of(e.contribution, map.class_breaks);
    return map;
}

void write_score_map_geojson(const std::string& path, const ScoreMap& map) {
    json features = json::array();
    for (const auto& e : map.entries) {
        features.push_back(
            {{"type", "Feature"},
             {"geometry",
              {{"type", "Point"}, {"coordinates", {e.anchor.x, e.anchor.y}}}},
             {"properties",
              {{"street_id", e.street_id},
               {"vhat", e.vhat},
               {"contribution", e.contribution},
               {"cls", e.cls}}}});
    }
    json doc = {{"type", "FeatureCollection"},
                {"features", features},
                {"gamma", map.gamma},
                {"class_breaks", map.class_breaks}};
    std::ofstream f(path);
    if (!f) throw DataError("cannot write score map: " + path);
    f << doc.dump(2) << "\n";
}

ScoreMap read_score_map_geojson(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read score map: " + path);
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed score map " + path + ": " + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw DataError("not a feature collection: " + path);
    ScoreMap map;
    map.gamma = doc.at("gamma").get<double>();
    map.class_breaks = doc.at("class_breaks").get<std::vector<double>>();
    for (const auto& feature : doc.at("features")) {
        ScoreMapEntry e;
        const auto& coords = feature.at("geometry").at("coordinates");
        e.anchor = {coords.at(0).get<double>(), coords.at(1).get<double>()};
        const auto& props = feature.at("properties");
        e.street_id = props.at("street_id").get<std::string>();
        e.vhat = props.at("vhat").get<double>();
        e.contribution = props.at("contribution").get<double>();
        e.cls = props.at("cls").get<int>();
        map.entries.push_back(std::move(e));
    }
    return map;
}

void write_score_map_table(const std::string& path, const ScoreMap& map) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write score table: " + path);
    f << "street_id,x,y,vhat,contribution,cls\n";
    for (const auto& e : map.entries)
        f << e.street_id << "," << format_double(e.anchor.x) << ","
          << format_double(e.anchor.y) << "," << format_double(e.vhat) << ","
          << format_double(e.contribution) << "," << e.cls << "\n";
}

void write_skipped_sidecar(const std::string& path,
                           const std::vector<std::string>& skipped) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write skipped sidecar: " + path);
    f << "street_id\n";
    for (const auto& id : skipped) f << id << "\n";
}

RankResult rank_images(const std::map<std::string, double>& scores,
                       const std::map<std::string, std::string>& image_paths,
                       std::size_t k) {
    if (k == 0) throw ConfigError("rank: k must be positive");
    if (2 * k > scores.size())
        throw ConfigError("rank: k exceeds half the scored streets");

    std::vector<std::pair<std::string, double>> ascending(scores.begin(),
                                                          scores.end());
    // map iteration already orders ties by street_id
    std::stable_sort(ascending.begin(), ascending.end(),
                     [](const auto& a, const auto& b) {
                         return a.second < b.second;
                     });
    std::vector<std::pair<std::string, double>> descending(scores.begin(),
                                                           scores.end());
    std::stable_sort(descending.begin(), descending.end(),
                     [](const auto& a, const auto& b) {
                         return a.second > b.second;
                     });
    auto take = [&](const std::pair<std::string, double>& p, std::size_t rank) {
        RankedImage r;
        r.rank = rank;
        r.street_id = p.first;
        r.score = p.second;
        const auto path = image_paths.find(r.street_id);
        if (path != image_paths.end()) r.image_path = path->second;
        return r;
    };
    RankResult result;
    for (std::size_t i = 0; i < k; ++i) {
        result.bottom.push_back(take(ascending[i], i + 1));
        result.top.push_back(take(descending[i], i + 1));
    }
    return result;
}

void write_rank_table(const std::string& path, const RankResult& ranks) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write rank table: " + path);
    f << "end,rank,street_id,score,image_path\n";
    for (const auto& r : ranks.top)
        f << "top," << r.rank << "," << r.street_id << ","
          << format_double(r.score) << "," << r.image_path << "\n";
    for (const auto& r : ranks.bottom)
        f << "bottom," << r.rank << "," << r.street_id << ","
          << format_double(r.score) << "," << r.image_path << "\n";
}

}  // namespace hedonia
