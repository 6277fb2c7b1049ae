#pragma once

#include <map>
#include <string>
#include <vector>

#include "hedonia/common.hpp"
#include "hedonia/rng.hpp"

namespace hedonia {

// Planar projected coordinates in meters.
struct Coord {
    double x = 0.0;
    double y = 0.0;
};

double distance(Coord a, Coord b);

struct StreetSegment {
    std::string street_id;
    std::vector<Coord> polyline;  // >= 2 points
};

struct Poi {
    enum class Kind { JobCenter, Shop, Park };
    Kind kind;
    Coord location;
    double weight = 1.0;  // jobs for JobCenter, 1 otherwise
};

struct AnchorBearing {
    Coord anchor;
    double bearing_deg;  // clockwise from north, [0, 360)
};

// Anchor is the point at half the polyline's arc length; bearing is the
// azimuth of the chord of the sub-segment containing the anchor.
AnchorBearing anchor_and_bearing(const StreetSegment& segment);

// Sum of weight / distance over job centers with 0 < d <= cutoff.
// A job sitting exactly on the anchor is counted at d = 1 m.
double gravity_accessibility(Coord anchor, const std::vector<Poi>& jobs,
                             double cutoff_m);

// Closed-disk count (d <= radius).
std::size_t count_within(Coord anchor, const std::vector<Poi>& pois,
                         double radius_m);

// Min distance over parks; throws DataError on an empty park set.
double nearest_distance(Coord anchor, const std::vector<Poi>& parks);

// Even-odd ray crossing; points on an edge count as inside.
bool point_in_polygon(Coord p, const std::vector<Coord>& polygon);
bool polygon_is_simple(const std::vector<Coord>& polygon);

enum class Partition { Train, Validation, Test };
const char* partition_name(Partition p);
Partition parse_partition(const std::string& s);

struct SplitPlan {
    enum class Mode { Random701515, PolygonHoldout };
    Mode mode;
    std::map<std::string, Partition> assignment;

    std::vector<std::string> ids_in(Partition p) const;
};

// Seeded 70/15/15 split by count (+-1 from rounding).
SplitPlan make_random_split(const std::vector<std::string>& street_ids,
                            std::uint64_t seed);

// Test = streets whose anchor lies inside the polygon; the remainder is
// split train/validation 82/18 (preserving the 70:15 ratio), seeded.
SplitPlan make_polygon_split(const std::vector<std::string>& street_ids,
                             const std::vector<Coord>& anchors,
                             const std::vector<Coord>& polygon,
                             std::uint64_t seed);

// Delimited-text IO for geometry and split plans.
std::vector<StreetSegment> read_segments(const std::string& path);
void write_segments(const std::string& path,
                    const std::vector<StreetSegment>& segments);
std::vector<Poi> read_pois(const std::string& path);
void write_pois(const std::string& path, const std::vector<Poi>& pois);
std::vector<Coord> read_polygon(const std::string& path);
void write_polygon(const std::string& path, const std::vector<Coord>& polygon);
SplitPlan read_split(const std::string& path);
void write_split(const std::string& path, const SplitPlan& plan);

}  // namespace hedonia
