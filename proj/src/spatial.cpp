#include "hedonia/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hedonia/csv.hpp"

namespace hedonia {

double distance(Coord a, Coord b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

AnchorBearing anchor_and_bearing(const StreetSegment& segment) {
    const auto& pts = segment.polyline;
    if (pts.size() < 2)
        throw DataError("segment " + segment.street_id +
                        " needs at least 2 points");
    for (const auto& p : pts)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DataError("segment " + segment.street_id +
                            " has non-finite coordinates");
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        total += distance(pts[i - 1], pts[i]);
    if (total <= 0.0)
        throw DataError("segment " + segment.street_id + " has zero length");

    const double half = total / 2.0;
    double walked = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double len = distance(pts[i - 1], pts[i]);
        if (walked + len >= half && len > 0.0) {
            const double t = (half - walked) / len;
            const Coord a{pts[i - 1].x + t * (pts[i].x - pts[i - 1].x),
                          pts[i - 1].y + t * (pts[i].y - pts[i - 1].y)};
            const double dx = pts[i].x - pts[i - 1].x;
            const double dy = pts[i].y - pts[i - 1].y;
            double bearing = std::atan2(dx, dy) * 180.0 / M_PI;
            if (bearing < 0.0) bearing += 360.0;
            if (bearing >= 360.0) bearing -= 360.0;
            return {a, bearing};
        }
        walked += len;
    }
    // Rounding pushed half past the end; use the last sub-segment.
    const Coord a = pts.back();
    const double dx = pts.back().x - pts[pts.size() - 2].x;
    const double dy = pts.back().y - pts[pts.size() - 2].y;
    double bearing = std::atan2(dx, dy) * 180.0 / M_PI;
    if (bearing < 0.0) bearing += 360.0;
    return {a, bearing};
}

double gravity_accessibility(Coord anchor, const std::vector<Poi>& jobs,
                             double cutoff_m) {
    if (cutoff_m <= 0.0) throw DataError("gravity cutoff must be positive");
    double acc = 0.0;
    for (const auto& p : jobs) {
        if (p.kind != Poi::Kind::JobCenter) continue;
        double d = distance(anchor, p.location);
        if (d > cutoff_m) continue;
        if (d < 1.0) d = 1.0;  // clamp the d^-1 singularity
        acc += p.weight / d;
    }
    return acc;
}

std::size_t count_within(Coord anchor, const std::vector<Poi>& pois,
                         double radius_m) {
    if (radius_m <= 0.0) throw DataError("radius must be positive");
    std::size_t n = 0;
    for (const auto& p : pois)
        if (distance(anchor, p.location) <= radius_m) ++n;
    return n;
}

double nearest_distance(Coord anchor, const std::vector<Poi>& parks) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : parks)
        best = std::min(best, distance(anchor, p.location));
    if (!std::isfinite(best))
        throw DataError("nearest_distance on an empty park set");
    return best;
}

bool point_in_polygon(Coord p, const std::vector<Coord>& polygon) {
    const std::size_t n = polygon.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Coord a = polygon[j], b = polygon[i];
        // Point exactly on an edge counts as inside.
        const double cross =
            (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (std::abs(cross) < 1e-12 &&
            p.x >= std::min(a.x, b.x) - 1e-12 &&
            p.x <= std::max(a.x, b.x) + 1e-12 &&
            p.y >= std::min(a.y, b.y) - 1e-12 &&
            p.y <= std::max(a.y, b.y) + 1e-12)
            return true;
        if ((b.y > p.y) != (a.y > p.y)) {
            const double xint = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

namespace {

bool segments_intersect(Coord p1, Coord p2, Coord p3, Coord p4) {
    auto orient = [](Coord a, Coord b, Coord c) {
        const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        return v > 1e-12 ? 1 : (v < -1e-12 ? -1 : 0);
    };
    const int o1 = orient(p1, p2, p3), o2 = orient(p1, p2, p4);
    const int o3 = orient(p3, p4, p1), o4 = orient(p3, p4, p2);
    return o1 != o2 && o3 != o4;
}

}  // namespace

bool polygon_is_simple(const std::vector<Coord>& polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share an endpoint).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(polygon[i], polygon[(i + 1) % n],
                                   polygon[j], polygon[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

const char* partition_name(Partition p) {
    switch (p) {
        case Partition::Train: return "train";
        case Partition::Validation: return "validation";
        case Partition::Test: return "test";
    }
    return "unknown";
}

Partition parse_partition(const std::string& s) {
    if (s == "train") return Partition::Train;
    if (s == "validation") return Partition::Validation;
    if (s == "test") return Partition::Test;
    throw DataError("unknown partition: " + s);
}

std::vector<std::string> SplitPlan::ids_in(Partition p) const {
    std::vector<std::string> out;
    for (const auto& [id, part] : assignment)
        if (part == p) out.push_back(id);
    return out;
}

SplitPlan make_random_split(const std::vector<std::string>& street_ids,
                            std::uint64_t seed) {
    std::vector<std::string> ids = street_ids;
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    rng.shuffle(ids);
    const std::size_t n = ids.size();
    const std::size_t n_test = static_cast<std::size_t>(0.15 * n + 0.5);
    const std::size_t n_val = static_cast<std::size_t>(0.15 * n + 0.5);
    SplitPlan plan{SplitPlan::Mode::Random701515, {}};
    for (std::size_t i = 0; i < n; ++i) {
        Partition p = i < n_test ? Partition::Test
                      : i < n_test + n_val ? Partition::Validation
                                           : Partition::Train;
        plan.assignment[ids[i]] = p;
    }
    return plan;
}

SplitPlan make_polygon_split(const std::vector<std::string>& street_ids,
                             const std::vector<Coord>& anchors,
                             const std::vector<Coord>& polygon,
                             std::uint64_t seed) {
    if (street_ids.size() != anchors.size())
        throw DataError("street id / anchor count mismatch");
    if (!polygon_is_simple(polygon))
        throw DataError("hold-out polygon is not simple");
    std::vector<std::size_t> order(street_ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return street_ids[a] < street_ids[b];
    });

    SplitPlan plan{SplitPlan::Mode::PolygonHoldout, {}};
    std::vector<std::size_t> outside;
    for (std::size_t i : order) {
        if (point_in_polygon(anchors[i], polygon))
            plan.assignment[street_ids[i]] = Partition::Test;
        else
            outside.push_back(i);
    }
    const std::size_t n_test = plan.assignment.size();
    if (n_test == 0) throw DataError("hold-out polygon contains no streets");
    if (n_test == street_ids.size())
        throw DataError("hold-out polygon contains every street");

    Rng rng(seed);
    rng.shuffle(outside);
    const std::size_t n_val =
        static_cast<std::size_t>(outside.size() * 15.0 / 85.0 + 0.5);
    for (std::size_t k = 0; k < outside.size(); ++k)
        plan.assignment[street_ids[outside[k]]] =
            k < n_val ? Partition::Validation : Partition::Train;
    return plan;
}

std::vector<StreetSegment> read_segments(const std::string& path) {
    // Variable-width rows: street_id,x1,y1,x2,y2,...
    std::ifstream f(path);
    if (!f) throw DataError("cannot open segments file: " + path);
    std::vector<StreetSegment> out;
    std::string line;
    do {
        if (!std::getline(f, line))
            throw DataError("empty segments file: " + path);
    } while (line.empty() || line[0] == '#');  // header + provenance lines
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (fields.size() < 5 || fields.size() % 2 == 0)
            throw DataError("bad segment row: " + line);
        StreetSegment s;
        s.street_id = fields[0];
        for (std::size_t i = 1; i + 1 < fields.size(); i += 2)
            s.polyline.push_back({parse_double(fields[i], "x"),
                                  parse_double(fields[i + 1], "y")});
        out.push_back(std::move(s));
    }
    return out;
}

void write_segments(const std::string& path,
                    const std::vector<StreetSegment>& segments) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write segments file: " + path);
    f << "street_id,coords\n";
    for (const auto& s : segments) {
        f << s.street_id;
        for (const auto& p : s.polyline)
            f << "," << format_double(p.x) << "," << format_double(p.y);
        f << "\n";
    }
}

std::vector<Poi> read_pois(const std::string& path) {
    Table t = read_table(path);
    const int ck = t.require_column("kind");
    const int cx = t.require_column("x");
    const int cy = t.require_column("y");
    const int cw = t.require_column("weight");
    std::vector<Poi> out;
    for (const auto& row : t.rows) {
        Poi p;
        if (row[ck] == "job_center") p.kind = Poi::Kind::JobCenter;
        else if (row[ck] == "shop") p.kind = Poi::Kind::Shop;
        else if (row[ck] == "park") p.kind = Poi::Kind::Park;
        else throw DataError("unknown poi kind: " + row[ck]);
        p.location = {parse_double(row[cx], "x"), parse_double(row[cy], "y")};
        p.weight = parse_double(row[cw], "weight");
        if (p.weight < 0) throw DataError("negative poi weight");
        out.push_back(p);
    }
    return out;
}

void write_pois(const std::string& path, const std::vector<Poi>& pois) {
    Table t;
    t.header = {"kind", "x", "y", "weight"};
    for (const auto& p : pois) {
        const char* kind = p.kind == Poi::Kind::JobCenter ? "job_center"
                           : p.kind == Poi::Kind::Shop    ? "shop"
                                                          : "park";
        t.rows.push_back({kind, format_double(p.location.x),
                          format_double(p.location.y),
                          format_double(p.weight)});
    }
    write_table(path, t);
}

std::vector<Coord> read_polygon(const std::string& path) {
    Table t = read_table(path);
    const int cx = t.require_column("x");
    const int cy = t.require_column("y");
    std::vector<Coord> out;
    for (const auto& row : t.rows)
        out.push_back({parse_double(row[cx], "x"), parse_double(row[cy], "y")});
    return out;
}

void write_polygon(const std::string& path,
                   const std::vector<Coord>& polygon) {
    Table t;
    t.header = {"x", "y"};
    for (const auto& p : polygon)
        t.rows.push_back({format_double(p.x), format_double(p.y)});
    write_table(path, t);
}

SplitPlan read_split(const std::string& path) {
    Table t = read_table(path);
    const int ci = t.require_column("street_id");
    const int cp = t.require_column("partition");
    const int cm = t.require_column("mode");
    SplitPlan plan;
    plan.mode = SplitPlan::Mode::Random701515;
    for (const auto& row : t.rows) {
        plan.assignment[row[ci]] = parse_partition(row[cp]);
        plan.mode = row[cm] == "polygon_holdout" ? SplitPlan::Mode::PolygonHoldout
                                                 : SplitPlan::Mode::Random701515;
    }
    return plan;
}

void write_split(const std::string& path, const SplitPlan& plan) {
    Table t;
    t.header = {"street_id", "partition", "mode"};
    const char* mode = plan.mode == SplitPlan::Mode::PolygonHoldout
                           ? "polygon_holdout"
                           : "random_70_15_15";
    for (const auto& [id, p] : plan.assignment)
        t.rows.push_back({id, partition_name(p), mode});
    write_table(path, t);
}

}  // namespace hedonia
