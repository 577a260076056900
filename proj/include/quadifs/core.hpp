#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadifs {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Axis-aligned rectangle [a,b] x [c,d].
struct Region {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;
    double d = 1.0;

    double mid_x() const { return a + (b - a) / 2.0; }
    double mid_y() const { return c + (d - c) / 2.0; }
    bool contains(double x, double y) const { return x >= a && x <= b && y >= c && y <= d; }
};

// Affine self-map of the plane: (x,y) -> (a11 x + a12 y + b1, a21 x + a22 y + b2).
struct AffineMap2 {
    double a11 = 0, a12 = 0, b1 = 0;
    double a21 = 0, a22 = 0, b2 = 0;
    double weight = 0;
};

// Affine map of two plane points to one: phi(p1, p2).
struct AffineMap4 {
    double a11 = 0, a12 = 0, a13 = 0, a14 = 0, b1 = 0;
    double a21 = 0, a22 = 0, a23 = 0, a24 = 0, b2 = 0;
    double weight = 0;
};

// Evaluation order is fixed (left-to-right sums, no FMA); point merging
// depends on bit-identical results across runs.
inline Point2 apply_map2(const AffineMap2& m, Point2 pt) {
    return {m.a11 * pt.x + m.a12 * pt.y + m.b1,
            m.a21 * pt.x + m.a22 * pt.y + m.b2};
}

inline Point2 apply_map4(const AffineMap4& m, Point2 p1, Point2 p2) {
    return {m.a11 * p1.x + m.a12 * p1.y + m.a13 * p2.x + m.a14 * p2.y + m.b1,
            m.a21 * p1.x + m.a22 * p1.y + m.a23 * p2.x + m.a24 * p2.y + m.b2};
}

enum class SystemKind { Ifs, Gifs };
enum class MeasureMode { Classic, Idempotent };

struct SystemSpec {
    SystemKind kind = SystemKind::Ifs;
    MeasureMode mode = MeasureMode::Idempotent;
    Region region;
    std::vector<AffineMap2> maps2;  // used when kind == Ifs
    std::vector<AffineMap4> maps4;  // used when kind == Gifs
    Point2 initial;
    double initial_weight = 0.0;

    std::size_t map_count() const {
        return kind == SystemKind::Ifs ? maps2.size() : maps4.size();
    }
    double map_weight(std::size_t j) const {
        return kind == SystemKind::Ifs ? maps2[j].weight : maps4[j].weight;
    }
};

// Support point with its measure weight. Classic mode stores probability
// mass, idempotent mode stores a log-density in [-inf, 0].
struct WeightedPoint {
    double x = 0.0;
    double y = 0.0;
    double p = 0.0;
};

inline std::uint64_t bits_of(double v) { return std::bit_cast<std::uint64_t>(v); }

// Point equality used for deduplication: bitwise on both coordinates.
inline bool same_point(double ux, double uy, const WeightedPoint& w) {
    return bits_of(ux) == bits_of(w.x) && bits_of(uy) == bits_of(w.y);
}

class CapacityExceeded : public std::runtime_error {
public:
    explicit CapacityExceeded(std::uint64_t limit)
        : std::runtime_error("point buffer capacity exceeded (limit " +
                             std::to_string(limit) + " points)") {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint64_t kDefaultMaxPoints = std::uint64_t{1} << 27;

// Growable array of weighted points with a hard size cap. Coordinates are
// expected to stay pairwise distinct under same_point(); the search engines
// are responsible for that.
struct PointBuffer {
    std::vector<WeightedPoint> items;
    std::uint64_t max_points = kDefaultMaxPoints;

    explicit PointBuffer(std::uint64_t cap = kDefaultMaxPoints) : max_points(cap) {}

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    const WeightedPoint& operator[](std::size_t i) const { return items[i]; }
    WeightedPoint& operator[](std::size_t i) { return items[i]; }

    std::uint32_t append(double x, double y, double p) {
        if (items.size() >= max_points) throw CapacityExceeded(max_points);
        items.push_back({x, y, p});
        return static_cast<std::uint32_t>(items.size() - 1);
    }

    void clear() { items.clear(); }
};

enum class ViolationKind {
    InvalidRegion,
    EmptyMapList,
    WeightSignViolation,
    WeightNormalizationViolation,
    InitialPointOutsideRegion,
};

struct Violation {
    ViolationKind kind;
    std::string field;
    std::string rule;
};

inline const char* violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::InvalidRegion: return "InvalidRegion";
        case ViolationKind::EmptyMapList: return "EmptyMapList";
        case ViolationKind::WeightSignViolation: return "WeightSignViolation";
        case ViolationKind::WeightNormalizationViolation: return "WeightNormalizationViolation";
        case ViolationKind::InitialPointOutsideRegion: return "InitialPointOutsideRegion";
    }
    return "?";
}

// Checks every structural invariant of a SystemSpec. Returns the list of
// violations; an empty list means the system is usable as-is.
//
// Classic mode wants weights >= 0 summing to 1 and initial weight 1;
// idempotent mode wants weights <= 0 with maximum exactly 0 and initial
// weight 0. Map contractivity is deliberately not checked.
inline std::vector<Violation> validate_system(const SystemSpec& spec) {
    std::vector<Violation> out;
    if (!(spec.region.a < spec.region.b) || !(spec.region.c < spec.region.d)) {
        out.push_back({ViolationKind::InvalidRegion, "region", "requires a < b and c < d"});
        return out;  // everything else depends on a sane region
    }
    const std::size_t n_maps = spec.map_count();
    if (n_maps == 0) {
        out.push_back({ViolationKind::EmptyMapList, "maps", "at least one map is required"});
        return out;
    }
    if (spec.mode == MeasureMode::Idempotent) {
        double max_w = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_maps; ++j) {
            const double w = spec.map_weight(j);
            if (w > 0.0) {
                out.push_back({ViolationKind::WeightSignViolation,
                               "maps[" + std::to_string(j) + "].weight",
                               "idempotent weights must be <= 0"});
            }
            max_w = std::max(max_w, w);
        }
        if (max_w != 0.0) {
            out.push_back({ViolationKind::WeightNormalizationViolation, "maps",
                           "idempotent weights must have maximum exactly 0"});
        }
        if (spec.initial_weight != 0.0) {
            out.push_back({ViolationKind::WeightNormalizationViolation, "initial_weight",
                           "idempotent initial weight must be 0"});
        }
    } else {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_maps; ++j) {
            const double w = spec.map_weight(j);
            if (w < 0.0) {
                out.push_back({ViolationKind::WeightSignViolation,
                               "maps[" + std::to_string(j) + "].weight",
                               "classic weights must be >= 0"});
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            out.push_back({ViolationKind::WeightNormalizationViolation, "maps",
                           "classic weights must sum to 1 (within 1e-12)"});
        }
        if (spec.initial_weight != 1.0) {
            out.push_back({ViolationKind::WeightNormalizationViolation, "initial_weight",
                           "classic initial weight must be 1"});
        }
    }
    if (!spec.region.contains(spec.initial.x, spec.initial.y)) {
        out.push_back({ViolationKind::InitialPointOutsideRegion, "initial",
                       "initial point must lie inside the region"});
    }
    return out;
}

class InvalidSpec : public std::runtime_error {
public:
    explicit InvalidSpec(std::vector<Violation> violations)
        : std::runtime_error(format(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string format(const std::vector<Violation>& vs) {
        std::string msg = "invalid system:";
        for (const auto& v : vs) {
            msg += " [";
            msg += violation_name(v.kind);
            msg += " " + v.field + ": " + v.rule + "]";
        }
        return msg;
    }
    std::vector<Violation> violations_;
};

inline void ensure_valid(const SystemSpec& spec) {
    auto violations = validate_system(spec);
    if (!violations.empty()) throw InvalidSpec(std::move(violations));
}

}  // namespace quadifs
