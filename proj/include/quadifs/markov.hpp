#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quadifs/core.hpp"
#include "quadifs/quadtree.hpp"

namespace quadifs {

enum class Engine { Linear, Quadtree };

// Weight propagation for one candidate point. init* computes the weight a
// fresh point carries, combine folds a recomputed weight into a stored one.
// Classic mode multiplies map probabilities and sums over coincidences;
// idempotent mode adds log-densities and keeps the maximum.
struct WeightRule {
    MeasureMode mode = MeasureMode::Idempotent;
    bool attractor_only = false;

    double init2(double map_weight, double v) const {
        return mode == MeasureMode::Classic ? map_weight * v : map_weight + v;
    }
    // Two-point form. Association order is fixed; dedup needs bit-stable weights.
    double init4(double map_weight, double v0, double v1) const {
        return mode == MeasureMode::Classic ? (map_weight * v0) * v1
                                            : (map_weight + v0) + v1;
    }
    double combine(double old_p, double r) const {
        if (attractor_only) return old_p;
        return mode == MeasureMode::Classic ? old_p + r : std::max(old_p, r);
    }
};

// Brute-force dedup structure: one flat scan per search. Coordinates are
// mirrored into bit-pattern arrays so the scan reduces to integer compares;
// the x array is checked eight entries at a time and the full predicate only
// on an x hit. The comparisons counter reports what a plain entry-by-entry
// scan would have cost (position of the first match, or the full length),
// so counts stay meaningful next to the tree engine's.
class LinearIndex {
public:
    static constexpr std::size_t kNotFound = static_cast<std::size_t>(-1);

    template <typename Combine>
    SearchOutcome search_and_insert(double u, double v, double r, PointBuffer& buffer,
                                    Combine&& combine) {
        ++counters_.searches;
        const std::uint64_t ux = bits_of(u);
        const std::uint64_t uy = bits_of(v);
        const std::size_t pos = find(ux, uy);
        if (pos != kNotFound) {
            counters_.comparisons += pos + 1;
            buffer[pos].p = combine(buffer[pos].p, r);
            return {static_cast<std::uint32_t>(pos), false};
        }
        counters_.comparisons += xs_.size();
        const std::uint32_t idx = buffer.append(u, v, r);
        xs_.push_back(ux);
        ys_.push_back(uy);
        return {idx, true};
    }

    const QuadCounters& counters() const { return counters_; }
    int height() const { return 0; }
    std::uint64_t overflow_appends() const { return 0; }
    std::uint64_t clamped_searches() const { return 0; }
    std::size_t size() const { return xs_.size(); }
    void reserve(std::size_t n) {
        xs_.reserve(n);
        ys_.reserve(n);
    }

private:
    std::size_t find(std::uint64_t ux, std::uint64_t uy) const {
        const std::uint64_t* xs = xs_.data();
        const std::size_t n = xs_.size();
        std::size_t i = 0;
        for (; i + 8 <= n; i += 8) {
            bool hit = false;
            for (std::size_t k = 0; k < 8; ++k) hit |= (xs[i + k] == ux);
            if (hit) {
                for (std::size_t k = 0; k < 8; ++k) {
                    const std::size_t j = i + k;
                    if (xs[j] == ux && ys_[j] == uy) return j;
                }
                // x collided but y differed everywhere in the block; keep going
            }
        }
        for (; i < n; ++i) {
            if (xs[i] == ux && ys_[i] == uy) return i;
        }
        return kNotFound;
    }

    std::vector<std::uint64_t> xs_;
    std::vector<std::uint64_t> ys_;
    QuadCounters counters_;
};

struct IterationStats {
    int iteration = 0;
    std::uint64_t points = 0;       // |D| after this iteration
    std::uint64_t searches = 0;     // candidate points generated
    std::uint64_t comparisons = 0;
    int tree_height = 0;            // 0 for the linear engine
    std::uint64_t splits = 0;
    std::uint64_t overflow_appends = 0;
    std::uint64_t clamped_searches = 0;
    double wall_time_s = 0.0;
};

struct RunStats {
    std::vector<IterationStats> iterations;
    std::uint64_t total_searches = 0;
    std::uint64_t total_comparisons = 0;
    std::uint64_t total_splits = 0;
    std::uint64_t total_overflow_appends = 0;
    std::uint64_t total_clamped_searches = 0;
    double total_time_s = 0.0;
    int max_height = 0;  // max over per-iteration trees, the tables' "h"
};

struct RunOptions {
    Engine engine = Engine::Quadtree;
    std::uint32_t n_max = 64;
    bool attractor_only = false;
    std::uint64_t max_points = kDefaultMaxPoints;
    bool keep_final_tree = false;
    // Called after each iteration with that iteration's stats and the new D.
    std::function<void(const IterationStats&, const PointBuffer&)> on_iteration;
};

struct RunResult {
    PointBuffer points;
    RunStats stats;
    std::optional<QuadTree> final_tree;  // only with keep_final_tree + Quadtree

    RunResult() : points(kDefaultMaxPoints) {}
};

namespace detail {

template <typename Index>
void generate_ifs(const SystemSpec& spec, const PointBuffer& src, PointBuffer& dst,
                  Index& index, const WeightRule& rule) {
    const std::size_t n = src.size();
    auto fold = [&rule](double old_p, double r) { return rule.combine(old_p, r); };
    for (const AffineMap2& m : spec.maps2) {
        for (std::size_t i = 0; i < n; ++i) {
            const WeightedPoint& wp = src[i];
            const Point2 z = apply_map2(m, Point2{wp.x, wp.y});
            index.search_and_insert(z.x, z.y, rule.init2(m.weight, wp.p), dst, fold);
        }
    }
}

// Candidates are all ordered pairs of current points, self-pairs included.
template <typename Index>
void generate_gifs(const SystemSpec& spec, const PointBuffer& src, PointBuffer& dst,
                   Index& index, const WeightRule& rule) {
    const std::size_t n = src.size();
    auto fold = [&rule](double old_p, double r) { return rule.combine(old_p, r); };
    for (const AffineMap4& m : spec.maps4) {
        for (std::size_t i0 = 0; i0 < n; ++i0) {
            const WeightedPoint& w0 = src[i0];
            for (std::size_t i1 = 0; i1 < n; ++i1) {
                const WeightedPoint& w1 = src[i1];
                const Point2 z = apply_map4(m, Point2{w0.x, w0.y}, Point2{w1.x, w1.y});
                index.search_and_insert(z.x, z.y, rule.init4(m.weight, w0.p, w1.p), dst, fold);
            }
        }
    }
}

template <typename Index>
IterationStats drain_counters(const Index& index, int iteration, const PointBuffer& dst,
                              double seconds) {
    IterationStats s;
    s.iteration = iteration;
    s.points = dst.size();
    s.searches = index.counters().searches;
    s.comparisons = index.counters().comparisons;
    s.splits = index.counters().splits;
    s.tree_height = index.height();
    s.overflow_appends = index.overflow_appends();
    s.clamped_searches = index.clamped_searches();
    s.wall_time_s = seconds;
    return s;
}

}  // namespace detail

// One full deterministic run: start from the Dirac mass at the initial point
// and push the measure through the maps N times. Each iteration generates
// every candidate from the current point set, merges duplicates through the
// chosen search engine, then swaps the new set in. A fresh tree is built per
// iteration. Output is bit-identical across runs for fixed inputs.
inline RunResult run_system(const SystemSpec& spec, int N, const RunOptions& opt = {}) {
    ensure_valid(spec);
    if (N < 0) throw std::invalid_argument("iteration count must be >= 0");
    if (opt.engine == Engine::Quadtree && opt.n_max < 1)
        throw std::invalid_argument("n_max must be >= 1");

    const WeightRule rule{spec.mode, opt.attractor_only};
    using clock = std::chrono::steady_clock;

    RunResult result;
    result.points = PointBuffer(opt.max_points);
    result.points.append(spec.initial.x, spec.initial.y, spec.initial_weight);
    PointBuffer scratch(opt.max_points);

    for (int it = 1; it <= N; ++it) {
        scratch.clear();
        const auto t0 = clock::now();
        IterationStats is;
        if (opt.engine == Engine::Quadtree) {
            QuadTree tree(spec.region, opt.n_max);
            if (spec.kind == SystemKind::Ifs)
                detail::generate_ifs(spec, result.points, scratch, tree, rule);
            else
                detail::generate_gifs(spec, result.points, scratch, tree, rule);
            const double dt = std::chrono::duration<double>(clock::now() - t0).count();
            is = detail::drain_counters(tree, it, scratch, dt);
            if (opt.keep_final_tree && it == N) result.final_tree.emplace(std::move(tree));
        } else {
            LinearIndex index;
            index.reserve(result.points.size());
            if (spec.kind == SystemKind::Ifs)
                detail::generate_ifs(spec, result.points, scratch, index, rule);
            else
                detail::generate_gifs(spec, result.points, scratch, index, rule);
            const double dt = std::chrono::duration<double>(clock::now() - t0).count();
            is = detail::drain_counters(index, it, scratch, dt);
        }
        std::swap(result.points.items, scratch.items);

        result.stats.iterations.push_back(is);
        result.stats.total_searches += is.searches;
        result.stats.total_comparisons += is.comparisons;
        result.stats.total_splits += is.splits;
        result.stats.total_overflow_appends += is.overflow_appends;
        result.stats.total_clamped_searches += is.clamped_searches;
        result.stats.total_time_s += is.wall_time_s;
        result.stats.max_height = std::max(result.stats.max_height, is.tree_height);
        if (opt.on_iteration) opt.on_iteration(is, result.points);
    }
    return result;
}

struct EquivalenceReport {
    bool sets_equal = false;
    std::uint64_t left_count = 0;
    std::uint64_t right_count = 0;
    std::uint64_t matched = 0;
    bool weights_bitwise_equal = true;
    double max_abs_weight_diff = 0.0;
    double max_rel_weight_diff = 0.0;
};

// Set comparison under the dedup predicate: points match iff both coordinate
// bit patterns match. Weight discrepancies are reported over matched pairs.
inline EquivalenceReport compare_point_sets(const PointBuffer& a, const PointBuffer& b) {
    struct Key {
        std::uint64_t x, y;
        double p;
        bool operator<(const Key& o) const {
            return x != o.x ? x < o.x : y < o.y;
        }
    };
    auto keyed = [](const PointBuffer& buf) {
        std::vector<Key> ks;
        ks.reserve(buf.size());
        for (const WeightedPoint& w : buf.items) ks.push_back({bits_of(w.x), bits_of(w.y), w.p});
        std::sort(ks.begin(), ks.end());
        return ks;
    };
    const std::vector<Key> ka = keyed(a);
    const std::vector<Key> kb = keyed(b);

    EquivalenceReport rep;
    rep.left_count = ka.size();
    rep.right_count = kb.size();
    std::size_t i = 0, j = 0;
    while (i < ka.size() && j < kb.size()) {
        if (ka[i] < kb[j]) {
            ++i;
        } else if (kb[j] < ka[i]) {
            ++j;
        } else {
            ++rep.matched;
            if (bits_of(ka[i].p) != bits_of(kb[j].p)) {
                rep.weights_bitwise_equal = false;
                const double diff = std::abs(ka[i].p - kb[j].p);
                rep.max_abs_weight_diff = std::max(rep.max_abs_weight_diff, diff);
                const double scale = std::max(std::abs(ka[i].p), std::abs(kb[j].p));
                if (scale > 0.0)
                    rep.max_rel_weight_diff = std::max(rep.max_rel_weight_diff, diff / scale);
            }
            ++i;
            ++j;
        }
    }
    rep.sets_equal = rep.matched == rep.left_count && rep.matched == rep.right_count;
    return rep;
}

// Cross-checks the two engines on one system. The linear engine is the
// straight transcription of the defining iteration, so agreement here is the
// correctness argument for the tree engine. Guarded against inputs whose
// worst-case point growth would make the flat scan intractable.
inline EquivalenceReport run_oracle_equivalence(const SystemSpec& spec, int N,
                                                std::uint32_t n_max = 64) {
    const double L = static_cast<double>(spec.map_count());
    double predicted_log10;
    if (spec.kind == SystemKind::Ifs) {
        predicted_log10 = N * std::log10(std::max(L, 1.0));
        if (predicted_log10 > 6.0)
            throw std::invalid_argument("predicted point count above 1e6; linear oracle refused");
    } else {
        predicted_log10 = (std::pow(2.0, N) - 1.0) * std::log10(std::max(L, 1.0));
        if (predicted_log10 > 5.0)
            throw std::invalid_argument("predicted point count above 1e5; linear oracle refused");
    }

    RunOptions lin;
    lin.engine = Engine::Linear;
    RunOptions quad;
    quad.engine = Engine::Quadtree;
    quad.n_max = n_max;
    const RunResult rl = run_system(spec, N, lin);
    const RunResult rq = run_system(spec, N, quad);
    return compare_point_sets(rl.points, rq.points);
}

}  // namespace quadifs
