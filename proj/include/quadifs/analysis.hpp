#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "quadifs/core.hpp"
#include "quadifs/markov.hpp"

namespace quadifs {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Loop-bound parameters of one run: map count L, iterations N, leaf capacity.
struct CostModel {
    std::int64_t L = 2;
    std::int64_t N = 0;
    std::uint64_t n_max = 64;
};

struct CountWithOverflow {
    BigInt exact;
    std::uint64_t value = 0;  // exact clamped to uint64
    bool saturated = false;
};

namespace detail {

inline CountWithOverflow clamp_count(BigInt v) {
    CountWithOverflow c;
    c.exact = std::move(v);
    if (c.exact > std::numeric_limits<std::uint64_t>::max()) {
        c.saturated = true;
        c.value = std::numeric_limits<std::uint64_t>::max();
    } else {
        c.value = c.exact.template convert_to<std::uint64_t>();
    }
    return c;
}

// 1 + L + ... + L^(k-1), the exact value of (L^k - 1)/(L - 1).
inline BigInt geometric_sum(BigInt base, std::uint64_t k) {
    return (boost::multiprecision::pow(base, static_cast<unsigned>(k)) - 1) / (base - 1);
}

inline void require_cost_model(const CostModel& m) {
    if (m.L < 2) throw std::invalid_argument("cost model needs L >= 2");
    if (m.N < 0) throw std::invalid_argument("cost model needs N >= 0");
    if (m.n_max < 1) throw std::invalid_argument("cost model needs n_max >= 1");
}

}  // namespace detail

// Search count of the tree-indexed one-point iteration when every search
// scans a full leaf: n_max * (L^(N+1) - L) / (L - 1).
inline CountWithOverflow predicted_searches_ifs_quadtree(const CostModel& m) {
    detail::require_cost_model(m);
    const BigInt L = m.L;
    const BigInt numerator = boost::multiprecision::pow(L, static_cast<unsigned>(m.N + 1)) - L;
    return detail::clamp_count(BigInt(m.n_max) * numerator / (L - 1));
}

// Same for the two-point iteration: (n_max / (L^2 - 1)) * ((L^2)^(N+1) - L^2) / L,
// which reduces to n_max * (L^(2N+1) - L) / (L^2 - 1).
inline CountWithOverflow predicted_searches_gifs_quadtree(const CostModel& m) {
    detail::require_cost_model(m);
    const BigInt L = m.L;
    const BigInt L2 = L * L;
    const BigInt numerator =
        (boost::multiprecision::pow(L2, static_cast<unsigned>(m.N + 1)) - L2) / L;
    return detail::clamp_count(BigInt(m.n_max) * numerator / (L2 - 1));
}

// The closed form above assumes per-iteration growth n_i = L^i.
// Two-point iterations can grow as n_i = L * n_{i-1}^2 in the worst case, so
// the closed form and the direct summation of the loop bounds
// sum_i n_max * L * n_{i-1}^2 part ways at N >= 3. Both values are reported;
// neither is silently preferred.
struct GifsPredictionComparison {
    CountWithOverflow closed_form;
    CountWithOverflow summation;
    bool agree = false;
};

inline GifsPredictionComparison compare_gifs_search_predictions(const CostModel& m) {
    detail::require_cost_model(m);
    const BigInt L = m.L;
    BigInt total = 0;
    BigInt n_prev = 1;  // n_0 = 1
    for (std::int64_t i = 1; i <= m.N; ++i) {
        total += BigInt(m.n_max) * L * n_prev * n_prev;
        n_prev = L * n_prev * n_prev;
    }
    GifsPredictionComparison cmp;
    cmp.closed_form = predicted_searches_gifs_quadtree(m);
    cmp.summation = detail::clamp_count(total);
    cmp.agree = cmp.closed_form.exact == cmp.summation.exact;
    return cmp;
}

// Cost predictions for the flat-scan engine. The printed pre-asymptotic sums
// contain the double exponential L^(L^(i-1)); they are evaluated exactly in
// arbitrary precision, alongside the asymptotic simplification (sum replaced
// by its last term) and the literal worst-case scan cost where every search
// scans the full new point set.
struct LinearSearchPrediction {
    BigInt exact;        // the printed sum, exactly
    BigRat asymptotic;   // last-term-only simplification, possibly non-integer
    BigInt scan_all;     // sum_i L * n_{i-1}^(1 or 2) * n_i
};

inline LinearSearchPrediction predicted_searches_linear(const CostModel& m, SystemKind kind) {
    detail::require_cost_model(m);
    if (m.N < 1) throw std::invalid_argument("linear-search prediction needs N >= 1");
    const BigInt L = m.L;
    constexpr std::uint64_t kExponentCap = std::uint64_t{1} << 20;

    LinearSearchPrediction out;
    if (kind == SystemKind::Ifs) {
        // exact: -N L^2/(L-1) + (L^2/(L-1)) sum_i L^(L^(i-1))
        //      = L^2 * sum_i (L^(L^(i-1)) - 1)/(L - 1)
        BigInt sum = 0;
        for (std::int64_t i = 1; i <= m.N; ++i) {
            const BigInt e = boost::multiprecision::pow(L, static_cast<unsigned>(i - 1));
            if (e > kExponentCap) throw std::overflow_error("exact prediction exponent too large");
            sum += detail::geometric_sum(L, e.template convert_to<std::uint64_t>());
        }
        out.exact = L * L * sum;

        const BigInt eN = boost::multiprecision::pow(L, static_cast<unsigned>(m.N - 1));
        const BigInt last = boost::multiprecision::pow(L, eN.template convert_to<unsigned>());
        out.asymptotic = BigRat(L * L * (last - m.N), L - 1);

        // n_i = L^i; every candidate scans all n_i points
        BigInt n_prev = 1;
        for (std::int64_t i = 1; i <= m.N; ++i) {
            const BigInt n_cur = n_prev * L;
            out.scan_all += L * n_prev * n_cur;
            n_prev = n_cur;
        }
    } else {
        // exact: (L^2 - L^2 L^N)/(L-1)^2 + (1/(L-1)) sum_i L^(i+1) L^(L^(i-1))
        //      = sum_i L^(i+1) (L^(L^(i-1)) - 1)/(L - 1)
        BigInt sum = 0;
        for (std::int64_t i = 1; i <= m.N; ++i) {
            const BigInt e = boost::multiprecision::pow(L, static_cast<unsigned>(i - 1));
            if (e > kExponentCap) throw std::overflow_error("exact prediction exponent too large");
            sum += boost::multiprecision::pow(L, static_cast<unsigned>(i + 1)) *
                   detail::geometric_sum(L, e.template convert_to<std::uint64_t>());
        }
        out.exact = sum;

        const BigInt eN = boost::multiprecision::pow(L, static_cast<unsigned>(m.N - 1));
        const BigInt last = boost::multiprecision::pow(L, static_cast<unsigned>(m.N + 1)) *
                            boost::multiprecision::pow(L, eN.template convert_to<unsigned>());
        const BigInt LN = boost::multiprecision::pow(L, static_cast<unsigned>(m.N));
        out.asymptotic = BigRat(L * L - L * L * LN, (L - 1) * (L - 1)) + BigRat(last, L - 1);

        // worst-case growth n_i = L * n_{i-1}^2; every candidate scans n_i points
        BigInt n_prev = 1;
        for (std::int64_t i = 1; i <= m.N; ++i) {
            const BigInt n_cur = L * n_prev * n_prev;
            out.scan_all += L * n_prev * n_prev * n_cur;
            n_prev = n_cur;
        }
    }
    return out;
}

struct SweepRow {
    std::uint32_t n_max = 0;
    int height = 0;
    std::uint64_t points = 0;
    double time_s = 0.0;
    std::uint64_t comparisons = 0;
};

struct SweepReport {
    std::vector<SweepRow> rows;  // sorted by n_max ascending
    std::optional<double> baseline_linear_s;
    std::vector<std::string> row_errors;  // rows that failed, with the cause
};

// One tree run per capacity value. Heights and point counts are deterministic;
// wall time is the median over `reps` repetitions. A failed capacity value is
// recorded and skipped, the sweep goes on. The optional baseline is a single
// flat-scan run of the same system.
inline SweepReport run_nmax_sweep(const SystemSpec& spec, int N,
                                  std::vector<std::uint32_t> nmax_values,
                                  bool with_linear_baseline = false, int reps = 3) {
    if (nmax_values.empty()) throw std::invalid_argument("empty capacity list");
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    std::sort(nmax_values.begin(), nmax_values.end());

    SweepReport report;
    for (std::uint32_t nm : nmax_values) {
        try {
            RunOptions opt;
            opt.engine = Engine::Quadtree;
            opt.n_max = nm;
            std::vector<double> times;
            SweepRow row;
            row.n_max = nm;
            for (int rep = 0; rep < reps; ++rep) {
                const RunResult res = run_system(spec, N, opt);
                times.push_back(res.stats.total_time_s);
                row.height = res.stats.max_height;
                row.points = res.points.size();
                row.comparisons = res.stats.total_comparisons;
            }
            std::sort(times.begin(), times.end());
            row.time_s = times[times.size() / 2];
            report.rows.push_back(row);
        } catch (const std::exception& e) {
            report.row_errors.push_back("nmax=" + std::to_string(nm) + ": " + e.what());
        }
    }
    if (with_linear_baseline) {
        RunOptions opt;
        opt.engine = Engine::Linear;
        const RunResult res = run_system(spec, N, opt);
        report.baseline_linear_s = res.stats.total_time_s;
    }
    return report;
}

inline void write_sweep_csv(const SweepReport& report, std::ostream& os) {
    char buf[96];
    if (report.baseline_linear_s) {
        std::snprintf(buf, sizeof buf, "# linear_baseline_s=%.9g\n", *report.baseline_linear_s);
        os << buf;
    }
    os << "nmax,height,points,time_s,comparisons\n";
    for (const SweepRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%u,%d,%llu,%.9g,%llu\n", r.n_max, r.height,
                      static_cast<unsigned long long>(r.points), r.time_s,
                      static_cast<unsigned long long>(r.comparisons));
        os << buf;
    }
}

}  // namespace quadifs
