#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "quadifs/core.hpp"

namespace quadifs {

// Quadrant number of (x,y) inside a rectangle, as a two-bit Gray code:
// bit 0 selects the right half, bit 1 the upper half. Points on the exact
// midline go to the upper/right half; out-of-bounds coordinates are clamped
// to the nearest bound before the test.
//
//   2 | 3
//   --+--
//   0 | 1
inline int quadrant_index(double x, double y, const Region& bounds) {
    const double cx = std::min(std::max(x, bounds.a), bounds.b);
    const double cy = std::min(std::max(y, bounds.c), bounds.d);
    const int ix = ((cx - bounds.a) / (bounds.b - bounds.a) < 0.5) ? 0 : 1;
    const int iy = ((cy - bounds.c) / (bounds.d - bounds.c) < 0.5) ? 0 : 1;
    return 2 * iy + ix;
}

// One quadrant of the hierarchy. A node is either a leaf holding indices
// into a PointBuffer, or an internal node whose four sons occupy
// consecutive slots starting at first_son.
struct QuadNode {
    Region bounds;
    std::uint32_t depth = 0;
    std::int32_t first_son = -1;
    std::vector<std::uint32_t> items;

    bool is_leaf() const { return first_son < 0; }
};

struct QuadCounters {
    std::uint64_t searches = 0;
    std::uint64_t comparisons = 0;
    std::uint64_t splits = 0;
};

struct SearchOutcome {
    std::uint32_t index = 0;
    bool inserted = false;
};

// Point index over a rectangle. Leaves hold at most n_max entries; inserting
// past capacity splits the leaf at its midpoints and redistributes. Points
// themselves live in a PointBuffer; the tree stores only indices.
//
// Recursion never exceeds kDepthCap: a leaf at the cap grows beyond n_max
// instead of splitting (distinct doubles can be closer than any quadrant at
// that depth is wide).
class QuadTree {
public:
    static constexpr std::uint32_t kDepthCap = 64;

    QuadTree(Region region, std::uint32_t n_max) : n_max_(n_max) {
        QuadNode root;
        root.bounds = region;
        nodes_.push_back(std::move(root));
    }

    // Search for (u,v); when found, replace the stored weight with
    // combine(old, r) and report the buffer index. Otherwise append (u,v,r)
    // to the buffer and record the new index in the proper leaf, splitting
    // as needed. One linear scan per call; splits place the point by
    // quadrant descent without rescanning.
    template <typename Combine>
    SearchOutcome search_and_insert(double u, double v, double r, PointBuffer& buffer,
                                    Combine&& combine) {
        ++counters_.searches;
        const Region& world = nodes_[0].bounds;
        double cu = u;
        double cv = v;
        if (u < world.a || u > world.b || v < world.c || v > world.d) {
            // Out-of-region points are stored as produced but indexed clamped.
            cu = std::min(std::max(u, world.a), world.b);
            cv = std::min(std::max(v, world.c), world.d);
            ++clamped_searches_;
        }

        std::uint32_t ni = descend(0, cu, cv);

        // linear search over the leaf's points
        {
            const QuadNode& leaf = nodes_[ni];
            for (std::uint32_t idx : leaf.items) {
                ++counters_.comparisons;
                if (same_point(u, v, buffer[idx])) {
                    buffer[idx].p = combine(buffer[idx].p, r);
                    return {idx, false};
                }
            }
        }

        while (nodes_[ni].items.size() >= n_max_ && nodes_[ni].depth < kDepthCap) {
            split(ni, buffer);
            ni = descend(ni, cu, cv);
        }
        if (nodes_[ni].items.size() >= n_max_) ++overflow_appends_;

        const std::uint32_t idx = buffer.append(u, v, r);
        nodes_[ni].items.push_back(idx);
        return {idx, true};
    }

    // Maximum node depth; a lone root has height 0.
    int height() const { return height_; }

    const QuadCounters& counters() const { return counters_; }
    std::uint64_t overflow_appends() const { return overflow_appends_; }
    std::uint64_t clamped_searches() const { return clamped_searches_; }
    const std::vector<QuadNode>& nodes() const { return nodes_; }
    std::uint32_t n_max() const { return n_max_; }

    std::uint32_t leaf_for(double x, double y) const {
        const Region& world = nodes_[0].bounds;
        const double cx = std::min(std::max(x, world.a), world.b);
        const double cy = std::min(std::max(y, world.c), world.d);
        return descend(0, cx, cy);
    }

    // Text dump, one line per node in preorder:
    //   depth quadrant-path a b c d n_points
    // The root's path is "-"; son order is quadrant 0..3.
    void dump(std::ostream& os) const { dump_node(os, 0, "-"); }

private:
    std::uint32_t descend(std::uint32_t ni, double cx, double cy) const {
        while (!nodes_[ni].is_leaf()) {
            ni = static_cast<std::uint32_t>(nodes_[ni].first_son) +
                 static_cast<std::uint32_t>(quadrant_index(cx, cy, nodes_[ni].bounds));
        }
        return ni;
    }

    // Turn a leaf into an internal node with four empty leaf sons and move
    // every held index to the son its point descends to, in stored order.
    void split(std::uint32_t ni, const PointBuffer& buffer) {
        const Region world = nodes_[0].bounds;
        const Region b = nodes_[ni].bounds;
        const double mx = b.mid_x();
        const double my = b.mid_y();
        const std::uint32_t son_depth = nodes_[ni].depth + 1;
        const std::uint32_t first = static_cast<std::uint32_t>(nodes_.size());

        const Region son_bounds[4] = {
            {b.a, mx, b.c, my},  // quadrant 0: lower left
            {mx, b.b, b.c, my},  // quadrant 1: lower right
            {b.a, mx, my, b.d},  // quadrant 2: upper left
            {mx, b.b, my, b.d},  // quadrant 3: upper right
        };
        for (const Region& sb : son_bounds) {
            QuadNode son;
            son.bounds = sb;
            son.depth = son_depth;
            nodes_.push_back(std::move(son));
        }

        std::vector<std::uint32_t> moved;
        moved.swap(nodes_[ni].items);
        nodes_[ni].first_son = static_cast<std::int32_t>(first);
        for (std::uint32_t idx : moved) {
            const WeightedPoint& pt = buffer[idx];
            const double px = std::min(std::max(pt.x, world.a), world.b);
            const double py = std::min(std::max(pt.y, world.c), world.d);
            const int q = quadrant_index(px, py, nodes_[ni].bounds);
            nodes_[first + static_cast<std::uint32_t>(q)].items.push_back(idx);
        }

        ++counters_.splits;
        height_ = std::max(height_, static_cast<int>(son_depth));
    }

    void dump_node(std::ostream& os, std::uint32_t ni, const std::string& path) const {
        const QuadNode& n = nodes_[ni];
        os << n.depth << ' ' << path << ' ';
        write_double(os, n.bounds.a);
        os << ' ';
        write_double(os, n.bounds.b);
        os << ' ';
        write_double(os, n.bounds.c);
        os << ' ';
        write_double(os, n.bounds.d);
        os << ' ' << n.items.size() << '\n';
        if (!n.is_leaf()) {
            for (int q = 0; q < 4; ++q) {
                const std::string son_path = (ni == 0 ? "" : path) + static_cast<char>('0' + q);
                dump_node(os, static_cast<std::uint32_t>(n.first_son) + q, son_path);
            }
        }
    }

    static void write_double(std::ostream& os, double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    }

    std::vector<QuadNode> nodes_;
    std::uint32_t n_max_;
    int height_ = 0;
    QuadCounters counters_;
    std::uint64_t overflow_appends_ = 0;
    std::uint64_t clamped_searches_ = 0;
};

}  // namespace quadifs
