#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadifs/core.hpp"

namespace quadifs {

// System definition file: plain text, one directive per line.
//
//   # comment
//   kind ifs | gifs
//   mode classic | idempotent
//   region a b c d
//   initial x0 y0            (optional, defaults to the region center)
//   map a11 a12 b1 a21 a22 b2 w                      (kind ifs, 7 numbers)
//   map a11 a12 a13 a14 b1 a21 a22 a23 a24 b2 w      (kind gifs, 11 numbers)
//
// kind must precede the first map line so the coefficient count is known.

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, WrongArity, DuplicateDirective };

    ParseError(Kind kind, std::size_t line, const std::string& msg)
        : std::runtime_error(line == 0 ? msg : "line " + std::to_string(line) + ": " + msg),
          kind_(kind),
          line_(line) {}

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }  // 0 when no single line is at fault

private:
    Kind kind_;
    std::size_t line_;
};

namespace detail {

inline double parse_number(const std::string& tok, std::size_t line) {
    double value = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(ParseError::Kind::Syntax, line, "bad number '" + tok + "'");
    return value;
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

}  // namespace detail

inline SystemSpec parse_system_file(std::istream& in) {
    using PK = ParseError::Kind;
    SystemSpec spec;
    bool saw_kind = false, saw_mode = false, saw_region = false, saw_initial = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        const std::vector<std::string> toks = detail::tokenize(line);
        const std::string& dir = toks[0];
        auto num = [&](std::size_t i) { return detail::parse_number(toks[i], line_no); };

        if (dir == "kind") {
            if (saw_kind) throw ParseError(PK::DuplicateDirective, line_no, "duplicate kind");
            if (toks.size() != 2 || (toks[1] != "ifs" && toks[1] != "gifs"))
                throw ParseError(PK::Syntax, line_no, "expected: kind ifs|gifs");
            spec.kind = toks[1] == "ifs" ? SystemKind::Ifs : SystemKind::Gifs;
            saw_kind = true;
        } else if (dir == "mode") {
            if (saw_mode) throw ParseError(PK::DuplicateDirective, line_no, "duplicate mode");
            if (toks.size() != 2 || (toks[1] != "classic" && toks[1] != "idempotent"))
                throw ParseError(PK::Syntax, line_no, "expected: mode classic|idempotent");
            spec.mode = toks[1] == "classic" ? MeasureMode::Classic : MeasureMode::Idempotent;
            saw_mode = true;
        } else if (dir == "region") {
            if (saw_region) throw ParseError(PK::DuplicateDirective, line_no, "duplicate region");
            if (toks.size() != 5)
                throw ParseError(PK::WrongArity, line_no, "region takes 4 numbers (a b c d)");
            spec.region = {num(1), num(2), num(3), num(4)};
            saw_region = true;
        } else if (dir == "initial") {
            if (saw_initial) throw ParseError(PK::DuplicateDirective, line_no, "duplicate initial");
            if (toks.size() != 3)
                throw ParseError(PK::WrongArity, line_no, "initial takes 2 numbers (x0 y0)");
            spec.initial = {num(1), num(2)};
            saw_initial = true;
        } else if (dir == "map") {
            if (!saw_kind)
                throw ParseError(PK::Syntax, line_no, "kind must precede the first map");
            if (spec.kind == SystemKind::Ifs) {
                if (toks.size() != 8)
                    throw ParseError(PK::WrongArity, line_no,
                                     "one-point map takes 7 numbers (a11 a12 b1 a21 a22 b2 w)");
                AffineMap2 m;
                m.a11 = num(1);
                m.a12 = num(2);
                m.b1 = num(3);
                m.a21 = num(4);
                m.a22 = num(5);
                m.b2 = num(6);
                m.weight = num(7);
                spec.maps2.push_back(m);
            } else {
                if (toks.size() != 12)
                    throw ParseError(
                        PK::WrongArity, line_no,
                        "two-point map takes 11 numbers (a11 a12 a13 a14 b1 a21 a22 a23 a24 b2 w)");
                AffineMap4 m;
                m.a11 = num(1);
                m.a12 = num(2);
                m.a13 = num(3);
                m.a14 = num(4);
                m.b1 = num(5);
                m.a21 = num(6);
                m.a22 = num(7);
                m.a23 = num(8);
                m.a24 = num(9);
                m.b2 = num(10);
                m.weight = num(11);
                spec.maps4.push_back(m);
            }
        } else {
            throw ParseError(PK::Syntax, line_no, "unknown directive '" + dir + "'");
        }
    }

    if (!saw_kind) throw ParseError(PK::Syntax, 0, "missing kind directive");
    if (!saw_mode) throw ParseError(PK::Syntax, 0, "missing mode directive");
    if (!saw_region) throw ParseError(PK::Syntax, 0, "missing region directive");
    if (spec.map_count() == 0) throw ParseError(PK::Syntax, 0, "missing map directives");
    if (!saw_initial) spec.initial = {spec.region.mid_x(), spec.region.mid_y()};
    spec.initial_weight = spec.mode == MeasureMode::Classic ? 1.0 : 0.0;

    ensure_valid(spec);
    return spec;
}

inline SystemSpec parse_system_text(const std::string& text) {
    std::istringstream in(text);
    return parse_system_file(in);
}

inline SystemSpec load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open system file " + path);
    return parse_system_file(in);
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// Inverse of parse_system_file, up to comments and spacing. Numbers keep 17
// significant digits, so parse(print(spec)) reproduces spec bit for bit.
inline void print_system_file(const SystemSpec& spec, std::ostream& os) {
    os << "kind " << (spec.kind == SystemKind::Ifs ? "ifs" : "gifs") << '\n';
    os << "mode " << (spec.mode == MeasureMode::Classic ? "classic" : "idempotent") << '\n';
    os << "region " << detail::fmt_double(spec.region.a) << ' ' << detail::fmt_double(spec.region.b)
       << ' ' << detail::fmt_double(spec.region.c) << ' ' << detail::fmt_double(spec.region.d)
       << '\n';
    os << "initial " << detail::fmt_double(spec.initial.x) << ' '
       << detail::fmt_double(spec.initial.y) << '\n';
    if (spec.kind == SystemKind::Ifs) {
        for (const AffineMap2& m : spec.maps2) {
            os << "map";
            for (double v : {m.a11, m.a12, m.b1, m.a21, m.a22, m.b2, m.weight})
                os << ' ' << detail::fmt_double(v);
            os << '\n';
        }
    } else {
        for (const AffineMap4& m : spec.maps4) {
            os << "map";
            for (double v :
                 {m.a11, m.a12, m.a13, m.a14, m.b1, m.a21, m.a22, m.a23, m.a24, m.b2, m.weight})
                os << ' ' << detail::fmt_double(v);
            os << '\n';
        }
    }
}

// Point dump: header then one row per point in buffer order, 17 significant
// digits per field.
inline void write_points_csv(const PointBuffer& buffer, std::ostream& os) {
    os << "x,y,p\n";
    char buf[128];
    for (const WeightedPoint& w : buffer.items) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", w.x, w.y, w.p);
        os << buf;
    }
}

inline void write_points_csv(const PointBuffer& buffer, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_points_csv(buffer, out);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace quadifs
