#include "quadifs/system_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "quadifs/core.hpp"

using namespace quadifs;

namespace {

const std::string kSystemsDir = QUADIFS_SYSTEMS_DIR;

void expect_parse_error(const std::string& text, ParseError::Kind kind, std::size_t line) {
    try {
        parse_system_text(text);
        FAIL() << "expected ParseError for:\n" << text;
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
        EXPECT_EQ(e.line(), line) << e.what();
    }
}

}  // namespace

TEST(ParseSystem, BundledOnePointSystems) {
    const SystemSpec ml = load_system_file(kSystemsDir + "/maple_leaf.txt");
    EXPECT_EQ(ml.kind, SystemKind::Ifs);
    EXPECT_EQ(ml.mode, MeasureMode::Idempotent);
    EXPECT_EQ(ml.map_count(), 4u);
    EXPECT_DOUBLE_EQ(ml.region.b, 1.0);
    EXPECT_DOUBLE_EQ(ml.initial.x, 0.5);  // defaulted to the region center
    EXPECT_DOUBLE_EQ(ml.initial.y, 0.5);
    EXPECT_EQ(ml.initial_weight, 0.0);
    EXPECT_DOUBLE_EQ(ml.maps2[2].a12, -0.355);
    EXPECT_DOUBLE_EQ(ml.maps2[1].weight, -7.0);

    const SystemSpec fern = load_system_file(kSystemsDir + "/barnsley_fern.txt");
    EXPECT_EQ(fern.map_count(), 4u);
    EXPECT_DOUBLE_EQ(fern.maps2[3].a11, 0.0);
    EXPECT_DOUBLE_EQ(fern.maps2[0].weight, -11.0);
}

TEST(ParseSystem, BundledTwoPointSystems) {
    const SystemSpec a = load_system_file(kSystemsDir + "/gifs_a.txt");
    EXPECT_EQ(a.kind, SystemKind::Gifs);
    EXPECT_EQ(a.map_count(), 3u);
    EXPECT_DOUBLE_EQ(a.maps4[1].a13, 0.2);
    EXPECT_DOUBLE_EQ(a.maps4[1].b2, 0.5);
    EXPECT_EQ(a.initial_weight, 0.0);

    const SystemSpec b = load_system_file(kSystemsDir + "/gifs_b.txt");
    EXPECT_DOUBLE_EQ(b.region.a, -0.1);
    EXPECT_DOUBLE_EQ(b.region.d, 2.1);
    EXPECT_DOUBLE_EQ(b.initial.x, 1.0);  // center of [-0.1, 2.1]
    EXPECT_DOUBLE_EQ(b.maps4[0].b2, 1.3);
    EXPECT_DOUBLE_EQ(b.maps4[2].weight, -7.0);
}

TEST(ParseSystem, ExplicitInitialAndClassicWeights) {
    const SystemSpec s = parse_system_text(
        "kind ifs\n"
        "mode classic\n"
        "region 0 2 0 2\n"
        "initial 0.25 1.75\n"
        "map 0.5 0 0 0 0.5 0 0.5\n"
        "map 0.5 0 1 0 0.5 1 0.5\n");
    EXPECT_EQ(s.mode, MeasureMode::Classic);
    EXPECT_DOUBLE_EQ(s.initial.x, 0.25);
    EXPECT_DOUBLE_EQ(s.initial.y, 1.75);
    EXPECT_EQ(s.initial_weight, 1.0);
}

TEST(ParseSystem, CommentsBlanksAndIndentationAreIgnored) {
    const SystemSpec s = parse_system_text(
        "# heading comment\n"
        "\n"
        "  kind ifs\n"
        "\t mode idempotent\n"
        "   # indented comment\n"
        "region 0 1 0 1\n"
        "map 0.5 0 0 0 0.5 0 0\n"
        "\n");
    EXPECT_EQ(s.map_count(), 1u);
}

TEST(ParseSystem, ErrorTaxonomy) {
    const std::string head = "kind ifs\nmode idempotent\nregion 0 1 0 1\n";

    // map with 6 numbers
    expect_parse_error(head + "map 0.5 0 0 0 0.5 0\n", ParseError::Kind::WrongArity, 4);
    // two-point arity under one-point kind
    expect_parse_error(head + "map 0.5 0 0 0 0 0.5 0 0 0 0 0\n", ParseError::Kind::WrongArity, 4);
    // region with wrong count
    expect_parse_error("kind ifs\nmode idempotent\nregion 0 1 0\n",
                       ParseError::Kind::WrongArity, 3);
    // missing region: reported for the file, not one line
    expect_parse_error("kind ifs\nmode idempotent\nmap 0.5 0 0 0 0.5 0 0\n",
                       ParseError::Kind::Syntax, 0);
    // missing maps
    expect_parse_error(head, ParseError::Kind::Syntax, 0);
    // duplicate kind
    expect_parse_error("kind ifs\nkind ifs\n", ParseError::Kind::DuplicateDirective, 2);
    // map before kind
    expect_parse_error("map 0.5 0 0 0 0.5 0 0\n", ParseError::Kind::Syntax, 1);
    // number that fails to parse
    expect_parse_error(head + "map 0.5 0 zero 0 0.5 0 0\n", ParseError::Kind::Syntax, 4);
    // unknown directive
    expect_parse_error(head + "seed 42\n", ParseError::Kind::Syntax, 4);
    // bad kind token
    expect_parse_error("kind affine\n", ParseError::Kind::Syntax, 1);
}

TEST(ParseSystem, GifsMapArityIsEleven) {
    const std::string head = "kind gifs\nmode idempotent\nregion 0 1 0 1\n";
    expect_parse_error(head + "map 0.5 0 0 0 0.5 0 0\n", ParseError::Kind::WrongArity, 4);
}

TEST(ParseSystem, StructuralValidationRunsAfterParsing) {
    // parses fine, fails validation: positive weight in idempotent mode
    EXPECT_THROW(parse_system_text("kind ifs\nmode idempotent\nregion 0 1 0 1\n"
                                   "map 0.5 0 0 0 0.5 0 1\n"),
                 InvalidSpec);
    // region with a > b
    EXPECT_THROW(parse_system_text("kind ifs\nmode idempotent\nregion 1 0 0 1\n"
                                   "map 0.5 0 0 0 0.5 0 0\n"),
                 InvalidSpec);
}

TEST(ParseSystem, MissingFileThrowsIo) {
    EXPECT_THROW(load_system_file("/nonexistent/system.txt"), IoError);
}

namespace {

void expect_specs_bitwise_equal(const SystemSpec& a, const SystemSpec& b) {
    EXPECT_EQ(a.kind, b.kind);
    EXPECT_EQ(a.mode, b.mode);
    EXPECT_EQ(bits_of(a.region.a), bits_of(b.region.a));
    EXPECT_EQ(bits_of(a.region.b), bits_of(b.region.b));
    EXPECT_EQ(bits_of(a.region.c), bits_of(b.region.c));
    EXPECT_EQ(bits_of(a.region.d), bits_of(b.region.d));
    EXPECT_EQ(bits_of(a.initial.x), bits_of(b.initial.x));
    EXPECT_EQ(bits_of(a.initial.y), bits_of(b.initial.y));
    EXPECT_EQ(bits_of(a.initial_weight), bits_of(b.initial_weight));
    ASSERT_EQ(a.maps2.size(), b.maps2.size());
    for (std::size_t i = 0; i < a.maps2.size(); ++i) {
        const AffineMap2 &ma = a.maps2[i], &mb = b.maps2[i];
        for (auto [va, vb] : {std::pair{ma.a11, mb.a11}, {ma.a12, mb.a12}, {ma.b1, mb.b1},
                              {ma.a21, mb.a21}, {ma.a22, mb.a22}, {ma.b2, mb.b2},
                              {ma.weight, mb.weight}})
            EXPECT_EQ(bits_of(va), bits_of(vb));
    }
    ASSERT_EQ(a.maps4.size(), b.maps4.size());
    for (std::size_t i = 0; i < a.maps4.size(); ++i) {
        const AffineMap4 &ma = a.maps4[i], &mb = b.maps4[i];
        for (auto [va, vb] :
             {std::pair{ma.a11, mb.a11}, {ma.a12, mb.a12}, {ma.a13, mb.a13}, {ma.a14, mb.a14},
              {ma.b1, mb.b1}, {ma.a21, mb.a21}, {ma.a22, mb.a22}, {ma.a23, mb.a23},
              {ma.a24, mb.a24}, {ma.b2, mb.b2}, {ma.weight, mb.weight}})
            EXPECT_EQ(bits_of(va), bits_of(vb));
    }
}

}  // namespace

TEST(PrintSystem, RoundTripsBundledFilesBitwise) {
    for (const char* name : {"maple_leaf.txt", "barnsley_fern.txt", "gifs_a.txt", "gifs_b.txt"}) {
        const SystemSpec spec = load_system_file(kSystemsDir + "/" + name);
        std::ostringstream printed;
        print_system_file(spec, printed);
        const SystemSpec reparsed = parse_system_text(printed.str());
        expect_specs_bitwise_equal(spec, reparsed);
    }
}

TEST(PrintSystem, RoundTripsAwkwardDoubles) {
    SystemSpec s;
    s.kind = SystemKind::Ifs;
    s.mode = MeasureMode::Idempotent;
    s.region = {-0.1, 2.1, 1.0 / 3.0, 7.0};
    s.maps2 = {{0.1 + 0.2, -1e-300, 0.0, std::nextafter(1.0, 2.0), 1e17, -0.0, 0.0}};
    s.initial = {1.0, M_PI};
    s.initial_weight = 0.0;
    std::ostringstream printed;
    print_system_file(s, printed);
    expect_specs_bitwise_equal(s, parse_system_text(printed.str()));
}

TEST(PointsCsv, ExactBytes) {
    PointBuffer buf;
    buf.append(0.5, 0.25, 0.0);
    buf.append(1.0 / 3.0, -7.0, -11.5);
    std::ostringstream out;
    write_points_csv(buf, out);
    EXPECT_EQ(out.str(),
              "x,y,p\n"
              "0.5,0.25,0\n"
              "0.33333333333333331,-7,-11.5\n");
}

TEST(PointsCsv, RoundTripsThroughAReader) {
    PointBuffer buf;
    buf.append(0.1 + 0.2, std::nextafter(0.0, 1.0), -3.25);
    buf.append(-0.0, 1e300, 0.0);
    std::ostringstream out;
    write_points_csv(buf, out);

    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x,y,p");
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        double x, y, p;
        char c1, c2;
        std::istringstream row(line);
        ASSERT_TRUE(row >> x >> c1 >> y >> c2 >> p);
        EXPECT_EQ(c1, ',');
        EXPECT_EQ(c2, ',');
        ASSERT_LT(i, buf.size());
        EXPECT_EQ(bits_of(x), bits_of(buf[i].x));
        EXPECT_EQ(bits_of(y), bits_of(buf[i].y));
        EXPECT_EQ(bits_of(p), bits_of(buf[i].p));
        ++i;
    }
    EXPECT_EQ(i, buf.size());
}

TEST(PointsCsv, UnwritablePathThrows) {
    EXPECT_THROW(write_points_csv(PointBuffer{}, "/nonexistent_dir_zz/p.csv"), IoError);
}
