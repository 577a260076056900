#include "quadifs/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace quadifs;

namespace {

const std::string kSystemsDir = QUADIFS_SYSTEMS_DIR;
const std::string kMapleLeaf = kSystemsDir + "/maple_leaf.txt";

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.is_open()) << path;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string temp_path(const std::string& name) { return testing::TempDir() + name; }

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = temp_path(name);
    std::ofstream out(path);
    out << content;
    return path;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST(Cli, ZeroIterationRunPrintsTheSeedSummary) {
    const CliResult r = cli({"run", "--system", kMapleLeaf, "--iters", "0"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "points=1 height=0 time_s=0\n");
    EXPECT_TRUE(r.err.empty());
}

TEST(Cli, SummaryReportsRunShape) {
    const CliResult r = cli({"run", "--system", kMapleLeaf, "--iters", "3"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, 10), "points=64 ");
    EXPECT_NE(r.out.find(" height="), std::string::npos);
    EXPECT_NE(r.out.find(" time_s="), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({"run", "--iters", "3"}).code, 1);  // --system missing
    EXPECT_EQ(cli({"run", "--system", kMapleLeaf}).code, 1);  // --iters missing
    EXPECT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "1", "--engine", "hash"}).code, 1);
    EXPECT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "1", "--nmax", "0"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);  // a subcommand is required
    EXPECT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "1", "--engine", "linear",
                   "--tree-dump", temp_path("t.txt")})
                  .code,
              1);
    const CliResult r = cli({"run", "--iters", "3"});
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpIsNotAnError) {
    const CliResult r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("run"), std::string::npos);
    EXPECT_NE(r.out.find("sweep"), std::string::npos);
}

TEST(Cli, MissingSystemFileIsAnIoError) {
    const CliResult r = cli({"run", "--system", "/no/such/file.txt", "--iters", "1"});
    EXPECT_EQ(r.code, 4);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MalformedSystemFileIsAParseError) {
    const std::string path = write_temp("quadifs_bad_syntax.txt",
                                        "kind ifs\nmode idempotent\nregion 0 1 0 1\n"
                                        "map 0.5 0 0\n");
    const CliResult r = cli({"run", "--system", path, "--iters", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("parse error"), std::string::npos);
}

TEST(Cli, InvalidSystemIsAParseError) {
    const std::string path = write_temp("quadifs_bad_weights.txt",
                                        "kind ifs\nmode idempotent\nregion 0 1 0 1\n"
                                        "map 0.5 0 0 0 0.5 0 2\n");
    const CliResult r = cli({"run", "--system", path, "--iters", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("invalid system"), std::string::npos);
}

TEST(Cli, UnwritableOutputIsAnIoError) {
    const CliResult r = cli({"run", "--system", kMapleLeaf, "--iters", "1", "--points",
                             "/nonexistent_dir_zz/p.csv"});
    EXPECT_EQ(r.code, 4);
}

TEST(Cli, PointsCsvIsDeterministicAcrossRuns) {
    const std::string p1 = temp_path("quadifs_pts_1.csv");
    const std::string p2 = temp_path("quadifs_pts_2.csv");
    ASSERT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "5", "--points", p1}).code, 0);
    ASSERT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "5", "--points", p2}).code, 0);
    const std::string a = slurp(p1);
    EXPECT_EQ(a, slurp(p2));
    EXPECT_EQ(count_lines(a), 1u + 1024u);  // header + 4^5 points
}

TEST(Cli, StatsCsvHasOneRowPerIteration) {
    const std::string path = temp_path("quadifs_stats.csv");
    ASSERT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "4", "--stats", path}).code, 0);
    const std::string text = slurp(path);
    EXPECT_EQ(count_lines(text), 1u + 4u);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "iteration,points,searches,comparisons,height,splits,time_s");
    EXPECT_EQ(text.substr(text.find('\n') + 1, 2), "1,");
}

TEST(Cli, TreeDumpStartsAtTheRoot) {
    const std::string path = temp_path("quadifs_tree.txt");
    ASSERT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "4", "--tree-dump", path}).code, 0);
    const std::string text = slurp(path);
    EXPECT_EQ(text.substr(0, 4), "0 - ");
    EXPECT_GT(count_lines(text), 1u);
}

TEST(Cli, AttractorImageIsBinaryValued) {
    const std::string path = temp_path("quadifs_attractor.pgm");
    ASSERT_EQ(cli({"run", "--system", kMapleLeaf, "--iters", "5", "--attractor-only", "--image",
                   path, "--width", "64", "--height", "48"})
                  .code,
              0);
    const std::string pgm = slurp(path);
    ASSERT_EQ(pgm.substr(0, 12), "P5\n64 48\n255");
    const std::size_t raster = pgm.find('\n', 9) + 1;
    ASSERT_EQ(pgm.size() - raster, 64u * 48u);
    bool lit = false;
    for (std::size_t i = raster; i < pgm.size(); ++i) {
        const unsigned char b = static_cast<unsigned char>(pgm[i]);
        EXPECT_TRUE(b == 0 || b == 255);
        lit |= b == 255;
    }
    EXPECT_TRUE(lit);
}

TEST(Cli, SweepWritesOneRowPerCapacity) {
    const std::string path = temp_path("quadifs_sweep.csv");
    const CliResult r =
        cli({"sweep", "--system", kMapleLeaf, "--iters", "2", "--nmax-list", "8", "--out", path});
    EXPECT_EQ(r.code, 0);
    const std::string text = slurp(path);
    EXPECT_EQ(count_lines(text), 2u);
    EXPECT_EQ(text.substr(0, text.find('\n')), "nmax,height,points,time_s,comparisons");
    EXPECT_EQ(text.substr(text.find('\n') + 1, 2), "8,");
}

TEST(Cli, SweepBaselineHeaderLine) {
    const std::string path = temp_path("quadifs_sweep_base.csv");
    const CliResult r = cli({"sweep", "--system", kMapleLeaf, "--iters", "2", "--nmax-list",
                             "4,16", "--linear-baseline", "--out", path});
    EXPECT_EQ(r.code, 0);
    const std::string text = slurp(path);
    EXPECT_EQ(text.substr(0, 20), "# linear_baseline_s=");
    EXPECT_EQ(count_lines(text), 4u);  // baseline + header + two rows
}

TEST(Cli, SweepRejectsBadCapacityLists) {
    const std::string path = temp_path("quadifs_sweep_bad.csv");
    EXPECT_EQ(cli({"sweep", "--system", kMapleLeaf, "--iters", "1", "--nmax-list", "4,x", "--out",
                   path})
                  .code,
              1);
    EXPECT_EQ(cli({"sweep", "--system", kMapleLeaf, "--iters", "1", "--nmax-list", "0", "--out",
                   path})
                  .code,
              1);
    EXPECT_EQ(cli({"sweep", "--system", kMapleLeaf, "--iters", "1", "--nmax-list", "", "--out",
                   path})
                  .code,
              1);
}
