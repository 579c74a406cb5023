#include "shotclust/io.hpp"

#include "shotclust/rng.hpp"
#include "shotclust/simgen.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace shotclust;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() /
               ("shotclust_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("shots csv round trip with validation")
{
    TempDir dir;
    const std::string path = dir.file("shots.csv");
    {
        std::ofstream out(path);
        out << "player_id,x,y,made\n";
        out << "curry,28.5,10.25,1\n";
        out << "curry,2.0,24.0,0\n";
        out << "capela,1.5,25.0,\n";
    }
    const CourtGrid grid;
    const auto records = read_shots_csv(path, grid);
    REQUIRE(records.size() == 3);
    CHECK(records[0].player_id == "curry");
    CHECK(records[0].x == doctest::Approx(28.5));
    CHECK(records[0].made.has_value());
    CHECK(*records[0].made);
    CHECK(!records[2].made.has_value());

    // bad header
    {
        std::ofstream out(dir.file("bad.csv"));
        out << "x,y\n1,2\n";
    }
    CHECK_THROWS_AS(read_shots_csv(dir.file("bad.csv"), grid), io_error);

    // out-of-domain row is reported with its line number
    {
        std::ofstream out(dir.file("oob.csv"));
        out << "player_id,x,y\nq,50.0,2.0\n";
    }
    CHECK_THROWS_WITH_AS(read_shots_csv(dir.file("oob.csv"), grid), doctest::Contains(":2"),
                         io_error);
    // ... unless reflection folds it back
    const auto folded = read_shots_csv(dir.file("oob.csv"), grid, true);
    CHECK(folded[0].x == doctest::Approx(44.0));

    CHECK_THROWS_AS(read_shots_csv(dir.file("missing.csv"), grid), io_error);
}

TEST_CASE("counts round trip through csv and the binary cache")
{
    TempDir dir;
    Rng rng(7);
    CountMatrix counts;
    counts.player_ids = {"a", "b", "c"};
    counts.y = IMat(3, 40);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 40; ++j)
            counts.y(i, j) = static_cast<int>(rng.integer(9));

    write_counts(dir.file("c.csv"), counts);
    const CountMatrix csv = read_counts(dir.file("c.csv"));
    CHECK(csv.player_ids == counts.player_ids);
    CHECK(csv.y == counts.y);

    write_counts(dir.file("c.bin"), counts);
    const CountMatrix bin = read_counts(dir.file("c.bin"));
    CHECK(bin.player_ids == counts.player_ids);
    CHECK(bin.y == counts.y);

    CHECK_THROWS_AS(read_counts(dir.file("c.csv") + ".nope"), io_error);
}

TEST_CASE("design csv round trip keeps values bit-exact")
{
    TempDir dir;
    const DesignMatrix X = synthetic_design(60, 3, 11);
    write_design_csv(dir.file("design.csv"), X);
    const DesignMatrix back = read_design_csv(dir.file("design.csv"));
    CHECK(back.X == X.X); // shortest-round-trip formatting

    {
        std::ofstream out(dir.file("bad_design.csv"));
        out << "intercept,b1\n0.5,1.0\n";
    }
    CHECK_THROWS_AS(read_design_csv(dir.file("bad_design.csv")), io_error);
}

TEST_CASE("partition csv round trip")
{
    TempDir dir;
    write_partition_csv(dir.file("p.csv"), {"x", "y", "z"}, {0, 1, 0});
    std::vector<std::string> ids;
    const auto labels = read_partition_csv(dir.file("p.csv"), &ids);
    CHECK(labels == std::vector<int>{0, 1, 0});
    CHECK(ids == std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("trace ndjson round trip")
{
    TempDir dir;
    MCMCTrace trace;
    trace.n = 3;
    trace.p = 1;
    Rng rng(13);
    for (int t = 0; t < 5; ++t) {
        TraceDraw d;
        d.iter = 10 + t;
        d.z = {0, t % 2, 0};
        d.psi = 1.0 + 0.1 * t;
        d.log_post = -100.0 + rng.normal();
        const int k = t % 2 + 1;
        for (int h = 0; h < k; ++h) {
            ClusterParams th;
            th.beta = Vec(2);
            th.beta << rng.normal(), rng.normal();
            th.rho = rng.uniform(0.1, 0.9);
            d.theta.push_back(std::move(th));
        }
        trace.draws.push_back(std::move(d));
    }

    write_trace_ndjson(dir.file("t.ndjson"), trace);
    const MCMCTrace back = read_trace_ndjson(dir.file("t.ndjson"));
    REQUIRE(back.T() == trace.T());
    CHECK(back.n == 3);
    CHECK(back.p == 1);
    for (int t = 0; t < trace.T(); ++t) {
        CHECK(back.draws[t].iter == trace.draws[t].iter);
        CHECK(back.draws[t].z == trace.draws[t].z);
        CHECK(back.draws[t].psi == trace.draws[t].psi);
        CHECK(back.draws[t].log_post == trace.draws[t].log_post);
        REQUIRE(back.draws[t].k() == trace.draws[t].k());
        for (int h = 0; h < trace.draws[t].k(); ++h) {
            CHECK(back.draws[t].theta[h].rho == trace.draws[t].theta[h].rho);
            CHECK((back.draws[t].theta[h].beta - trace.draws[t].theta[h].beta).norm() == 0.0);
        }
    }

    {
        std::ofstream out(dir.file("corrupt.ndjson"));
        out << "{not json\n";
    }
    CHECK_THROWS_AS(read_trace_ndjson(dir.file("corrupt.ndjson")), io_error);
}

TEST_CASE("fmt_double round trips")
{
    for (double v : {0.1, -3.725e-17, 57.397457045446197477, 0.0, 1e300}) {
        const double back = std::stod(fmt_double(v));
        CHECK(back == v);
    }
}
