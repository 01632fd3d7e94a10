#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "twave/io.hpp"

using namespace twave;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("17 significant digits round-trip") {
    for (double x : {1.0 / 3.0, 0.1, 2.0 / 3.0 * 1e-300, 123456789.123456789, -5e-324})
        CHECK(std::strtod(fmt17(x).c_str(), nullptr) == x);
    CHECK(fmt17(NAN) == "nan");
    CHECK(fmt17(INFINITY) == "inf");
    CHECK(fmt17(-INFINITY) == "-inf");
    CHECK(num(NAN).is_string());
    CHECK(num(1.5).is_number());
}

TEST_CASE("CSV schemas") {
    Profile p;
    p.samples = {{1.0, 2.0, 3.0}, {2.0, 2.5, 0.1}};
    const auto csv = profile_csv(p);
    CHECK(csv.rfind("H,psi,dpsi\n", 0) == 0);
    CHECK(csv.find("\n2,2.5,0.10000000000000001\n") != std::string::npos);

    std::vector<SweepRow> rows(2);
    rows[0] = {1.0, 0.5, 9.5, NAN, NAN, true, ""};
    rows[1] = {1.1, 0.4, 11.0, 2.0, 0.1, false, "NoBracket: x"};
    const auto sw = sweep_csv(rows);
    CHECK(sw == "k,b_cg,B_cg,dB_dk\n1,0.5,9.5,nan\n");

    Trajectory tr;
    tr.points = {{0.5, 0.25, 0.125, -2.0}};
    CHECK(trajectory_csv(tr) == "s,r,q,p\n-2,0.5,0.25,0.125\n");

    CHECK(law_csv({{std::exp(1.0), 1.0, 2.0}}).rfind("x,dHdx_cubed,ln_x\n", 0) == 0);

    GridFn g;
    g.nodes = {0.01, 100.0};
    g.values = {1.0, 3.0};
    CHECK(grid_csv(g) == "H,psi\n0.01,1\n100,3\n");

    Series3 s(2);
    s.set({0, 1, 0}, 0.5);
    s.set({0, 0, 1}, -2.0);
    CHECK(series_csv(s, true) == "j,l,p,value\n0,1,0,0.5\n0,0,1,-2\n");
}

TEST_CASE("write_atomic replaces the target and leaves no temporary") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("twave_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string target = (dir / "out.csv").string();
    write_atomic(target, "first\n");
    write_atomic(target, "second\n");
    CHECK(slurp(target) == "second\n");
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
    CHECK(files == 1);
    CHECK_THROWS_AS(write_atomic((dir / "missing" / "x.csv").string(), "x"), DomainError);
    fs::remove_all(dir);
}

TEST_CASE("JSON summaries") {
    const auto j = to_json(validate_params(2.0, 1.0));
    CHECK(j.dump() == R"({"n":2.0,"k":1.0,"lambda":1.0,"V":0.3333333333333333})");
    const auto rows = to_json(std::vector<SweepRow>{{1.0, 0.5, 9.5, NAN, NAN, true, ""}});
    CHECK(rows[0]["dB_dk"] == "nan");
}

}  // TEST_SUITE
