#include "dirac/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
    json envelope() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = dirac::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("dirac_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

} // namespace

TEST_CASE("loop-phase with every method")
{
    const Outcome r = run({"loop-phase", "--method", "all", "--circle", "z=0.5", "--json-only"});
    REQUIRE(r.code == dirac::cli::kExitOk);
    const json e = r.envelope();
    CHECK(e["tool_version"] == "1.0.0");
    CHECK(e["command"] == "loop-phase");
    CHECK(e["outputs"]["value_over_pi"].get<double>() == doctest::Approx(-0.5).epsilon(1e-12));
    for (const char* m : {"analytic", "wilson", "flux"})
        CHECK(e["outputs"]["methods"][m]["value_over_pi"].get<double>() == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(e["outputs"]["agreement_report"]["max_abs_difference_rad"].get<double>() <= 1e-4);
    CHECK(r.err.empty());

    const Outcome minus = run({"loop-phase", "--branch", "minus", "--method", "all", "--circle", "z=0.5", "--json-only"});
    REQUIRE(minus.code == 0);
    CHECK(minus.envelope()["outputs"]["value_over_pi"].get<double>() == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(minus.envelope()["outputs"]["agreement_report"]["max_abs_difference_rad"].get<double>() <= 1e-4);
}

TEST_CASE("eigen reports nodal membership")
{
    const Outcome r = run({"eigen", "--at", "0,0,-0.5"});
    REQUIRE(r.code == 0);
    const json e = r.envelope();
    CHECK(e["outputs"]["on_string"] == json::array({true, false}));
    CHECK(e["outputs"]["energies"] == json::array({0.5, -0.5}));
    CHECK_FALSE(r.err.empty());  // human summary
}

TEST_CASE("usage errors exit with 2")
{
    CHECK(run({}).code == dirac::cli::kExitUsage);
    CHECK(run({"no-such-command"}).code == dirac::cli::kExitUsage);
    CHECK(run({"eigen"}).code == dirac::cli::kExitUsage);
    CHECK(run({"eigen", "--at", "1,2"}).code == dirac::cli::kExitUsage);
    CHECK(run({"loop-phase", "--branch", "sideways"}).code == dirac::cli::kExitUsage);
    CHECK(run({"loop-phase", "--method", "guess"}).code == dirac::cli::kExitUsage);
    CHECK(run({"strings", "--grid", "x=0:1"}).code == dirac::cli::kExitUsage);
    CHECK(run({"eigen", "--at", "0,0,1", "--model", "custom", "--fx", "X"}).code == dirac::cli::kExitUsage);
    CHECK(run({"eigen", "--at", "0,0,1", "--model", "z-quadratic", "--params", "Q=1"}).code == dirac::cli::kExitUsage);
    CHECK(run({"--help"}).code == dirac::cli::kExitOk);
    const Outcome v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == "1.0.0\n");
}

TEST_CASE("domain errors exit with 3 and carry an error object")
{
    const Outcome r = run({"curvature", "--at", "0,0,0", "--json-only"});
    CHECK(r.code == dirac::cli::kExitDomain);
    const json e = r.envelope();
    CHECK(e["error"]["code"] == "degenerate");
    CHECK_FALSE(e.contains("outputs"));

    const Outcome touch = run({"loop-phase", "--method", "wilson", "--circle", "z=-1,r=0.5,cx=0.5", "--nodes", "64", "--json-only"});
    CHECK(touch.code == dirac::cli::kExitDomain);
    CHECK(touch.envelope()["error"]["code"] == "loop_touches_string");
}

TEST_CASE("output is deterministic and round-trips through a JSON parser")
{
    const std::vector<std::string> args{"charge", "--json-only"};
    const Outcome a = run(args);
    const Outcome b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.envelope().dump(2) + "\n" == a.out);
    CHECK(a.envelope()["outputs"]["charge"].get<double>() == doctest::Approx(-0.5).epsilon(1e-6));
    const json keys = a.envelope();
    std::vector<std::string> names;
    for (const auto& [k, v] : keys.items()) {
        (void)v;
        names.push_back(k);
    }
    CHECK(std::is_sorted(names.begin(), names.end()));
}

TEST_CASE("model parameters and custom models")
{
    const Outcome zq = run({"eigen", "--at", "0,0,0.3", "--model", "z-quadratic", "--params", "Z0=0.3", "--json-only"});
    REQUIRE(zq.code == 0);
    CHECK(zq.envelope()["model"]["params"]["Z0"] == 0.3);
    CHECK(zq.envelope()["outputs"]["degenerate"] == true);

    const Outcome custom =
        run({"eigen", "--at", "1,0,0", "--model", "custom", "--fx", "X^3 - X", "--fy", "Y", "--fz", "Z"});
    REQUIRE(custom.code == 0);
    const json e = custom.envelope();
    CHECK(e["model"]["validated"] == false);
    REQUIRE(e["warnings"].size() == 1);
    CHECK(e["warnings"][0].get<std::string>().find("not validated") != std::string::npos);
    CHECK(custom.err.find("warning:") != std::string::npos);
    CHECK(e["outputs"]["degenerate"] == true);
}

TEST_CASE("strings writes its CSV to the output directory")
{
    TempDir dir;
    const Outcome r = run({"strings", "--grid", "x=-1:1:0.05,y=-1:1:0.05,z=-1:1:0.05", "--out-dir", dir.path().string(), "--json-only"});
    REQUIRE(r.code == 0);
    const json e = r.envelope();
    CHECK(e["outputs"]["string_count"] == 1);
    CHECK(e["outputs"]["degeneracy_flags"] == json::array({true}));
    const fs::path csv = dir.path() / "strings_base_plus.csv";
    REQUIRE(fs::exists(csv));
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    CHECK(header == "string_id,vertex_index,x,y,z");
    int rows = 0;
    for (std::string line; std::getline(f, line);) ++rows;
    CHECK(rows > 10);
}

TEST_CASE("unwritable output directory is an I/O failure")
{
    TempDir dir;
    const fs::path blocker = dir.path() / "file";
    std::ofstream(blocker) << "x";
    const Outcome r = run({"strings", "--grid", "x=-1:1:0.1,y=-1:1:0.1,z=-1:1:0.1", "--out-dir", (blocker / "sub").string(), "--json-only"});
    CHECK(r.code == dirac::cli::kExitFailure);
    CHECK(r.envelope()["error"]["code"] == "io_error");
}

TEST_CASE("export-figure writes per-branch data")
{
    TempDir dir;
    const Outcome r = run({"export-figure", "--figure", "fig3a", "--grid", "x=-1:1:0.05,y=-1:1:0.05,z=-1:1:0.05", "--out-dir",
                           dir.path().string(), "--json-only"});
    REQUIRE(r.code == 0);
    CHECK(r.envelope()["model"]["name"] == "z-quadratic");
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir.path())) {
        (void)entry;
        ++files;
    }
    CHECK(files == 6);
}

TEST_CASE("degenerate-path and reproduce-paper")
{
    const Outcome d = run({"degenerate-path", "--side", "both", "--json-only"});
    REQUIRE(d.code == 0);
    const json de = d.envelope();
    CHECK(de["outputs"]["plus_y"]["value_over_pi"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(de["outputs"]["minus_y"]["value_over_pi"].get<double>() == doctest::Approx(-0.5).epsilon(1e-6));

    const Outcome p = run({"reproduce-paper", "--json-only"});
    CHECK(p.code == 0);
    const json e = p.envelope();
    CHECK(e["outputs"]["failed"] == 0);
    CHECK(e["outputs"]["passed"].get<int>() == static_cast<int>(e["outputs"]["checks"].size()));
}

TEST_CASE("phase-map and adiabatic-sweep write CSV tables")
{
    TempDir dir;
    const Outcome map = run({"phase-map", "--grid", "x=-1:1:0.5,y=-1:1:0.5,z=-1:1:0.5", "--out-dir", dir.path().string(), "--json-only"});
    REQUIRE(map.code == 0);
    const json m = map.envelope();
    CHECK(m["outputs"]["points"] == 125);
    CHECK(m["outputs"]["skipped"].get<int>() > 0);
    CHECK(m["warnings"].size() == 1);
    std::ifstream f(m["outputs"]["csv"].get<std::string>());
    std::string line;
    std::getline(f, line);
    CHECK(line == "x,y,z,gamma_rad");
    int rows = 0;
    int nan_rows = 0;
    while (std::getline(f, line)) {
        ++rows;
        if (line.ends_with(",nan")) ++nan_rows;
    }
    CHECK(rows == 125);
    CHECK(nan_rows == m["outputs"]["skipped"].get<int>());

    const Outcome sweep = run({"adiabatic-sweep", "--T-list", "100,200,400", "--out-dir", dir.path().string(), "--json-only"});
    REQUIRE(sweep.code == 0);
    const json s = sweep.envelope();
    CHECK(s["outputs"]["monotone"] == true);
    CHECK(s["outputs"]["rows"].size() == 3);
    CHECK(fs::exists(s["outputs"]["csv"].get<std::string>()));
}

TEST_CASE("connection reports the finite-difference cross-check")
{
    const Outcome r = run({"connection", "--at", "0.3,-0.4,0.5", "--h", "1e-5", "--json-only"});
    REQUIRE(r.code == 0);
    const json o = r.envelope()["outputs"];
    for (int i = 0; i < 3; ++i) {
        CHECK(o["a_real"][i].get<double>() == doctest::Approx(o["analytic"]["a_real"][i].get<double>()).epsilon(1e-12));
        CHECK(o["numeric"]["a_real"][i].get<double>() == doctest::Approx(o["a_real"][i].get<double>()).epsilon(1e-8));
    }
    CHECK(run({"connection", "--at", "0,0,-1", "--json-only"}).code == dirac::cli::kExitDomain);
}

TEST_CASE("curvature gauge selection")
{
    const Outcome automatic = run({"curvature", "--at", "0,0,1", "--branch", "minus", "--json-only"});
    REQUIRE(automatic.code == 0);
    CHECK(automatic.envelope()["inputs"]["gauge"] == "auto");
    CHECK(automatic.envelope()["outputs"]["curvature"][2].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
    // the lower branch's standard-gauge string runs through (0, 0, 1)
    const Outcome forced = run({"curvature", "--at", "0,0,1", "--branch", "minus", "--gauge", "standard", "--json-only"});
    CHECK(forced.code == dirac::cli::kExitDomain);
    CHECK(forced.envelope()["error"]["code"] == "on_string");
}
