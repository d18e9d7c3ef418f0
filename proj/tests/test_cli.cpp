#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epm/cli.hpp"
#include "epm/io.hpp"

using namespace epm;
namespace fs = std::filesystem;

namespace {

const std::string kModel = std::string(EPM_DATA_DIR) + "/model_sec5.toml";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("epm-cli-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parameter overrides") {
    auto sys = QuadraticSystem::zeros(2);
    apply_override(sys, "delta=0.5");
    CHECK(sys.detunings(0) == 0.5);
    CHECK(sys.detunings(1) == -0.5);
    apply_override(sys, "Γ12=0.3");
    CHECK(sys.decoherence(0, 1) == Complex(0.3));
    CHECK(sys.decoherence(1, 0) == Complex(0.3));
    apply_override(sys, "Gamma=2");
    CHECK(sys.decoherence(0, 0) == Complex(2.0));
    CHECK(sys.decoherence(1, 1) == Complex(2.0));
    apply_override(sys, "coherent.1.2=0.1+0.2i");
    CHECK(sys.coherent(1, 0) == Complex(0.1, -0.2));
    apply_override(sys, "squeezing.2.1=0.4i");
    CHECK(sys.squeezing(0, 1) == Complex(0, 0.4));
    apply_override(sys, "detunings.2=7");
    CHECK(sys.detunings(1) == 7.0);

    CHECK_THROWS_AS(apply_override(sys, "bogus=1"), Error);
    CHECK_THROWS_AS(apply_override(sys, "delta=1i"), Error);
    CHECK_THROWS_AS(apply_override(sys, "detunings.3=1"), Error);
    CHECK_THROWS_AS(apply_override(sys, "decoherence.1.1=1i"), Error);
    CHECK_THROWS_AS(apply_override(sys, "delta"), Error);
    CHECK_THROWS_AS(apply_override(sys, "delta=x"), Error);
    auto three = QuadraticSystem::zeros(3);
    CHECK_THROWS_AS(apply_override(three, "gamma12=1"), Error);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({"validate", kModel}).code == kExitOk);
    CHECK(run({"validate", "/nonexistent/model.toml"}).code == kExitUsage);
    CHECK(run({"validate", kModel, "--set", "gamma12=2"}).code == kExitValidation);
    CHECK(run({"moments-matrix", kModel, "--order", "0"}).code == kExitUsage);
    CHECK(run({"moments-matrix", kModel, "--format", "csv"}).code == kExitUsage);
    CHECK(run({"moments-matrix", kModel, "--set", "squeezing.1.1=0.1", "--order", "2"}).code == kExitValidation);
    CHECK(run({"moments-matrix", kModel, "--set", "gamma12=2"}).code == kExitValidation);
    CHECK(run({"ep-order", kModel}).code == kExitVerification);
    CHECK(run({"ep-order", kModel, "--set", "gamma12=1"}).code == kExitOk);
    CHECK(run({"sweep", kModel, "--param", "gamma12", "--from", "0", "--to", "1"}).code == kExitUsage);
    CHECK(run({"verify", kModel, "--alpha", "0.6", "--tmax", "1"}).code == kExitUsage);
    CHECK(run({"mn", "--N", "2", "--gamma", "1", "--gamma12", "1"}).code == kExitUsage);
}

TEST_CASE("moments-matrix output") {
    const auto r = run({"moments-matrix", kModel, "--order", "2", "--reduce", "--set", "gamma12=1"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("basis (3): <a1 a1> <a1 a2> <a2 a2>\n", 0) == 0);
    CHECK(r.out.find("d<a1 a1>/dt =  (-2.000000000000e+00 -2.000000000000e+00i)<a1 a1>  "
                     "(-2.000000000000e+00 0.000000000000e+00i)<a1 a2>\n") != std::string::npos);

    const auto full = run({"moments-matrix", kModel, "--order", "2"});
    CHECK(full.out.rfind("basis (4):", 0) == 0);
    const auto direct = run({"moments-matrix", kModel, "--basis", "a1,a1†,a2,a2†"});
    CHECK(direct.code == kExitOk);
    CHECK(direct.out.rfind("basis (4): <a1> <a1†> <a2> <a2†>\n", 0) == 0);
}

TEST_CASE("outputs are byte identical across runs and thread counts") {
    TempDir tmp;
    const std::vector<std::string> sweep_args = {"sweep", kModel, "--param", "gamma12", "--from", "0",
                                                 "--to", "1.5", "--steps", "31", "--order", "3"};
    const auto a = run(sweep_args);
    ::setenv("EP_MOMENTS_THREADS", "1", 1);
    const auto b = run(sweep_args);
    ::unsetenv("EP_MOMENTS_THREADS");
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.err.find("fail model validation") != std::string::npos);  // gamma12 > 1 is gain-like

    auto with_out = sweep_args;
    with_out.insert(with_out.end(), {"--out", tmp.file("s.csv")});
    CHECK(run(with_out).out.empty());
    CHECK(slurp(tmp.file("s.csv")) == a.out);
    const auto table = parse_sweep_csv(a.out);
    CHECK(table.rows.size() == 31);
    CHECK(table.rows.front().eigenvalues.size() == 4);

    for (const char* cmd : {"spectrum", "ep-order", "design-lattice"}) {
        const std::vector<std::string> args = {cmd, kModel, "--order", "2", "--set", "gamma12=1", "--out",
                                               tmp.file(std::string(cmd) + ".json")};
        const auto first = run(args);
        const auto j1 = slurp(tmp.file(std::string(cmd) + ".json"));
        const auto second = run(args);
        CHECK(first.out == second.out);
        CHECK(j1 == slurp(tmp.file(std::string(cmd) + ".json")));
        CHECK_NOTHROW((void)Json::parse(j1));
    }
}

TEST_CASE("artifacts round trip through the readers") {
    TempDir tmp;
    REQUIRE(run({"moments-matrix", kModel, "--order", "3", "--reduce", "--out", tmp.file("m.json")}).code == 0);
    const auto m = evolution_from_json(Json::parse(slurp(tmp.file("m.json"))));
    CHECK(m.basis.size() == 4);
    CHECK(m.matrix == build_m_n(3, 1.0, 0.8, 1.0).matrix);

    REQUIRE(run({"ep-order", kModel, "--set", "Γ12=1", "--order", "3", "--out", tmp.file("ep.json")}).code == 0);
    const auto rep = ep_report_from_json(Json::parse(slurp(tmp.file("ep.json"))));
    CHECK(rep.max_order() == 4);

    REQUIRE(run({"design-lattice", kModel, "--order", "2", "--set", "gamma12=1", "--extra-damping", "0.13", "--out",
                 tmp.file("lat.json"), "--graphml", tmp.file("lat.graphml")})
                .code == 0);
    const auto lat = lattice_from_json(Json::parse(slurp(tmp.file("lat.json"))));
    CHECK(lat.psd);
    CHECK(slurp(tmp.file("lat.graphml")) == lattice_graphml(lat));

    const auto mn = run({"mn", "--N", "3", "--gamma", "1", "--gamma12", "1", "--delta", "1", "--out",
                         tmp.file("mn.json")});
    REQUIRE(mn.code == 0);
    CHECK(mn.out.find("EP of order 4") != std::string::npos);
    const auto j = Json::parse(slurp(tmp.file("mn.json")));
    CHECK(evolution_from_json(j["matrix"]).matrix == build_m_n(3, 1, 1, 1).matrix);
}

TEST_CASE("verify subcommand") {
    TempDir tmp;
    const auto ok = run({"verify", kModel, "--alpha", "0.6,0.3i", "--tmax", "1", "--dt", "0.01", "--out",
                         tmp.file("v.json"), "--trajectory", tmp.file("t.csv")});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("PASS") != std::string::npos);
    const auto j = Json::parse(slurp(tmp.file("v.json")));
    CHECK(j["pass"] == true);
    const auto traj = parse_trajectory_csv(slurp(tmp.file("t.csv")));
    CHECK(traj.labels == std::vector<std::string>{"a1", "a2"});
    CHECK(traj.times.back() == doctest::Approx(1.0));

    const auto tight = run({"verify", kModel, "--alpha", "0.6,0.3i", "--tmax", "1", "--dt", "0.01", "--tol", "1e-16"});
    CHECK(tight.code == kExitVerification);
    CHECK(tight.out.find("FAIL") != std::string::npos);

    const auto leak = run({"verify", kModel, "--alpha", "0.6,0.3i", "--tmax", "0.1", "--cutoff", "2"});
    CHECK(leak.code == kExitNumerical);
    CHECK(run({"verify", kModel, "--alpha", "0.6", "--tmax", "1"}).code == kExitUsage);
}

TEST_CASE("installed binary") {
    TempDir tmp;
    const std::string bin = EPM_CLI_BINARY;
    CHECK(shell(bin + " validate " + kModel + " > /dev/null") == 0);
    CHECK(shell(bin + " ep-order " + kModel + " > /dev/null 2>&1") == 4);
    CHECK(shell(bin + " validate " + kModel + " --set gamma12=3 > /dev/null") == 2);
    CHECK(shell(bin + " nope > /dev/null 2>&1") == 1);
    const std::string sweep = bin + " sweep " + kModel + " --param delta --from 0 --to 2 --steps 9 --order 2";
    CHECK(shell(sweep + " > " + tmp.file("a.csv")) == 0);
    CHECK(shell("EP_MOMENTS_THREADS=1 " + sweep + " > " + tmp.file("b.csv")) == 0);
    CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
    CHECK(slurp(tmp.file("a.csv")) == run({"sweep", kModel, "--param", "delta", "--from", "0", "--to", "2", "--steps",
                                           "9", "--order", "2"})
                                          .out);
}
