#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "optoweak/csv.hpp"
#include "optoweak/runner.hpp"

using namespace optoweak;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"optoweak"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_command(int(argv.size()), argv.data());
}

fs::path test_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "optoweak_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing basics", "[cli]") {
    const RunConfig cfg = parse_config("pointer = thermal\nz = 0.5\nkappa = 0.05\n");
    REQUIRE(cfg.pointer_kind == PointerKind::Thermal);
    REQUIRE(cfg.z == 0.5);
    REQUIRE(cfg.kappa == 0.05);
    REQUIRE(cfg.kerr == true);
    REQUIRE(cfg.tau_points == 600);
    REQUIRE(cfg.threads == 1);

    REQUIRE(parse_config("") == RunConfig{});
    REQUIRE(parse_config("# only a comment\n\n   \n") == RunConfig{});

    const RunConfig inline_comment = parse_config("kappa = 0.2 # strong-ish\n");
    REQUIRE(inline_comment.kappa == 0.2);
}

TEST_CASE("config errors carry line numbers", "[cli]") {
    try {
        parse_config("kappa = 0.1\nz = 1.0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.line_number == 2);
        REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
        REQUIRE(std::string(e.what()).find("z") != std::string::npos);
    }

    try {
        parse_config("unknown_thing = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.line_number == 1);
        REQUIRE(std::string(e.what()).find("unknown_thing") != std::string::npos);
    }

    REQUIRE_THROWS_AS(parse_config("kappa 0.1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("kappa = abc\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("dim = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("pointer = bogus\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("weights = -1,2\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("threads = 0\n"), ConfigError);
}

TEST_CASE("weights are normalized on parse", "[cli]") {
    const RunConfig cfg = parse_config("pointer = fock_mixture\nweights = 2, 1, 1\n");
    REQUIRE(cfg.weights.size() == 3);
    REQUIRE(cfg.weights[0] == Catch::Approx(0.5));
    REQUIRE(cfg.weights[1] == Catch::Approx(0.25));
    REQUIRE(cfg.weights[2] == Catch::Approx(0.25));
    REQUIRE_NOTHROW(cfg.pointer());
}

TEST_CASE("config round-trips through serialization", "[cli]") {
    std::vector<RunConfig> cases;
    cases.push_back(RunConfig{});

    RunConfig c1;
    c1.pointer_kind = PointerKind::Thermal;
    c1.z = 0.73;
    c1.kappa = 0.123456789012345;
    c1.kerr = false;
    c1.dim = 48;
    c1.tau_max = 37.5;
    c1.threads = 8;
    c1.output = "results/scan.csv";
    cases.push_back(c1);

    RunConfig c2;
    c2.pointer_kind = PointerKind::CoherentSqueezed;
    c2.alpha_re = -0.25;
    c2.alpha_im = 0.125;
    c2.r = 0.7;
    c2.phi_sq = std::numbers::pi;
    c2.tau_points = 33;
    c2.theta_points = 5;
    c2.phi_points = 7;
    cases.push_back(c2);

    RunConfig c3;
    c3.pointer_kind = PointerKind::FockMixture;
    c3.weights = {0.5, 0.25, 0.25};
    cases.push_back(c3);

    for (const auto& cfg : cases) REQUIRE(parse_config(serialize_config(cfg)) == cfg);
}

TEST_CASE("auto dimension sizing", "[cli]") {
    RunConfig cfg;
    cfg.kappa = 0.05;
    REQUIRE(cfg.effective_dim() >= 12);
    cfg.dim = 30;
    REQUIRE(cfg.effective_dim() == 30);

    RunConfig thermal;
    thermal.pointer_kind = PointerKind::Thermal;
    thermal.z = 0.5;
    REQUIRE(thermal.effective_dim() >= 45);
    REQUIRE_NOTHROW(make_pointer(thermal.pointer(), Dim(thermal.effective_dim())));
}

TEST_CASE("csv writing", "[cli]") {
    const fs::path empty_path = test_dir() / "empty.csv";
    write_csv({}, empty_path.string());
    REQUIRE(slurp(empty_path) == "tau,theta,phi,probability,mean_x,mean_p,pop0,pop1\n");

    const ScanRecord rec{1.5, 0.7853981633974483, 3.141592653589793, 0.25, -0.5, 0.125, 0.9, 0.1};
    const fs::path one_path = test_dir() / "one.csv";
    write_csv(std::span(&rec, 1), one_path.string());
    const std::string body = slurp(one_path);
    REQUIRE(body == "tau,theta,phi,probability,mean_x,mean_p,pop0,pop1\n"
                    "1.5,0.785398163397,3.14159265359,0.25,-0.5,0.125,0.9,0.1\n");

    REQUIRE_THROWS_AS(write_csv({}, (test_dir() / "missing_dir" / "x.csv").string()), IoError);
}

TEST_CASE("cli usage errors exit with 1", "[cli]") {
    REQUIRE(run({}) == 1);
    REQUIRE(run({"scan", "--bogus-flag"}) == 1);
    REQUIRE(run({"scan", "--kappa", "-0.5"}) == 1);
    REQUIRE(run({"scan", "--config", (test_dir() / "nope.conf").string()}) == 1);
}

TEST_CASE("limits subcommand", "[cli]") {
    const fs::path out = test_dir() / "limits.csv";
    REQUIRE(run({"limits", "--pointer", "thermal", "--z", "0.5", "--output", out.string()}) == 0);
    const std::string body = slurp(out);
    REQUIRE(body == "pointer,cap\nthermal," + format12(std::sqrt(3.0)) + "\n");
    REQUIRE(body.find("1.73205080757") != std::string::npos);
}

TEST_CASE("trajectory subcommand writes the two-column csv", "[cli]") {
    const fs::path out = test_dir() / "traj.csv";
    REQUIRE(run({"trajectory", "--kappa", "0.1", "--tau_points", "41", "--tau_max", "6.283185307",
                 "--output", out.string()}) == 0);
    const std::string body = slurp(out);
    REQUIRE(body.rfind("tau,mean_x\n", 0) == 0);
    REQUIRE(std::count(body.begin(), body.end(), '\n') == 42);
    REQUIRE(body.back() == '\n');
}

TEST_CASE("numerical failures exit with 2 and leave no output", "[cli]") {
    // exactly dark port with no coupling: nothing to condition on
    const fs::path out1 = test_dir() / "dark.csv";
    REQUIRE(run({"condition", "--kappa", "0", "--output", out1.string()}) == 2);
    REQUIRE(!fs::exists(out1));

    // dim far too small for the requested thermal pointer
    const fs::path out2 = test_dir() / "trunc.csv";
    REQUIRE(run({"scan", "--pointer", "thermal", "--z", "0.99", "--dim", "8", "--output",
                 out2.string()}) == 2);
    REQUIRE(!fs::exists(out2));
}

TEST_CASE("condition subcommand", "[cli]") {
    const fs::path out = test_dir() / "cond.csv";
    REQUIRE(run({"condition", "--kappa", "0.01", "--kerr", "off", "--theta",
                 format12(std::numbers::pi / 4.0), "--phi", format12(std::numbers::pi), "--tau",
                 format12(std::numbers::pi), "--output", out.string()}) == 0);
    const std::string body = slurp(out);
    REQUIRE(body.rfind("tau,theta,phi,probability,mean_x,mean_p,pop0,pop1\n", 0) == 0);
    REQUIRE(std::count(body.begin(), body.end(), '\n') == 2);
}

TEST_CASE("kerr subcommand writes both scans", "[cli]") {
    const fs::path out = test_dir() / "kerr.csv";
    REQUIRE(run({"kerr", "--kappa", "0.05", "--tau_points", "50", "--tau_max", "20", "--dim",
                 "24", "--output", out.string()}) == 0);
    REQUIRE(fs::exists(test_dir() / "kerr_kerr_on.csv"));
    REQUIRE(fs::exists(test_dir() / "kerr_kerr_off.csv"));
}

TEST_CASE("scan output is byte-identical across reruns and thread counts", "[cli]") {
    const fs::path out1 = test_dir() / "scan1.csv";
    const fs::path out2 = test_dir() / "scan2.csv";
    const std::vector<std::string> base = {"scan",        "--kappa",      "0.05",
                                           "--dim",       "20",           "--tau_points",
                                           "40",          "--theta_points", "5",
                                           "--phi_points", "9",           "--tau_max",
                                           "30"};
    auto with = [&](const fs::path& out, const char* threads) {
        std::vector<std::string> args = base;
        args.insert(args.end(), {"--threads", threads, "--output", out.string()});
        return run(args);
    };
    REQUIRE(with(out1, "1") == 0);
    REQUIRE(with(out2, "4") == 0);
    REQUIRE(slurp(out1) == slurp(out2));

    REQUIRE(with(out2, "1") == 0);  // identical rerun
    REQUIRE(slurp(out1) == slurp(out2));
}

TEST_CASE("environment variable supplies the thread default", "[cli]") {
    setenv("OPTOWEAK_THREADS", "junk", 1);
    const fs::path out = test_dir() / "env.csv";
    REQUIRE(run({"limits", "--output", out.string()}) == 1);

    setenv("OPTOWEAK_THREADS", "2", 1);
    REQUIRE(run({"limits", "--output", out.string()}) == 0);
    unsetenv("OPTOWEAK_THREADS");
}

TEST_CASE("self-check subcommand passes", "[cli]") {
    REQUIRE(run({"check"}) == 0);
}
