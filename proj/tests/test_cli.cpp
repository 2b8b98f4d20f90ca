#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr combined
};

std::string cli_path() {
#ifdef SINGSURF_CLI_PATH
    return SINGSURF_CLI_PATH;
#else
    const char* p = std::getenv("SINGSURF_CLI_PATH");
    REQUIRE(p != nullptr);
    return p;
#endif
}

RunResult run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
        res.output.append(buf, n);
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("singsurf_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("trace: cone CSV with two components and provenance header") {
    auto dir = fresh_dir("trace");
    auto res = run("trace --surface cone --r-min 0.01 --r-max 0.1 --levels 8 "
                   "--output-dir " + dir.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("components: 2") != std::string::npos);
    auto csv = slurp(dir / "lengths.csv");
    CHECK(csv.rfind("# singsurf 0.1.0 config-hash=", 0) == 0);
    CHECK(csv.find("r,component_id,length,residual") != std::string::npos);

    // Reproducibility: identical config, byte-identical output.
    auto res2 = run("trace --surface cone --r-min 0.01 --r-max 0.1 --levels 8 "
                    "--output-dir " + dir.string());
    CHECK(res2.exit_code == 0);
    CHECK(slurp(dir / "lengths.csv") == csv);
}

TEST_CASE("trace: inline expression and parse diagnostics") {
    auto dir = fresh_dir("inline");
    auto res = run("trace --surface \"x^2+y^2-z^4\" --r-min 0.01 --r-max 0.1 "
                   "--levels 6 --output-dir " + dir.string());
    CHECK(res.exit_code == 0);

    auto bad = run("trace --surface \"x^2+&&y\"");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("position") != std::string::npos);
}

TEST_CASE("asymptotics: horn leading term gamma=2, C=2pi") {
    auto dir = fresh_dir("asym");
    auto res = run("asymptotics --surface horn-1-2 --r-min 0.003 --r-max 0.15 "
                   "--output-dir " + dir.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("gamma=2 ") != std::string::npos);
    CHECK(res.output.find("has_log=false") != std::string::npos);
    auto at = res.output.find("C=");
    REQUIRE(at != std::string::npos);
    double C = std::stod(res.output.substr(at + 2));
    CHECK(C == doctest::Approx(2.0 * M_PI).epsilon(1e-3));
    CHECK(fs::exists(dir / "expansion_0.json"));
    CHECK(fs::exists(dir / "expansion_1.txt"));
}

TEST_CASE("gauss-bonnet: double-sphere residuals, sphere, inline refusal") {
    auto dir = fresh_dir("gb");
    auto res = run("gauss-bonnet --surface double-sphere --r-min 0.005 "
                   "--r-max 0.2 --output-dir " + dir.string());
    CHECK(res.exit_code == 0);
    auto at = res.output.find("singular residual: ");
    REQUIRE(at != std::string::npos);
    CHECK(std::stod(res.output.substr(at + 19)) < 0.05);
    CHECK(fs::exists(dir / "gb_report.txt"));
    CHECK(fs::exists(dir / "gb_convergence.csv"));

    auto sres = run("gauss-bonnet --surface sphere --r-min 0.05 --r-max 0.4 "
                    "--output-dir " + dir.string());
    CHECK(sres.exit_code == 0);
    CHECK(sres.output.find("chi=2") != std::string::npos);

    auto inl = run("gauss-bonnet --surface \"x^2+y^2-z^4\"");
    CHECK(inl.exit_code == 1);
    CHECK(inl.output.find("euler_char") != std::string::npos);
}

TEST_CASE("quasi-iso: classification and defect reports") {
    auto dir = fresh_dir("qi");
    auto horn = run("quasi-iso --surface horn-1-2 --r-min 0.005 --r-max 0.2 "
                    "--levels 14 --output-dir " + dir.string());
    CHECK(horn.exit_code == 0);
    CHECK(horn.output.find("[horn(2), horn(2)]") != std::string::npos);
    CHECK(horn.output.find("alpha=") != std::string::npos);
    auto csv = slurp(dir / "defect.csv");
    CHECK(csv.find("eps,delta,beta_max") != std::string::npos);

    auto cone = run("quasi-iso --surface cone --r-min 0.005 --r-max 0.2 "
                    "--levels 14 --output-dir " + dir.string());
    CHECK(cone.exit_code == 0);
    CHECK(cone.output.find("[cone, cone]") != std::string::npos);

    auto plane = run("quasi-iso --surface plane --r-min 0.005 --r-max 0.2 "
                     "--levels 14 --output-dir " + dir.string());
    CHECK(plane.exit_code == 0);
    CHECK(plane.output.find("below measurable threshold") != std::string::npos);
}

TEST_CASE("model, mellin, resolve subcommands") {
    auto model = run("model --a 1 --b 2");
    CHECK(model.exit_code == 0);
    CHECK(model.output.find("PASS") != std::string::npos);

    auto dir = fresh_dir("mellin");
    auto mel = run("mellin --surface horn-1-2 --r-min 0.003 --r-max 0.15 "
                   "--output-dir " + dir.string());
    CHECK(mel.exit_code == 0);
    CHECK(mel.output.find("decay slope") != std::string::npos);
    CHECK(mel.output.find("PASS") != std::string::npos);
    bool pole_found = mel.output.find("z0=-1.999") != std::string::npos ||
                      mel.output.find("z0=-2") != std::string::npos;
    CHECK(pole_found);

    auto resolve = run("resolve --germ \"x^2-y^3\" --output-dir " + dir.string());
    CHECK(resolve.exit_code == 0);
    CHECK(resolve.output.find("predicted alpha") != std::string::npos);
    CHECK(fs::exists(dir / "resolution.txt"));
}

TEST_CASE("config file, precedence, validation, and flag hygiene") {
    auto dir = fresh_dir("cfg");
    std::ofstream(dir / "run.cfg") << "[trace]\nr-min=0.02\nr-max=0.1\nlevels=6\n"
                                   << "output-dir=" << dir.string() << "\n";

    auto cfg = run("--config " + (dir / "run.cfg").string() + " trace --surface cone");
    CHECK(cfg.exit_code == 0);
    auto csv = slurp(dir / "lengths.csv");
    CHECK(csv.find("\n0.100") != std::string::npos);  // r-max from config

    // Flags override the config file.
    auto over = run("--config " + (dir / "run.cfg").string() +
                    " trace --surface cone --r-max 0.08");
    CHECK(over.exit_code == 0);
    CHECK(slurp(dir / "lengths.csv").find("\n0.080") != std::string::npos);

    auto badtheta = run("trace --surface cone --theta 33");
    CHECK(badtheta.exit_code != 0);
    auto badrange = run("trace --surface cone --r-min 0.5 --r-max 0.1");
    CHECK(badrange.exit_code != 0);

    auto unknown = run("trace --surface cone --no-such-flag");
    CHECK(unknown.exit_code != 0);

    auto help = run("--help");
    CHECK(help.exit_code == 0);
    auto thelp = run("trace --help");
    CHECK(thelp.exit_code == 0);
    CHECK(thelp.output.find("--surface") != std::string::npos);
    CHECK(thelp.output.find("--theta") != std::string::npos);
}
