#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = CLI_BINARY_PATH;

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("blaschke_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args, const std::string& stdout_to = "/dev/null") {
    const std::string cmd = "'" + cli + "' " + args + " > '" + stdout_to + "' 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

const char* product_z2 = R"({"zeros":[{"z":[0,0],"m":2}]})";
const char* product_z2phi = R"({"constant":[1,0],"zeros":[{"z":[0,0],"m":2},{"z":[0.4,0],"m":1}]})";

} // namespace

TEST_CASE("analyze reports the invariants of a mixed product") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2phi);
    const fs::path out = tmp / "report.json";
    REQUIRE(run("analyze --input '" + (tmp / "b.json").string() + "' --output '" +
                out.string() + "'") == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["degree"] == 3);
    CHECK(rep["q"] == 2);
    CHECK(rep["orbits"] == json::parse("[[0],[1,2]]"));
    CHECK(rep["multiplicities"] == json::parse("[1,2]"));
    CHECK(rep["inverse_pairing"] == json::parse("[0,1]"));
    CHECK(rep["generators"].size() == 2);
    CHECK(rep["thm41"]["pass"] == true);
    CHECK(rep["glue_edges"].size() >= 2);
    CHECK(rep["glue_connected"] == true);
    CHECK(rep["seed"] == 0);
    CHECK(rep["critical_points"].size() == 2);
}

TEST_CASE("analyze output is byte stable across reruns") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2phi);
    const fs::path o1 = tmp / "r1.json", o2 = tmp / "r2.json";
    REQUIRE(run("analyze --input '" + (tmp / "b.json").string() + "' --output '" +
                o1.string() + "'") == 0);
    REQUIRE(run("analyze --input '" + (tmp / "b.json").string() + "' --output '" +
                o2.string() + "'") == 0);
    const std::string a = slurp(o1), b = slurp(o2);
    CHECK(!a.empty());
    CHECK(a == b);
}

TEST_CASE("reports default to standard output") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2);
    const fs::path viafile = tmp / "viafile.json", captured = tmp / "captured.json";
    REQUIRE(run("glue --input '" + (tmp / "b.json").string() + "' --output '" +
                viafile.string() + "'") == 0);
    REQUIRE(run("glue --input '" + (tmp / "b.json").string() + "'", captured.string()) == 0);
    CHECK(slurp(viafile) == slurp(captured));
    const json rep = json::parse(slurp(captured));
    CHECK(rep["sheets"] == 2);
    CHECK(rep["connected"] == true);
    CHECK(rep["glue_edges"].size() == 1);
}

TEST_CASE("sequence generation with profile and truncated product") {
    TempDir tmp;
    const fs::path out = tmp / "seq.json";
    REQUIRE(run("thin-gen --rule factorial --count 12 --truncation 8 --output '" +
                out.string() + "'") == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["sequence"]["points"].size() == 12);
    CHECK(rep["sequence"]["rule"] == "factorial");
    CHECK(rep["thinness"]["rows"].size() == 8);
    CHECK(rep["product"]["zeros"].size() == 8);
    for (const auto& row : rep["thinness"]["rows"]) {
        CHECK(row["delta"].get<double>() > 0.0);
        CHECK(row.contains("cross_check"));
    }
    // the emitted report loads back as an explicit sequence
    const fs::path out2 = tmp / "seq2.json";
    REQUIRE(run("thin-gen --input '" + out.string() + "' --output '" + out2.string() + "'") == 0);
    const json rep2 = json::parse(slurp(out2));
    CHECK(rep2["sequence"]["points"].size() == 12);
}

TEST_CASE("extraction command certifies separation") {
    TempDir tmp;
    spit(tmp / "spec.json", R"({"rule":"factorial","N":40})");
    const fs::path out = tmp / "ex.json";
    REQUIRE(run("thin-extract --input '" + (tmp / "spec.json").string() +
                "' --count 5 --output '" + out.string() + "'") == 0);
    const json rep = json::parse(slurp(out));
    REQUIRE(rep["indices"].size() == 5);
    CHECK(rep["indices"][0] == 0);
    CHECK(rep["indices"][1] == 3);
    for (std::size_t k = 1; k < 5; ++k) {
        const double bound = 1.0 - 1.0 / static_cast<double>((k + 2) * (k + 2));
        CHECK(rep["certificates"][k].get<double>() > bound);
    }
}

TEST_CASE("stage construction emits per stage gate audits") {
    TempDir tmp;
    const fs::path out = tmp / "stages.json";
    REQUIRE(run("thin-construct --pool factorial --stages 2 --seed 0 --output '" +
                out.string() + "'") == 0);
    const json rep = json::parse(slurp(out));
    REQUIRE(rep["stages"].size() == 2);
    CHECK(rep["product"]["zeros"].size() == 3);
    for (const auto& st : rep["stages"]) {
        CHECK(st["q"] == 2);
        for (const char* g : {"a", "b", "c", "d"})
            CHECK(st["gates"][g]["pass"] == true);
    }
}

TEST_CASE("bergman check reports residuals inside their budgets") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2);
    const fs::path out = tmp / "berg.json";
    REQUIRE(run("bergman-check --input '" + (tmp / "b.json").string() +
                "' --radial 8 --samples 32 --degree 3 --output '" + out.string() + "'") == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["identity_class_ok"] == true);
    CHECK(rep["q"] == 2);
    REQUIRE(rep["adjoint_residuals"].size() == 2);
    for (const auto& r : rep["adjoint_residuals"]) CHECK(r.get<double>() <= 1e-3);
    for (const auto& r : rep["kernel_identity_residuals"]) CHECK(r.get<double>() <= 1e-5);
    for (const auto& r : rep["derivative_identity_residuals"]) CHECK(r.get<double>() <= 1e-6);
    CHECK(rep["forfeited_weight"].get<double>() <= 1e-4);
    CHECK(rep["symmetry"]["found"] == true);
    CHECK(rep["symmetry"]["applicable"] == true);
    CHECK(rep["symmetry"]["n"] == 2);
}

TEST_CASE("level set traces stay on the level") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2);
    const fs::path out = tmp / "level.csv";
    REQUIRE(run("levelset --input '" + (tmp / "b.json").string() +
                "' --t 0.25 --samples 12 --output '" + out.string() + "'") == 0);
    std::istringstream in(slurp(out));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "branch_id,t_param,re,im");
    int rows = 0;
    while (std::getline(in, line)) {
        double branch, t, re, im;
        char c;
        std::istringstream ls(line);
        ls >> branch >> c >> t >> c >> re >> c >> im;
        // |z^2| = 0.25 means |z| = 0.5 on every sample
        CHECK(std::abs(std::hypot(re, im) - 0.5) < 1e-8);
        ++rows;
    }
    CHECK(rows == 24);
}

TEST_CASE("usage problems exit with code one") {
    TempDir tmp;
    CHECK(run("analyze --input /nonexistent.json") == 1);
    CHECK(run("analyze") == 1);
    CHECK(run("bogus-subcommand") == 1);
    spit(tmp / "b.json", product_z2);
    CHECK(run("analyze --input '" + (tmp / "b.json").string() + "' --tol.bogus=1") == 1);
    CHECK(run("thin-gen --rule factorial") == 1);
    spit(tmp / "bad.json", "{not json");
    CHECK(run("analyze --input '" + (tmp / "bad.json").string() + "'") == 1);
    CHECK(run("--help") == 0);
}

TEST_CASE("numerical failure exits with code two and a failure document") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2phi);
    const fs::path out = tmp / "fail.json";
    CHECK(run("analyze --input '" + (tmp / "b.json").string() +
              "' --tol.poly_residual=1e-30 --output '" + out.string() + "'") == 2);
    const json rep = json::parse(slurp(out));
    REQUIRE(rep.contains("failure"));
    CHECK(rep["failure"]["kind"] == "poly_residual");
    CHECK(rep["failure"]["command"] == "analyze");
    CHECK(rep["failure"].contains("message"));
}

TEST_CASE("tolerance overrides change behavior") {
    TempDir tmp;
    spit(tmp / "b.json", product_z2);
    // degree cap tightened below the actual degree
    CHECK(run("analyze --input '" + (tmp / "b.json").string() + "' --tol.max_degree=1") == 1);
    CHECK(run("analyze --input '" + (tmp / "b.json").string() + "' --tol.max_degree 4") == 0);
}
