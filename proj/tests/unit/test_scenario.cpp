#include "resavg/errors.hpp"
#include "resavg/experiments.hpp"
#include "resavg/report_io.hpp"
#include "resavg/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace resavg;
namespace fs = std::filesystem;

namespace {

constexpr const char* kMinimal = R"({
  "name": "ou-1d",
  "n": 1,
  "lambdas": [1.0],
  "drift": {"builtin": "damping", "rate": 1.0},
  "psi": "identity",
  "v0": [[1.0, 0.0]],
  "experiment": {"kind": "E1", "audit_points": 4}
})";

std::string with(const std::string& from, const std::string& to) {
    std::string s = kMinimal;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

std::vector<std::string> problems_of(const std::string& text) {
    try {
        (void)parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.problems;
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems) {
        if (p.find(needle) != std::string::npos) return true;
    }
    return false;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("resavg_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("minimal OU scenario") {
    const auto cfg = parse_scenario(kMinimal);
    CHECK(cfg.n == 1);
    CHECK(cfg.lambdas == std::vector<double>{1.0});
    const auto model = build_model(cfg);
    REQUIRE(model.drift.polynomial() != nullptr);
    const auto& ms = model.drift.polynomial()->monomials();
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].coeff == Complex{-1.0, 0.0});
    CHECK(max_abs_diff(model.psi, CMatrix::identity(1)) == 0.0);
}

TEST_CASE("zero frequency is rejected") {
    CHECK(mentions(problems_of(with("[1.0]", "[0.0]")), "frequency must be nonzero"));
}

TEST_CASE("all problems are reported together") {
    const auto problems = problems_of(with(R"("psi": "identity",)", R"("bogus": 1,)"));
    CHECK(problems.size() >= 2);
    CHECK(mentions(problems, "psi"));
    CHECK(mentions(problems, "unknown key 'bogus'"));
}

TEST_CASE("syntax errors carry a position") {
    const auto problems = problems_of("{\n  \"name\": \"x\",\n  \"n\": ,\n}");
    REQUIRE(problems.size() == 1);
    CHECK(mentions(problems, "line 3"));
}

TEST_CASE("duplicate monomials are merged with a warning") {
    const auto cfg = parse_scenario(with(R"({"builtin": "damping", "rate": 1.0})",
                                         R"({"monomials": [
        {"target": 1, "alpha": [1], "beta": [0], "coeff": [-0.5, 0.0]},
        {"target": 1, "alpha": [1], "beta": [0], "coeff": [-0.5, 0.0]}]})"));
    CHECK(mentions(cfg.warnings, "merged"));
    const auto p = build_drift(cfg);
    REQUIRE(p.monomials().size() == 1);
    CHECK(p.monomials()[0].coeff == Complex{-1.0, 0.0});
}

TEST_CASE("serialization is canonical and hashes are stable") {
    const auto cfg = parse_scenario(kMinimal);
    const auto text = serialize_scenario(cfg);
    const auto again = parse_scenario(text);
    CHECK(serialize_scenario(again) == text);
    CHECK(scenario_hash(again) == scenario_hash(cfg));
    CHECK(scenario_hash(parse_scenario(with("\"ou-1d\"", "\"other\""))) != scenario_hash(cfg));
}

TEST_CASE("report helpers") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0x1fULL) == "000000000000001f");
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678}) CHECK(std::stod(format_double(x)) == x);

    const auto dir = scratch("csv");
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w.field(1.5);
    CHECK_THROWS(w.end_row());
    w.field("x");
    CHECK_THROWS(w.field("y"));
}

TEST_CASE("E1 on the OU scenario passes its audits") {
    const auto dir = scratch("e1");
    RunOptions opt;
    opt.out_dir = dir;
    const auto res = run_experiment(parse_scenario(kMinimal), opt);
    CHECK(res.passed());
    CHECK(mentions(res.notes, "(-1+0i) a1"));
    for (const char* f : {"e1_average.csv", "e1_diffusion.csv", "summary.json", "summary.txt", "metadata.json"}) {
        CHECK(fs::exists(dir / f));
    }
    const auto csv = read_text(dir / "e1_average.csv");
    CHECK(csv.rfind("scenario_hash,seed,", 0) == 0);
}

TEST_CASE("E5 refuses a resonant scenario") {
    auto cfg = parse_scenario(kMinimal);
    cfg.experiment.kind = ExperimentKind::E5;
    RunOptions opt;
    opt.out_dir = scratch("e5");
    try {
        (void)run_experiment(cfg, opt);
        FAIL("expected a refusal");
    } catch (const StageError& e) {
        CHECK(std::string(e.what()).find("non-resonant required") != std::string::npos);
    }
}
