#include <catch2/catch_amalgamated.hpp>

#include <nupi/scenario_file.hpp>

#include "test_scenarios.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace nupi;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

const fs::path kShippedSI = "scenarios/si_switching.cfg";
const fs::path kShippedDI = "scenarios/di_switching.cfg";

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "nupi_scenario_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const auto dir = temp_dir();
    // graph files live next to the config so relative references resolve
    std::ofstream(dir / "g.txt") << "n=2\n1 2 1.0\n2 1 1.0\n";
    const auto path = dir / name;
    std::ofstream(path) << body;
    return path;
}

const std::string kMinimalBody = R"([graphs]
file = g.txt

[schedule]
segments = 1:1
periodic = true

[model]
type = si

[gains]
b = 1 -1

[params]
lambda1 = 0.4
lambda2 = 0.2

[initial]
x0 = -1 1.2

[sim]
horizon = 5
)";

bool scenarios_identical(const Scenario& a, const Scenario& b) {
    if (a.model != b.model || a.horizon != b.horizon || a.step != b.step ||
        a.record_every != b.record_every)
        return false;
    if (a.x0 != b.x0 || a.gains.values() != b.gains.values()) return false;
    if (a.model == Model::DI && a.v0 != b.v0) return false;
    if (a.params.lambda1 != b.params.lambda1 || a.params.lambda2 != b.params.lambda2 ||
        a.params.rho != b.params.rho)
        return false;
    const SwitchSchedule& sa = a.schedule;
    const SwitchSchedule& sb = b.schedule;
    if (sa.topology_count() != sb.topology_count() || sa.periodic() != sb.periodic() ||
        sa.initial_label() != sb.initial_label() || sa.switch_times() != sb.switch_times() ||
        sa.labels() != sb.labels())
        return false;
    if (sa.periodic() && sa.period() != sb.period()) return false;
    if (!sa.periodic() && sa.end_time() != sb.end_time()) return false;
    for (int l = 1; l <= sa.topology_count(); ++l)
        if (sa.topology(l).weights() != sb.topology(l).weights()) return false;
    return true;
}

}  // namespace

TEST_CASE("shipped configs load to the expected scenarios") {
    SECTION("si") {
        const ScenarioFile sf = load_scenario(kShippedSI);
        const Scenario& sc = sf.scenario;
        CHECK(sc.model == Model::SI);
        CHECK(sc.horizon == 40.0);
        CHECK(sc.step == 1e-3);
        CHECK(sc.record_every == 10);
        CHECK(sc.params.lambda1 == 0.4);
        CHECK(sc.params.lambda2 == 0.2);
        CHECK(sc.gains.values() == testsetup::gains().values());
        CHECK(sc.x0 == testsetup::x0());
        CHECK(scenarios_identical(sc, testsetup::si_scenario()));
        CHECK(sf.output_dir == fs::path("out/si_switching"));
        CHECK(sf.has_rho);
    }
    SECTION("di") {
        const ScenarioFile sf = load_scenario(kShippedDI);
        CHECK(sf.scenario.model == Model::DI);
        CHECK(sf.scenario.params.rho == 0.55);
        CHECK(sf.scenario.v0 == testsetup::v0());
        CHECK(scenarios_identical(sf.scenario, testsetup::di_scenario()));
    }
    SECTION("fixed-graph configs") {
        CHECK(load_scenario("scenarios/si_fixed.cfg").scenario.schedule.topology_count() == 1);
        CHECK(load_scenario("scenarios/di_fixed.cfg").scenario.model == Model::DI);
    }
}

TEST_CASE("defaults and minimal config") {
    const ScenarioFile sf = load_scenario(write_config("minimal.cfg", kMinimalBody));
    CHECK(sf.scenario.step == 1e-3);
    CHECK(sf.scenario.record_every == 1);
    CHECK(sf.output_dir.empty());
    CHECK(!sf.has_rho);
    CHECK(sf.scenario.schedule.agent_count() == 2);
}

TEST_CASE("config rejection") {
    auto reject = [](const std::string& name, std::string body,
                     const std::string& needle) {
        const auto path = write_config(name, body);
        try {
            load_scenario(path);
            FAIL("expected ParseError for " + name);
        } catch (const ParseError& e) {
            INFO(e.what());
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    std::string body = kMinimalBody;
    reject("duplicate_key.cfg", body + "\n[sim]\nhorizon = 6\n", "duplicate");
    reject("unknown_key2.cfg",
           std::string(kMinimalBody).replace(kMinimalBody.find("horizon"), 7, "horizno"),
           "unknown key");
    reject("unknown_section.cfg", body + "\n[plotting]\ncolor = red\n", "unknown section");
    reject("missing_section.cfg", R"([graphs]
file = g.txt
)",
           "missing section");
    reject("zero_lambda.cfg",
           std::string(kMinimalBody).replace(kMinimalBody.find("lambda1 = 0.4"), 13,
                                             "lambda1 = 0.0"),
           "lambda1");
    reject("bad_segment.cfg",
           std::string(kMinimalBody).replace(kMinimalBody.find("segments = 1:1"), 14,
                                             "segments = 1x1"),
           "duration:topology");
    reject("bad_number.cfg",
           std::string(kMinimalBody).replace(kMinimalBody.find("x0 = -1 1.2"), 11,
                                             "x0 = -1 abc"),
           "bad number");
    reject("zero_gain.cfg",
           std::string(kMinimalBody).replace(kMinimalBody.find("b = 1 -1"), 8, "b = 1 0"),
           "nonzero");
    reject("wrong_dim.cfg",
           std::string(kMinimalBody).replace(kMinimalBody.find("x0 = -1 1.2"), 11, "x0 = -1"),
           "x0");
}

TEST_CASE("di config requires rho and v0") {
    std::string body = kMinimalBody;
    body.replace(body.find("type = si"), 9, "type = di");
    const auto path = write_config("di_missing.cfg", body);
    CHECK_THROWS_AS(load_scenario(path), ParseError);

    std::string good = kMinimalBody;
    good.replace(good.find("type = si"), 9, "type = di");
    good.replace(good.find("lambda2 = 0.2"), 13, "lambda2 = 0.2\nrho = 0.55");
    good.replace(good.find("x0 = -1 1.2"), 11, "x0 = -1 1.2\nv0 = 0 0.5");
    const ScenarioFile sf = load_scenario(write_config("di_ok.cfg", good));
    CHECK(sf.scenario.model == Model::DI);
    CHECK(sf.scenario.v0 == Eigen::Vector2d(0.0, 0.5));
}

TEST_CASE("parse diagnostics carry file and line") {
    const auto path = write_config("diag.cfg", "[graphs]\nfile = g.txt\nbogus\n");
    try {
        load_scenario(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("diag.cfg:3") != std::string::npos);
    }
}

TEST_CASE("overrides") {
    SECTION("model di on the si config uses the config's rho and v0") {
        ScenarioFile sf = load_scenario(kShippedSI);
        apply_overrides(sf, {Model::DI, std::nullopt, std::nullopt});
        CHECK(sf.scenario.model == Model::DI);
        CHECK(sf.scenario.params.rho == 0.55);
        CHECK(sf.scenario.v0 == testsetup::v0());
    }
    SECTION("horizon and step") {
        ScenarioFile sf = load_scenario(kShippedSI);
        apply_overrides(sf, {std::nullopt, 10.0, 5e-4});
        CHECK(sf.scenario.horizon == 10.0);
        CHECK(sf.scenario.step == 5e-4);
        CHECK_THROWS_AS(apply_overrides(sf, {std::nullopt, -1.0, std::nullopt}), ArgumentError);
    }
    SECTION("di override without v0 in the file fails") {
        ScenarioFile sf = load_scenario(write_config("minimal2.cfg", kMinimalBody));
        CHECK_THROWS_AS(apply_overrides(sf, {Model::DI, std::nullopt, std::nullopt}),
                        ArgumentError);
    }
}

TEST_CASE("dump round-trips to an identical scenario") {
    for (const fs::path& shipped : {kShippedSI, kShippedDI}) {
        ScenarioFile sf = load_scenario(shipped);
        std::ostringstream text;
        dump_scenario(sf, text);

        const auto dumped = temp_dir() / "dumped.cfg";
        std::ofstream(dumped) << text.str();
        const ScenarioFile back = load_scenario(dumped);
        CHECK(scenarios_identical(sf.scenario, back.scenario));
        CHECK(back.output_dir == sf.output_dir);
        CHECK(back.has_rho == sf.has_rho);
        CHECK(back.v0 == sf.v0);
    }
}

TEST_CASE("dump after overrides keeps the effective scenario") {
    ScenarioFile sf = load_scenario(kShippedSI);
    apply_overrides(sf, {Model::DI, 7.5, std::nullopt});
    std::ostringstream text;
    dump_scenario(sf, text);
    const auto dumped = temp_dir() / "dumped_di.cfg";
    std::ofstream(dumped) << text.str();
    const ScenarioFile back = load_scenario(dumped);
    CHECK(back.scenario.model == Model::DI);
    CHECK(back.scenario.horizon == 7.5);
    CHECK(scenarios_identical(sf.scenario, back.scenario));
}
