#include <doctest.h>

#include <sstream>

#include "tdbem/config.hpp"
#include "tdbem/runner.hpp"

using namespace tdbem;

TEST_SUITE("config") {

TEST_CASE("parsing sets fields and ignores comments") {
    std::istringstream in(
        "# scenario\n"
        "mesh = sphere:320\n"
        "  bie=bmbie   # trailing\n"
        "boundary = dirichlet\n"
        "order = 2\n"
        "algo = fast\n"
        "dt = 0.025\n"
        "\n"
        "leaf_capacity = 12\n");
    const RunConfig cfg = parseConfig(in);
    CHECK(cfg.mesh == "sphere:320");
    CHECK((cfg.bie == Bie::Bmbie));
    CHECK((cfg.boundary == Boundary::Dirichlet));
    CHECK(cfg.order == 2);
    CHECK((cfg.algo == Algorithm::Fast));
    CHECK(cfg.dt == 0.025);
    CHECK(cfg.leafCapacity == 12);
    CHECK(cfg.nt == RunConfig{}.nt);
}

TEST_CASE("serialisation round-trips every key") {
    RunConfig cfg;
    cfg.dt = 0.1 + 0.2;  // not representable in short decimal
    cfg.points = "1,5,9";
    cfg.reference = ReferenceMode::Off;
    cfg.threads = 3;
    std::istringstream in(serializeConfig(cfg));
    CHECK(parseConfig(in) == cfg);
    const std::string text = serializeConfig(cfg);
    for (const std::string& key : configKeys()) CHECK(text.find(key + " = ") != std::string::npos);
}

TEST_CASE("errors carry the source line") {
    std::istringstream unknown("dt = 0.1\nspeed = 3\n");
    CHECK_THROWS_WITH_AS(parseConfig(unknown, "run.cfg"), doctest::Contains("run.cfg:2: unknown config key 'speed'"), std::invalid_argument);
    std::istringstream bad("nt = 12x\n");
    CHECK_THROWS_WITH_AS(parseConfig(bad, "a"), doctest::Contains("a:1: bad value for 'nt'"), std::invalid_argument);
    std::istringstream noEq("order 2\n");
    CHECK_THROWS_WITH_AS(parseConfig(noEq, "b"), doctest::Contains("b:1:"), std::invalid_argument);
    std::istringstream choice("algo = quick\n");
    CHECK_THROWS_AS(parseConfig(choice), std::invalid_argument);
    CHECK_THROWS_AS(loadConfig("/nonexistent/run.cfg"), std::runtime_error);
}

TEST_CASE("validation names the offending setting") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.order = 4;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("order"), std::invalid_argument);
    cfg = {};
    cfg.dt = 0.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("dt"), std::invalid_argument);
    cfg = {};
    cfg.algo = Algorithm::Fast;
    cfg.ps = 3;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("ps"), std::invalid_argument);
}

TEST_CASE("reports round-trip and compare") {
    RunReport a;
    a.status = "stable";
    a.relError = 0.0123;
    a.wallTime = 2.5;
    a.peakMemory = 1 << 20;
    a.phases.solve = 0.25;
    a.phases.m2lNear = 1.125;
    a.elements = 320;
    a.steps = 100;
    a.solvedSteps = 99;
    a.surfaceMeanSquare = 0.75;
    std::istringstream in(formatReport(a));
    CHECK(parseReport(in) == a);

    RunReport b = a;
    b.relError = 0.0246;
    b.wallTime = 5.0;
    b.peakMemory = 1 << 21;
    b.status = "unstable";
    const RunComparison c = compareRuns(a, b);
    REQUIRE(c.errorRatio.has_value());
    CHECK(*c.errorRatio == doctest::Approx(2.0));
    CHECK(c.timeRatio == doctest::Approx(2.0));
    CHECK(c.memoryRatio == doctest::Approx(2.0));
    CHECK_FALSE(c.sameStatus);
    CHECK(formatComparison(c).find("time_ratio = 2") != std::string::npos);

    RunReport none = a;
    none.relError.reset();
    none.referenceNote = "no reference for this mesh";
    std::istringstream in2(formatReport(none));
    CHECK(parseReport(in2) == none);
    CHECK_FALSE(compareRuns(a, none).errorRatio.has_value());
}

TEST_CASE("built-in meshes and evaluation points") {
    RunConfig cfg;
    cfg.mesh = "sphere:300";
    const TriMesh m = buildMesh(cfg);
    CHECK(m.size() == 320);
    REQUIRE(sphereScenarioFor(cfg).has_value());
    CHECK(evaluationPoints(cfg, m).size() == 33);
    cfg.points = "all";
    CHECK(evaluationPoints(cfg, m).size() == 320);
    cfg.points = "3, 7,11";
    CHECK(evaluationPoints(cfg, m) == std::vector<int>{3, 7, 11});
    cfg.points = "3,999";
    CHECK_THROWS(evaluationPoints(cfg, m));
    cfg.mesh = "sphere:abc";
    CHECK_THROWS(buildMesh(cfg));
    cfg.mesh = "/nonexistent.msh";
    CHECK_THROWS(buildMesh(cfg));
    cfg.mesh = "hollow-box";
    CHECK_FALSE(sphereScenarioFor(cfg).has_value());
}

TEST_CASE("a small run produces profiles and a reference error") {
    RunConfig cfg;
    cfg.mesh = "sphere:80";
    cfg.dt = 0.1;
    cfg.nt = 30;
    cfg.arcSamples = 5;
    const RunResult r = runScenario(cfg);
    CHECK(r.report.status == "stable");
    CHECK(r.values.rows() == 30);
    CHECK(r.values.cols() == 5);
    CHECK(r.reference.rows() == 30);
    REQUIRE(r.report.relError.has_value());
    CHECK(*r.report.relError < 1.0);
    CHECK(r.report.elements == 80);
    CHECK(r.report.solvedSteps == 29);
    std::ostringstream csv;
    writeProfiles(csv, cfg, r);
    CHECK(csv.str().rfind("t,point_id,value,reference\n", 0) == 0);
}

}
