// test_cli.cpp - scenario configs, result tables, figures and the command-line runner
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"
#include "usc/errors.hpp"
#include "usc/figures.hpp"
#include "usc/result_table.hpp"
#include "usc/scenario.hpp"

using namespace usc;
using nlohmann::json;
using test::near;
namespace fs = std::filesystem;

namespace {

json base_config() {
    return json{{"schema_version", 1},
                {"model", "isotropic"},
                {"params", {{"g", 0.3}, {"temperature", 1.0}, {"gamma", 1e-3}}},
                {"initial_state", "polariton_ground"}};
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigInvalid& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("usc_battery_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string write_config(const fs::path& dir, const json& j) {
    const std::string path = (dir / "config.json").string();
    std::ofstream(path) << j.dump(2);
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(USC_BATTERY_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing") {
    const ScenarioConfig c = parse_config(base_config());
    CHECK(c.model == ScenarioModel::Isotropic);
    CHECK(c.initial_state == InitialState::PolaritonGround);
    const ModelParams p = c.resolve();
    CHECK(p.g_bs == 0.3);
    CHECK(p.g_sq == 0.3);
    CHECK(p.gamma_a == 1e-3);
    CHECK(c.resolve({{"g", 0.1}}).g_sq == 0.1);
    CHECK(parse_config(c.to_json()).hash() == c.hash());

    SUBCASE("errors name the offending field") {
        json j = base_config();
        j["colour"] = "blue";
        CHECK(config_error(j).find("colour") != std::string::npos);
        j = base_config();
        j["params"]["omega_c"] = 1.0;
        CHECK(config_error(j).find("params") != std::string::npos);
        j = base_config();
        j.erase("schema_version");
        CHECK(config_error(j).find("schema_version") != std::string::npos);
        j = base_config();
        j["schema_version"] = 7;
        CHECK(config_error(j).find("schema_version") != std::string::npos);
        j = base_config();
        j["model"] = "three_oscillators";
        CHECK(config_error(j).find("model") != std::string::npos);
        j = base_config();
        j["params"]["g_bs"] = 0.1;
        CHECK(config_error(j).find("g") != std::string::npos);
        j = base_config();
        j["time_grid"] = {{"start", 5.0}, {"stop", 1.0}, {"points", 10}};
        CHECK(config_error(j).find("time_grid") != std::string::npos);
        j = base_config();
        j["time_grid"] = {{"start", 0.0}, {"stop", 10.0}, {"points", 10}, {"spacing", "log"}};
        CHECK(config_error(j).find("time_grid") != std::string::npos);
        j = base_config();
        j["time_grid"] = {{"start", 0.0}, {"stop", 10.0}, {"points", 1}, {"spacing", "linear"}};
        CHECK(config_error(j).find("time_grid.points") != std::string::npos);
        j = base_config();
        j["sweep"] = json::array({{{"param", "omega_z"}, {"values", {1.0}}}});
        CHECK(config_error(j).find("sweep[0].param") != std::string::npos);
        j = base_config();
        j["outputs"] = {"energy_b", "happiness"};
        CHECK(config_error(j).find("outputs[1]") != std::string::npos);
        j = base_config();
        j["model"] = "two_qubits";
        CHECK(config_error(j).find("initial_state") != std::string::npos);
        j = base_config();
        j["initial_state"] = "bare_vacuum";
        j["model"] = "rabi";
        j["oracle_check"] = true;
        CHECK(config_error(j).find("oracle_check") != std::string::npos);
        j = base_config();
        j["params"]["temperature"] = "warm";
        CHECK(config_error(j).find("params.temperature") != std::string::npos);
    }
}

TEST_CASE("time grids") {
    TimeGrid g;
    const std::vector<double> v = g.values();
    REQUIRE(v.size() == 2001);
    CHECK(v.front() == 1.0);
    CHECK(v.back() == 1e5);
    CHECK(near(v[400], 10.0, 1e-12));
    TimeGrid l{0.0, 2.0, 5, false};
    CHECK(l.values() == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK(figure_time_grid().size() == 2001);
}

TEST_CASE("result tables") {
    ResultTable t;
    t.title = "demo";
    t.columns = {{"g", "omega_b"}, {"ratio", "1", true}};
    t.add_row({0.1, 0.25});
    t.add_row({0.2, std::numeric_limits<double>::quiet_NaN()});
    t.set_provenance("config_hash", "abc");
    t.set_provenance("config_hash", "def");
    CHECK_NOTHROW(t.validate());
    const std::string csv = t.to_csv();
    CHECK(csv == "# demo\n# config_hash: def\n# units: omega_b,1\ng,ratio\n0.1,0.25\n0.2,undefined\n");
    CHECK(t.column("ratio")[0] == 0.25);
    CHECK(t.column_index("nope") == -1);
    ResultTable bad = t;
    bad.columns[1].nullable = false;
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(t.add_row({1.0}));
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("scenario evaluation") {
    SUBCASE("single steady point gives one row") {
        const ResultTable t = run_scenario(parse_config(base_config()), RunMode::Steady, 1);
        REQUIRE(t.rows.size() == 1);
        CHECK(near(t.column("energy_b")[0], 0.86299919, 1e-8));
        CHECK(near(t.column("stored")[0], 0.82936483, 1e-8));
        CHECK(near(t.column("ergotropy")[0], 0.0293834, 1e-7));
    }
    SUBCASE("transient coupling sweep: monotone curves, terminal values ordered in g") {
        json j = base_config();
        j["params"].erase("g");
        j["sweep"] = json::array({{{"param", "g"}, {"values", {0.1, 0.2, 0.3, 0.4}}}});
        j["time_grid"] = {{"start", 1.0}, {"stop", 1e5}, {"points", 201}, {"spacing", "log"}};
        const ResultTable t = run_scenario(parse_config(j), RunMode::Evolve, 2);
        REQUIRE(t.rows.size() == 4 * 201);
        const std::vector<double> stored = t.column("stored"), erg = t.column("ergotropy");
        double last_terminal = -1.0;
        for (int s = 0; s < 4; ++s) {
            for (int k = 1; k < 201; ++k) {
                CHECK(stored[s * 201 + k] >= stored[s * 201 + k - 1] - 1e-14);
                CHECK(erg[s * 201 + k] >= erg[s * 201 + k - 1] - 1e-14);
            }
            CHECK(stored[s * 201 + 200] > last_terminal);
            last_terminal = stored[s * 201 + 200];
        }
    }
    SUBCASE("thread count does not change the table") {
        json j = base_config();
        j["params"].erase("g");
        j["sweep"] = json::array({{{"param", "g"}, {"values", {0.05, 0.15, 0.25, 0.35, 0.45}}},
                                  {{"param", "temperature"}, {"values", {0.2, 1.0, 5.0}}}});
        const ScenarioConfig c = parse_config(j);
        const std::string one = run_scenario(c, RunMode::Steady, 1).to_csv();
        CHECK(one == run_scenario(c, RunMode::Steady, 4).to_csv());
        CHECK(one == run_scenario(c, RunMode::Steady, 3).to_csv());
    }
    SUBCASE("other models") {
        json j = base_config();
        j["model"] = "local_me";
        j["initial_state"] = "bare_vacuum";
        j["time_grid"] = {{"start", 0.0}, {"stop", 100.0}, {"points", 11}, {"spacing", "linear"}};
        const ResultTable lt = run_scenario(parse_config(j), RunMode::Evolve, 1);
        CHECK(lt.rows.size() == 11);
        for (double e : lt.column("ergotropy")) CHECK(std::abs(e) < 1e-12);
        j["model"] = "closed";
        const ResultTable ct = run_scenario(parse_config(j), RunMode::Evolve, 1);
        CHECK(ct.rows.size() == 11);
        CHECK_THROWS_AS(run_scenario(parse_config(j), RunMode::Steady, 1), ConfigInvalid);
        j = base_config();
        j["model"] = "two_qubits";
        j["initial_state"] = "bare_vacuum";
        const ResultTable qt = run_scenario(parse_config(j), RunMode::Steady, 1);
        CHECK(std::abs(qt.column("ergotropy")[0]) < 1e-8);
        CHECK(qt.column("energy_b")[0] > 0.0);
    }
    SUBCASE("instability propagates") {
        json j = base_config();
        j["params"]["g"] = 0.6;
        CHECK_THROWS_AS(run_scenario(parse_config(j), RunMode::Steady, 1), UnstableError);
    }
    SUBCASE("oracle check appends deviation columns and fails beyond tolerance") {
        json j = base_config();
        j["params"]["g"] = 0.1;
        j["params"]["temperature"] = 0.5;
        j["oracle_check"] = {{"enabled", true}, {"n_max", 10}, {"tolerance", 1e-3}};
        const ScenarioOutcome ok = evaluate_scenario(parse_config(j), RunMode::Steady, 1);
        CHECK_FALSE(ok.oracle_failure.has_value());
        CHECK(ok.table.column_index("oracle_dev") >= 0);
        CHECK(ok.table.column("oracle_dev")[0] < 1e-3);
        CHECK(ok.table.column("oracle_converged")[0] == 1.0);
        j["oracle_check"]["tolerance"] = 1e-14;
        CHECK_THROWS_AS(run_scenario(parse_config(j), RunMode::Steady, 1), OracleDiverged);
    }
}

TEST_CASE("figures") {
    CHECK(figure_ids().size() == 10);
    CHECK_THROWS_AS(make_figure("fig99"), ConfigInvalid);
    const std::vector<FigurePanel> f5 = make_figure("fig5", 1);
    REQUIRE(f5.size() == 1);
    const std::vector<double> g = f5[0].table.column("g");
    CHECK(g.front() > 0.0);
    CHECK(g.back() < 0.5);
    CHECK(g.size() == 99);
    const std::vector<FigurePanel> s1 = make_figure("figS1", 1);
    CHECK(s1.size() == 6);
    for (const FigurePanel& p : s1) CHECK(p.table.rows.size() == 4 * 1001);
}

TEST_CASE("command-line runner") {
    const fs::path dir = scratch_dir("cli");
    json j = base_config();
    j["params"].erase("g");
    j["sweep"] = json::array({{{"param", "g"}, {"values", {0.1, 0.3}}}});
    const std::string cfg = write_config(dir, j);

    SUBCASE("success and byte-identical reruns") {
        CHECK(run_cli("steady --config " + cfg + " --out " + (dir / "a").string()) == 0);
        CHECK(run_cli("--threads 2 steady --config " + cfg + " --out " + (dir / "b").string()) == 0);
        const std::string a = slurp(dir / "a" / "steady.csv");
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir / "b" / "steady.csv"));
        CHECK(a.find("# config_hash: " + parse_config(j).hash()) != std::string::npos);
        CHECK(run_cli("sweep --config " + cfg + " --out " + (dir / "c").string()) == 0);
        CHECK(slurp(dir / "c" / "sweep.csv") == a);
        CHECK(run_cli("spectrum --config " + cfg + " --out " + (dir / "d").string()) == 0);
        CHECK(fs::exists(dir / "d" / "spectrum.csv"));
        CHECK(run_cli("figure fig5 --out " + (dir / "e").string()) == 0);
        CHECK(fs::exists(dir / "e" / "fig5.csv"));
    }
    SUBCASE("config errors exit with 2") {
        CHECK(run_cli("steady --config " + (dir / "missing.json").string()) == 2);
        json bad = j;
        bad["extra"] = 1;
        CHECK(run_cli("steady --config " + write_config(dir, bad)) == 2);
        CHECK(run_cli("evolve --config " + cfg) == 2); // no time grid
        CHECK(run_cli("bogus") == 2);
        CHECK(run_cli("figure fig99") == 2);
        json single = base_config();
        CHECK(run_cli("sweep --config " + write_config(dir, single)) == 2);
    }
    SUBCASE("instability exits with 3") {
        json bad = base_config();
        bad["params"]["g"] = 0.7;
        CHECK(run_cli("steady --config " + write_config(dir, bad) + " --out " + dir.string()) == 3);
    }
    SUBCASE("oracle divergence exits with 4") {
        json o = base_config();
        o["params"]["g"] = 0.1;
        o["params"]["temperature"] = 0.5;
        o["oracle_check"] = {{"n_max", 8}, {"tolerance", 1e-14}};
        CHECK(run_cli("oracle-check --config " + write_config(dir, o) + " --out " + dir.string()) == 4);
        CHECK(fs::exists(dir / "oracle_check.csv"));
    }
    fs::remove_all(dir);
}
