// scenario.hpp - declarative JSON scenarios, parameter sweeps and oracle cross-checks
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "usc/dynamics.hpp"
#include "usc/result_table.hpp"
#include "usc/spectrum.hpp"

namespace usc {

constexpr int kSchemaVersion = 1;

enum class ScenarioModel { Isotropic, Anisotropic, HopfieldA2, Rabi, TwoQubits, LocalMe, Closed };

struct TimeGrid {
    double start = 1.0;
    double stop = 1e5;
    int points = 2001;
    bool log = true;

    std::vector<double> values() const;
};

struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

struct OracleCheck {
    bool enabled = false;
    int n_max = 25;
    double tolerance = 1e-3;
};

struct ScenarioConfig {
    ScenarioModel model = ScenarioModel::Isotropic;
    std::map<std::string, double> params; // raw values, resolved per sweep point
    InitialState initial_state = InitialState::BareVacuum;
    std::optional<TimeGrid> time_grid;
    std::vector<SweepAxis> sweep;
    std::vector<std::string> outputs{"energy_b", "stored", "passive", "ergotropy", "ratio"};
    OracleCheck oracle;
    int n_max = 25; // truncation of the qubit/Rabi models

    ModelParams resolve(const std::map<std::string, double>& overrides = {}) const;
    nlohmann::json to_json() const;
    std::string hash() const;
};

// throws ConfigInvalid naming the offending field
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

std::string model_name(ScenarioModel m);

enum class RunMode { Spectrum, Evolve, Steady };

struct ScenarioOutcome {
    ResultTable table;
    std::optional<std::string> oracle_failure;
};

// Rows are ordered by sweep index (row-major over the axes), then by time.
ScenarioOutcome evaluate_scenario(const ScenarioConfig& cfg, RunMode mode, int threads = 0);
// Same, but throws OracleDiverged when the oracle check fails.
ResultTable run_scenario(const ScenarioConfig& cfg, RunMode mode, int threads = 0);

// USC_BATTERY_THREADS, else the hardware concurrency
int default_thread_count();

} // namespace usc
