// scenario.cpp - config parsing, per-point evaluation and the sweep work pool
#include "usc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "usc/closed_system.hpp"
#include "usc/errors.hpp"
#include "usc/fock_oracle.hpp"
#include "usc/local_me.hpp"
#include "usc/observables.hpp"

namespace usc {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kParamNames{"omega_a", "omega_b", "g", "g_bs", "g_sq", "diamag_D", "gamma", "temperature"};
const std::set<std::string> kOutputNames{"energy_b", "stored", "passive", "ergotropy", "ratio", "moments"};

const std::vector<std::pair<std::string, ScenarioModel>> kModels{
    {"isotropic", ScenarioModel::Isotropic}, {"anisotropic", ScenarioModel::Anisotropic},
    {"hopfield_a2", ScenarioModel::HopfieldA2}, {"rabi", ScenarioModel::Rabi},
    {"two_qubits", ScenarioModel::TwoQubits}, {"local_me", ScenarioModel::LocalMe},
    {"closed", ScenarioModel::Closed}};

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw ConfigInvalid(field + ": " + why);
}

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) invalid(where.empty() ? "config" : where, "must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) invalid(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double number_at(const json& j, const std::string& key, const std::string& field) {
    if (!j.at(key).is_number()) invalid(field, "must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) invalid(field, "must be finite");
    return v;
}

int int_at(const json& j, const std::string& key, const std::string& field) {
    if (!j.at(key).is_number_integer()) invalid(field, "must be an integer");
    return j.at(key).get<int>();
}

bool is_bosonic(ScenarioModel m) {
    return m == ScenarioModel::Isotropic || m == ScenarioModel::Anisotropic || m == ScenarioModel::HopfieldA2;
}
bool is_qubit(ScenarioModel m) { return m == ScenarioModel::Rabi || m == ScenarioModel::TwoQubits; }

bool wants(const ScenarioConfig& c, const std::string& out) {
    return std::find(c.outputs.begin(), c.outputs.end(), out) != c.outputs.end();
}

struct Point {
    std::vector<double> sweep_values;
    ModelParams params;
};

struct PointResult {
    std::vector<std::vector<double>> rows;
    std::optional<std::string> failure;
    // oracle diagnostics
    int oracle_n_max = 0;
    bool oracle_converged = true;
    double oracle_shift = 0.0;
    double oracle_dev = 0.0;
    CptpReport cptp;
    bool has_cptp = false;
    double dropped_weight = 0.0;
};

std::vector<Column> make_columns(const ScenarioConfig& c, RunMode mode) {
    std::vector<Column> cols;
    for (const auto& ax : c.sweep) cols.push_back({ax.param, "omega_b"});
    if (mode == RunMode::Spectrum) {
        if (is_qubit(c.model)) {
            for (int k = 1; k <= 3; ++k) cols.push_back({"excitation_" + std::to_string(k), "omega_b"});
            return cols;
        }
        cols.push_back({"omega_plus", "omega_b"});
        cols.push_back({"omega_minus", "omega_b"});
        cols.push_back({"weight_sq_plus", "1/omega_b"});
        cols.push_back({"weight_sq_minus", "1/omega_b"});
        cols.push_back({"kappa_plus", "omega_b"});
        cols.push_back({"kappa_minus", "omega_b"});
        cols.push_back({"g_critical", "omega_b", true});
        cols.push_back({"r_plus", "1", true});
        cols.push_back({"r_minus", "1", true});
        return cols;
    }
    if (mode == RunMode::Evolve) cols.push_back({"t", "1/omega_b"});
    for (const char* o : {"energy_b", "stored", "passive", "ergotropy"})
        if (wants(c, o)) cols.push_back({o, "omega_b"});
    if (wants(c, "ratio")) cols.push_back({"ratio", "1", true});
    if (wants(c, "moments")) {
        if (is_qubit(c.model)) {
            for (const char* n : {"sz", "sm_re", "sm_im"}) cols.push_back({n, "1"});
        } else {
            for (const char* n : {"occ_b", "sq_b_re", "sq_b_im", "occ_a", "sq_a_re", "sq_a_im", "mean_b_re", "mean_b_im"})
                cols.push_back({n, "1"});
        }
    }
    if (c.oracle.enabled) {
        cols.push_back({"oracle_occ_b", "1"});
        cols.push_back({"oracle_sq_b_abs", "1"});
        cols.push_back({"oracle_dev", "1"});
        cols.push_back({"oracle_converged", "1"});
    }
    return cols;
}

void push_report(std::vector<double>& row, const ScenarioConfig& c, const BatteryReport& r) {
    if (wants(c, "energy_b")) row.push_back(r.energy_b);
    if (wants(c, "stored")) row.push_back(r.stored);
    if (wants(c, "passive")) row.push_back(r.passive);
    if (wants(c, "ergotropy")) row.push_back(r.ergotropy);
    if (wants(c, "ratio")) row.push_back(r.ratio ? *r.ratio : kNaN);
}

void push_moments(std::vector<double>& row, const ScenarioConfig& c, const BareMoments& m) {
    if (!wants(c, "moments")) return;
    row.insert(row.end(), {m.occ_b, m.sq_b.real(), m.sq_b.imag(), m.occ_a, m.sq_a.real(), m.sq_a.imag(),
                           m.mean_b.real(), m.mean_b.imag()});
}

double rel_dev(double ref, double x) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-6); }

OracleModel oracle_kind(ScenarioModel m) {
    switch (m) {
    case ScenarioModel::HopfieldA2: return OracleModel::HopfieldA2;
    case ScenarioModel::Rabi: return OracleModel::Rabi;
    case ScenarioModel::TwoQubits: return OracleModel::TwoQubits;
    default: return OracleModel::TwoOscillators;
    }
}

PointResult evaluate_spectrum(const ScenarioConfig& c, const Point& pt) {
    PointResult res;
    std::vector<double> row = pt.sweep_values;
    const ModelParams& p = pt.params;
    if (is_qubit(c.model)) {
        const TruncatedModel m = build_model(oracle_kind(c.model), p, c.n_max);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.hamiltonian, Eigen::EigenvaluesOnly);
        for (int k = 1; k <= 3; ++k) row.push_back(es.eigenvalues()(k) - es.eigenvalues()(0));
    } else {
        const NormalModeBasis basis = diagonalize_or_bare(p);
        const DissipationRates rates = dissipation_rates(p, basis);
        row.insert(row.end(), {basis.omega_plus, basis.omega_minus, rates.weight_sq[PLUS], rates.weight_sq[MINUS],
                               rates.kappa[PLUS], rates.kappa[MINUS]});
        const double gc = critical_coupling(p);
        row.push_back(std::isfinite(gc) ? gc : kNaN);
        if (p.is_isotropic() && p.diamag_D == 0.0 && p.omega_a == p.omega_b && p.g_bs != 0.0) {
            const auto [rp, rm] = squeezing_parameters(p);
            row.insert(row.end(), {rp, rm});
        } else {
            row.insert(row.end(), {kNaN, kNaN});
        }
    }
    res.rows.push_back(std::move(row));
    return res;
}

PointResult evaluate_dynamics(const ScenarioConfig& c, const Point& pt, const std::vector<double>& times) {
    PointResult res;
    const ModelParams& p = pt.params;
    auto start_row = [&](double t) {
        std::vector<double> row = pt.sweep_values;
        if (std::isfinite(t)) row.push_back(t);
        return row;
    };

    if (is_bosonic(c.model)) {
        const NormalModeBasis basis = diagonalize_or_bare(p);
        const DissipationRates rates = dissipation_rates(p, basis);
        const MomentState s0 = initial_moments(c.initial_state, basis);
        const double e0 = std::max(0.0, p.omega_b * normal_to_bare(s0, basis).occ_b);
        std::vector<BareMoments> bare;
        for (double t : times) {
            const MomentState st = std::isinf(t) ? steady_moments(rates) : propagate_analytic(s0, rates, basis, t);
            bare.push_back(normal_to_bare(st, basis));
        }
        std::optional<OracleResult> oracle;
        if (c.oracle.enabled) {
            oracle = oracle_bare_moments(oracle_kind(c.model), p, c.initial_state, times, c.oracle.n_max);
            const OracleRun& run = oracle->runs.front();
            res.oracle_n_max = oracle->runs.back().n_max;
            res.oracle_converged = oracle->converged;
            res.oracle_shift = oracle->last_shift;
            res.dropped_weight = run.dropped_weight;
            res.has_cptp = true;
            res.cptp = run.cptp;
            for (const OracleRun& r : oracle->runs) res.cptp = merge(res.cptp, r.cptp);
        }
        for (size_t k = 0; k < times.size(); ++k) {
            std::vector<double> row = start_row(times[k]);
            push_report(row, c, battery_report(bare[k], e0, p.omega_b));
            push_moments(row, c, bare[k]);
            if (oracle) {
                const BareMoments& o = oracle->runs.front().moments[k];
                const double dev =
                    std::max(rel_dev(bare[k].occ_b, o.occ_b), rel_dev(std::abs(bare[k].sq_b), std::abs(o.sq_b)));
                res.oracle_dev = std::max(res.oracle_dev, dev);
                row.insert(row.end(), {o.occ_b, std::abs(o.sq_b), dev, oracle->converged ? 1.0 : 0.0});
            }
            res.rows.push_back(std::move(row));
        }
        if (oracle && res.oracle_dev > c.oracle.tolerance) {
            std::ostringstream os;
            os << "oracle deviation " << res.oracle_dev << " exceeds tolerance " << c.oracle.tolerance;
            res.failure = os.str();
        }
        return res;
    }

    if (c.model == ScenarioModel::Closed) {
        const double e0 = std::max(0.0, p.omega_b * closed_bare_moments(c.initial_state, p, 0.0).occ_b);
        for (double t : times) {
            const BareMoments m = closed_bare_moments(c.initial_state, p, t);
            std::vector<double> row = start_row(t);
            push_report(row, c, battery_report(m, e0, p.omega_b));
            push_moments(row, c, m);
            res.rows.push_back(std::move(row));
        }
        return res;
    }

    if (c.model == ScenarioModel::LocalMe) {
        LocalParams lp{p.omega_b, p.g_bs, p.gamma_a, p.temperature};
        for (double t : times) {
            BareMoments m;
            if (std::isinf(t)) {
                m.occ_b = bose_einstein(lp.omega, lp.temperature);
            } else {
                m.occ_b = local_battery_energy(lp, t) / lp.omega;
                m.sq_b = local_battery_squeezing(lp, t);
            }
            std::vector<double> row = start_row(t);
            push_report(row, c, battery_report(m, 0.0, p.omega_b));
            push_moments(row, c, m);
            res.rows.push_back(std::move(row));
        }
        return res;
    }

    // qubit batteries through the truncated master equation
    const TruncatedModel model = build_model(oracle_kind(c.model), p, c.n_max);
    const LindbladGenerator gen = build_global_lindblad(model, p);
    std::vector<EigenDensity> states;
    std::vector<double> finite;
    for (double t : times)
        if (std::isfinite(t)) finite.push_back(t);
    Trajectory tr;
    if (!finite.empty()) {
        tr = evolve(gen, bare_vacuum_density(model), finite);
        res.cptp = tr.cptp;
        res.has_cptp = true;
        res.dropped_weight = tr.dropped_weight;
    }
    std::optional<EigenDensity> steady;
    for (double t : times) {
        const EigenDensity* rho;
        if (std::isinf(t)) {
            if (!steady) {
                steady = steady_state(gen);
                res.cptp = res.has_cptp ? merge(res.cptp, cptp_report(*steady)) : cptp_report(*steady);
                res.has_cptp = true;
            }
            rho = &*steady;
        } else {
            const auto it = std::find(tr.times.begin(), tr.times.end(), t);
            rho = &tr.states[it - tr.times.begin()];
        }
        const QubitExpectations q = qubit_expectations(*rho, model, gen);
        BatteryReport r;
        r.energy_b = p.omega_b * (q.sz + 1.0) / 2.0;
        r.stored = r.energy_b;
        r.ergotropy = qubit_ergotropy(q, p.omega_b);
        r.passive = r.energy_b - r.ergotropy;
        if (r.stored > 1e-12) r.ratio = r.ergotropy / r.stored;
        std::vector<double> row = start_row(t);
        push_report(row, c, r);
        if (wants(c, "moments")) row.insert(row.end(), {q.sz, q.sm.real(), q.sm.imag()});
        res.rows.push_back(std::move(row));
    }
    return res;
}

std::vector<Point> expand_sweep(const ScenarioConfig& c) {
    std::vector<Point> pts;
    std::vector<size_t> idx(c.sweep.size(), 0);
    while (true) {
        Point pt;
        std::map<std::string, double> over;
        for (size_t a = 0; a < c.sweep.size(); ++a) {
            const double v = c.sweep[a].values[idx[a]];
            pt.sweep_values.push_back(v);
            over[c.sweep[a].param] = v;
        }
        pt.params = c.resolve(over);
        pts.push_back(std::move(pt));
        // row-major increment, last axis fastest
        int a = static_cast<int>(c.sweep.size()) - 1;
        for (; a >= 0; --a) {
            if (++idx[a] < c.sweep[a].values.size()) break;
            idx[a] = 0;
        }
        if (a < 0) break;
    }
    return pts;
}

} // namespace

std::vector<double> TimeGrid::values() const {
    std::vector<double> v(points);
    for (int k = 0; k < points; ++k) {
        const double f = points > 1 ? static_cast<double>(k) / (points - 1) : 0.0;
        v[k] = log ? std::pow(10.0, std::log10(start) + f * (std::log10(stop) - std::log10(start)))
                   : start + f * (stop - start);
    }
    if (points > 1) {
        v.front() = start;
        v.back() = stop;
    }
    return v;
}

std::string model_name(ScenarioModel m) {
    for (const auto& [name, model] : kModels)
        if (model == m) return name;
    return "unknown";
}

ModelParams ScenarioConfig::resolve(const std::map<std::string, double>& overrides) const {
    std::map<std::string, double> m = params;
    for (const auto& [k, v] : overrides) {
        if (k == "g") {
            m.erase("g_bs");
            m.erase("g_sq");
        } else if ((k == "g_bs" || k == "g_sq") && m.count("g")) {
            m["g_bs"] = m["g_sq"] = m["g"];
            m.erase("g");
        }
        m[k] = v;
    }
    auto get = [&](const std::string& k, double dflt) { return m.count(k) ? m.at(k) : dflt; };
    ModelParams p;
    p.omega_a = get("omega_a", 1.0);
    p.omega_b = get("omega_b", 1.0);
    p.g_bs = m.count("g") ? m.at("g") : get("g_bs", 0.0);
    p.g_sq = m.count("g") ? m.at("g") : get("g_sq", 0.0);
    p.gamma_a = get("gamma", 1e-3);
    p.temperature = get("temperature", 1.0);
    if (model != ScenarioModel::Anisotropic && model != ScenarioModel::Closed && !p.is_isotropic())
        invalid("params.g_bs", "model " + model_name(model) + " needs g_bs == g_sq");
    if (model == ScenarioModel::HopfieldA2) {
        p.diamag_D = get("diamag_D", p.g_bs * p.g_bs / p.omega_b);
    } else if (get("diamag_D", 0.0) != 0.0) {
        invalid("params.diamag_D", "only the hopfield_a2 model has a diamagnetic term");
    }
    if (model == ScenarioModel::LocalMe && p.omega_a != p.omega_b)
        invalid("params.omega_a", "local_me needs omega_a == omega_b");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        invalid("params", e.what());
    }
    return p;
}

json ScenarioConfig::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = model_name(model);
    j["params"] = params;
    j["initial_state"] = initial_state == InitialState::BareVacuum ? "bare_vacuum" : "polariton_ground";
    if (time_grid)
        j["time_grid"] = {{"start", time_grid->start}, {"stop", time_grid->stop}, {"points", time_grid->points},
                          {"spacing", time_grid->log ? "log" : "linear"}};
    if (!sweep.empty()) {
        j["sweep"] = json::array();
        for (const auto& ax : sweep) j["sweep"].push_back({{"param", ax.param}, {"values", ax.values}});
    }
    j["outputs"] = outputs;
    j["oracle_check"] = {{"enabled", oracle.enabled}, {"n_max", oracle.n_max}, {"tolerance", oracle.tolerance}};
    j["n_max"] = n_max;
    return j;
}

std::string ScenarioConfig::hash() const { return fnv1a_hex(to_json().dump()); }

ScenarioConfig parse_config(const json& j) {
    only_keys(j, "", {"schema_version", "model", "params", "initial_state", "time_grid", "sweep", "outputs",
                      "oracle_check", "n_max"});
    ScenarioConfig c;
    if (!j.contains("schema_version")) invalid("schema_version", "missing");
    if (int_at(j, "schema_version", "schema_version") != kSchemaVersion)
        invalid("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

    if (!j.contains("model") || !j["model"].is_string()) invalid("model", "missing or not a string");
    const std::string mname = j["model"];
    bool found = false;
    for (const auto& [name, model] : kModels)
        if (name == mname) {
            c.model = model;
            found = true;
        }
    if (!found) invalid("model", "unknown model '" + mname + "'");

    if (j.contains("params")) {
        only_keys(j["params"], "params", kParamNames);
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
            c.params[it.key()] = number_at(j["params"], it.key(), "params." + it.key());
    }
    if (c.params.count("g") && (c.params.count("g_bs") || c.params.count("g_sq")))
        invalid("params.g", "give either g or g_bs/g_sq, not both");

    if (j.contains("initial_state")) {
        if (!j["initial_state"].is_string()) invalid("initial_state", "must be a string");
        const std::string s = j["initial_state"];
        if (s == "bare_vacuum") c.initial_state = InitialState::BareVacuum;
        else if (s == "polariton_ground") c.initial_state = InitialState::PolaritonGround;
        else invalid("initial_state", "must be bare_vacuum or polariton_ground");
    }
    if (c.initial_state == InitialState::PolaritonGround &&
        (is_qubit(c.model) || c.model == ScenarioModel::LocalMe))
        invalid("initial_state", "polariton_ground is only defined for the oscillator models");

    if (j.contains("time_grid")) {
        const json& t = j["time_grid"];
        only_keys(t, "time_grid", {"start", "stop", "points", "spacing"});
        TimeGrid g;
        if (t.contains("start")) g.start = number_at(t, "start", "time_grid.start");
        if (t.contains("stop")) g.stop = number_at(t, "stop", "time_grid.stop");
        if (t.contains("points")) g.points = int_at(t, "points", "time_grid.points");
        if (t.contains("spacing")) {
            if (!t["spacing"].is_string()) invalid("time_grid.spacing", "must be a string");
            const std::string s = t["spacing"];
            if (s == "log") g.log = true;
            else if (s == "linear") g.log = false;
            else invalid("time_grid.spacing", "must be linear or log");
        }
        if (g.points < 2) invalid("time_grid.points", "must be >= 2");
        if (!(g.start >= 0.0)) invalid("time_grid.start", "must be >= 0");
        if (!(g.stop > g.start)) invalid("time_grid.stop", "must exceed start");
        if (g.log && !(g.start > 0.0)) invalid("time_grid.start", "log spacing needs start > 0");
        c.time_grid = g;
    }

    if (j.contains("sweep")) {
        if (!j["sweep"].is_array()) invalid("sweep", "must be an array");
        std::set<std::string> seen;
        for (size_t k = 0; k < j["sweep"].size(); ++k) {
            const std::string f = "sweep[" + std::to_string(k) + "]";
            const json& ax = j["sweep"][k];
            only_keys(ax, f, {"param", "values"});
            if (!ax.contains("param") || !ax["param"].is_string()) invalid(f + ".param", "missing or not a string");
            SweepAxis a;
            a.param = ax["param"];
            if (!kParamNames.count(a.param)) invalid(f + ".param", "unknown parameter '" + a.param + "'");
            if (!seen.insert(a.param).second) invalid(f + ".param", "parameter swept twice");
            if (!ax.contains("values") || !ax["values"].is_array() || ax["values"].empty())
                invalid(f + ".values", "must be a non-empty array");
            for (size_t v = 0; v < ax["values"].size(); ++v) {
                const json& x = ax["values"][v];
                if (!x.is_number() || !std::isfinite(x.get<double>()))
                    invalid(f + ".values[" + std::to_string(v) + "]", "must be a finite number");
                a.values.push_back(x.get<double>());
            }
            c.sweep.push_back(std::move(a));
        }
    }

    if (j.contains("outputs")) {
        if (!j["outputs"].is_array()) invalid("outputs", "must be an array");
        c.outputs.clear();
        for (size_t k = 0; k < j["outputs"].size(); ++k) {
            const json& o = j["outputs"][k];
            const std::string f = "outputs[" + std::to_string(k) + "]";
            if (!o.is_string() || !kOutputNames.count(o.get<std::string>())) invalid(f, "unknown output");
            c.outputs.push_back(o);
        }
    }

    if (j.contains("oracle_check")) {
        const json& o = j["oracle_check"];
        if (o.is_boolean()) {
            c.oracle.enabled = o.get<bool>();
        } else {
            only_keys(o, "oracle_check", {"enabled", "n_max", "tolerance"});
            if (o.contains("enabled")) {
                if (!o["enabled"].is_boolean()) invalid("oracle_check.enabled", "must be a boolean");
                c.oracle.enabled = o["enabled"];
            }
            if (o.contains("n_max")) c.oracle.n_max = int_at(o, "n_max", "oracle_check.n_max");
            if (o.contains("tolerance")) c.oracle.tolerance = number_at(o, "tolerance", "oracle_check.tolerance");
        }
        if (c.oracle.n_max < 2) invalid("oracle_check.n_max", "must be >= 2");
        if (!(c.oracle.tolerance > 0.0)) invalid("oracle_check.tolerance", "must be positive");
        if (c.oracle.enabled && !is_bosonic(c.model))
            invalid("oracle_check", "the oracle cross-check applies to the oscillator models");
    }
    if (j.contains("n_max")) {
        c.n_max = int_at(j, "n_max", "n_max");
        if (c.n_max < 2) invalid("n_max", "must be >= 2");
    }

    // resolve once so parameter errors surface at load time
    (void)c.resolve();
    for (const auto& ax : c.sweep)
        for (double v : ax.values) (void)c.resolve({{ax.param, v}});
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigInvalid("config: cannot open " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(std::string("config: parse error: ") + e.what());
    }
    return parse_config(j);
}

int default_thread_count() {
    if (const char* env = std::getenv("USC_BATTERY_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

ScenarioOutcome evaluate_scenario(const ScenarioConfig& c, RunMode mode, int threads) {
    if (mode == RunMode::Evolve && !c.time_grid) invalid("time_grid", "required for time evolution");
    if (mode == RunMode::Steady && c.model == ScenarioModel::Closed)
        invalid("model", "the closed system has no steady state");
    if (mode == RunMode::Spectrum && c.model == ScenarioModel::LocalMe)
        invalid("model", "no normal-mode spectrum for local_me");

    const std::vector<Point> pts = expand_sweep(c);
    std::vector<double> times;
    if (mode == RunMode::Evolve) times = c.time_grid->values();
    if (mode == RunMode::Steady) times = {std::numeric_limits<double>::infinity()};

    std::vector<PointResult> results(pts.size());
    std::vector<std::exception_ptr> errors(pts.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t k = next++; k < pts.size(); k = next++) {
            try {
                results[k] = mode == RunMode::Spectrum ? evaluate_spectrum(c, pts[k]) : evaluate_dynamics(c, pts[k], times);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(threads > 0 ? threads : default_thread_count(),
                                                    static_cast<int>(pts.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ScenarioOutcome out;
    ResultTable& table = out.table;
    table.title = model_name(c.model) + " " +
                  (mode == RunMode::Spectrum ? "spectrum" : mode == RunMode::Evolve ? "evolution" : "steady state");
    table.columns = make_columns(c, mode);
    table.set_provenance("config_hash", c.hash());
    table.set_provenance("code_version", kCodeVersion);
    table.set_provenance("config", c.to_json().dump());

    int oracle_points = 0, converged = 0, n_max_used = 0;
    double worst_dev = 0.0, worst_shift = 0.0, dropped = 0.0;
    CptpReport cptp;
    bool has_cptp = false;
    for (size_t k = 0; k < pts.size(); ++k) {
        PointResult& r = results[k];
        for (auto& row : r.rows) table.add_row(std::move(row));
        if (r.failure && !out.oracle_failure) out.oracle_failure = "sweep point " + std::to_string(k) + ": " + *r.failure;
        if (c.oracle.enabled) {
            ++oracle_points;
            converged += r.oracle_converged ? 1 : 0;
            n_max_used = std::max(n_max_used, r.oracle_n_max);
            worst_dev = std::max(worst_dev, r.oracle_dev);
            worst_shift = std::max(worst_shift, r.oracle_shift);
        }
        if (r.has_cptp) {
            cptp = has_cptp ? merge(cptp, r.cptp) : r.cptp;
            has_cptp = true;
        }
        dropped = std::max(dropped, r.dropped_weight);
    }
    if (c.oracle.enabled) {
        std::ostringstream os;
        os << "points=" << oracle_points << " converged=" << converged << " n_max_final=" << n_max_used
           << " last_shift=" << format_number(worst_shift) << " max_dev=" << format_number(worst_dev);
        table.set_provenance("oracle", os.str());
    }
    if (is_qubit(c.model)) table.set_provenance("truncation", "n_max=" + std::to_string(c.n_max));
    if (has_cptp) {
        std::ostringstream os;
        os << "trace_drift=" << format_number(cptp.trace_drift) << " hermiticity=" << format_number(cptp.hermiticity)
           << " min_eigenvalue=" << format_number(cptp.min_eigenvalue)
           << " dropped_weight=" << format_number(dropped);
        table.set_provenance("cptp", os.str());
    }
    table.validate();
    return out;
}

ResultTable run_scenario(const ScenarioConfig& c, RunMode mode, int threads) {
    ScenarioOutcome out = evaluate_scenario(c, mode, threads);
    if (out.oracle_failure) throw OracleDiverged(*out.oracle_failure);
    return std::move(out.table);
}

} // namespace usc
