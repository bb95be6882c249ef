// figures.cpp - panel tables built from declarative scenarios
#include "usc/figures.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>

#include "usc/closed_system.hpp"
#include "usc/errors.hpp"
#include "usc/scenario.hpp"

namespace usc {

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
    v.back() = b;
    return v;
}

// step grid a, a+h, ..., b with values rounded to the step's decimals
std::vector<double> steps(double a, double b, double h) {
    const int n = static_cast<int>(std::lround((b - a) / h)) + 1;
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = std::round((a + k * h) * 1e9) / 1e9;
    return v;
}

ScenarioConfig scenario(ScenarioModel model, InitialState init, std::map<std::string, double> params) {
    ScenarioConfig c;
    c.model = model;
    c.initial_state = init;
    c.params = std::move(params);
    return c;
}

TimeGrid default_grid() {
    TimeGrid g;
    g.start = 1.0;
    g.stop = 1e5;
    g.points = 2001;
    g.log = true;
    return g;
}

FigurePanel panel(const std::string& name, ScenarioConfig c, RunMode mode, const std::string& output, int threads,
                  const std::string& caption) {
    c.outputs = {output};
    FigurePanel p{name, run_scenario(c, mode, threads)};
    p.table.title = name + ": " + caption;
    return p;
}

// (a) stored energy and (b) ergotropy for one sweep axis
void transient_pair(std::vector<FigurePanel>& out, const std::string& fig, const std::string& first,
                    const std::string& second, ScenarioConfig c, const SweepAxis& axis, int threads,
                    const std::string& caption) {
    c.time_grid = default_grid();
    c.sweep = {axis};
    out.push_back(panel(fig + "_" + first, c, RunMode::Evolve, "stored", threads, "stored energy, " + caption));
    out.push_back(panel(fig + "_" + second, c, RunMode::Evolve, "ergotropy", threads, "ergotropy, " + caption));
}

const std::vector<double> kCouplings{0.1, 0.2, 0.3, 0.4};
const std::vector<double> kTemperatures{0.5, 1.0, 2.0, 5.0};

std::vector<FigurePanel> fig_bosonic_transients(const std::string& fig, InitialState init, int threads) {
    std::vector<FigurePanel> out;
    const std::string tag = init == InitialState::BareVacuum ? "bare vacuum start" : "polariton ground start";
    transient_pair(out, fig, "a", "b", scenario(ScenarioModel::Isotropic, init, {{"temperature", 1.0}, {"gamma", 1e-3}}),
                   {"g", kCouplings}, threads, tag + ", T = 1");
    transient_pair(out, fig, "c", "d",
                   scenario(ScenarioModel::Isotropic, init, {{"g", 0.3}, {"gamma", 1e-3}}),
                   {"temperature", kTemperatures}, threads, tag + ", g = 0.3");
    return out;
}

std::vector<FigurePanel> fig4(int threads) {
    std::vector<FigurePanel> out;
    ScenarioConfig a = scenario(ScenarioModel::Anisotropic, InitialState::PolaritonGround,
                                {{"temperature", 1.0}, {"gamma", 1e-3}});
    a.sweep = {{"g_bs", steps(0.01, 0.45, 0.01)}, {"g_sq", steps(0.01, 0.45, 0.01)}};
    out.push_back(panel("fig4_a", a, RunMode::Steady, "stored", threads, "steady stored energy over (g_bs, g_sq), T = 1"));
    out.push_back(panel("fig4_b", a, RunMode::Steady, "ergotropy", threads, "steady ergotropy over (g_bs, g_sq), T = 1"));
    ScenarioConfig c = scenario(ScenarioModel::Isotropic, InitialState::PolaritonGround, {{"gamma", 1e-3}});
    c.sweep = {{"temperature", steps(0.2, 5.0, 0.2)}, {"g", steps(0.05, 0.45, 0.01)}};
    out.push_back(panel("fig4_c", c, RunMode::Steady, "stored", threads, "steady stored energy over (T, g)"));
    out.push_back(panel("fig4_d", c, RunMode::Steady, "ergotropy", threads, "steady ergotropy over (T, g)"));
    return out;
}

std::vector<FigurePanel> fig5(int threads) {
    ScenarioConfig c = scenario(ScenarioModel::Isotropic, InitialState::PolaritonGround, {});
    c.sweep = {{"g", steps(0.005, 0.495, 0.005)}};
    FigurePanel p{"fig5", run_scenario(c, RunMode::Spectrum, threads)};
    p.table.title = "fig5: squeezing parameters r_plus, r_minus versus g";
    return {p};
}

std::vector<FigurePanel> fig6(int threads) {
    std::vector<FigurePanel> out;
    const std::map<std::string, double> base{{"temperature", 1.0}, {"gamma", 1e-3}};
    auto bs = base;
    bs["g_sq"] = 0.0;
    transient_pair(out, "fig6", "a", "b", scenario(ScenarioModel::Anisotropic, InitialState::PolaritonGround, bs),
                   {"g_bs", kCouplings}, threads, "beam-splitter coupling only");
    auto sq = base;
    sq["g_bs"] = 0.0;
    transient_pair(out, "fig6", "c", "d", scenario(ScenarioModel::Anisotropic, InitialState::PolaritonGround, sq),
                   {"g_sq", kCouplings}, threads, "two-mode squeezing coupling only");
    return out;
}

std::vector<FigurePanel> fig7(int threads) {
    std::vector<FigurePanel> out;
    transient_pair(out, "fig7", "a", "b",
                   scenario(ScenarioModel::HopfieldA2, InitialState::PolaritonGround, {{"temperature", 1.0}, {"gamma", 1e-3}}),
                   {"g", {0.5, 1.0, 1.5, 2.0}}, threads, "A^2 model, T = 1");
    transient_pair(out, "fig7", "c", "d",
                   scenario(ScenarioModel::HopfieldA2, InitialState::PolaritonGround, {{"g", 1.0}, {"gamma", 1e-3}}),
                   {"temperature", kTemperatures}, threads, "A^2 model, g = 1");
    return out;
}

std::vector<FigurePanel> fig8(int threads) {
    ScenarioConfig a = scenario(ScenarioModel::Isotropic, InitialState::PolaritonGround, {{"temperature", 1.0}});
    a.sweep = {{"g", steps(0.05, 0.45, 0.01)}};
    ScenarioConfig b = scenario(ScenarioModel::HopfieldA2, InitialState::PolaritonGround, {{"temperature", 1.0}});
    b.sweep = {{"g", steps(0.2, 2.0, 0.05)}};
    return {panel("fig8_a", a, RunMode::Steady, "ratio", threads, "steady ergotropy/stored energy, no A^2 term"),
            panel("fig8_b", b, RunMode::Steady, "ratio", threads, "steady ergotropy/stored energy, A^2 model")};
}

// closed-system charger (a, c, e) and battery (b, d, f) energies on t in [0, 50]
std::vector<FigurePanel> fig_closed(const std::string& fig, InitialState init) {
    const std::vector<double> ts = linspace(0.0, 50.0, 1001);
    struct Case {
        std::string charger, battery, label;
        std::function<ModelParams(double)> params;
    };
    const std::vector<Case> cases{
        {"a", "b", "full coupling", [](double g) { return ModelParams::isotropic(g); }},
        {"c", "d", "beam-splitter only", [](double g) { return ModelParams::anisotropic(g, 0.0); }},
        {"e", "f", "two-mode squeezing only", [](double g) { return ModelParams::anisotropic(0.0, g); }}};
    const std::string start = init == InitialState::BareVacuum ? "bare vacuum start" : "polariton ground start";
    std::vector<FigurePanel> out;
    for (const Case& cs : cases) {
        ResultTable ta, tb;
        for (ResultTable* t : {&ta, &tb}) {
            t->columns = {{"g", "omega_b"}, {"t", "1/omega_b"}, {"energy", "omega_b"}};
            t->set_provenance("code_version", kCodeVersion);
            t->set_provenance("config_hash", fnv1a_hex(fig + cs.label + start));
        }
        ta.title = fig + "_" + cs.charger + ": closed-system charger energy, " + cs.label + ", " + start;
        tb.title = fig + "_" + cs.battery + ": closed-system battery energy, " + cs.label + ", " + start;
        for (double g : kCouplings) {
            const ModelParams p = cs.params(g);
            for (double t : ts) {
                const ClosedEnergies e = closed_energies(init, p, t);
                ta.add_row({g, t, e.e_a});
                tb.add_row({g, t, e.e_b});
            }
        }
        out.push_back({fig + "_" + cs.charger, std::move(ta)});
        out.push_back({fig + "_" + cs.battery, std::move(tb)});
    }
    return out;
}

std::vector<FigurePanel> figS3(int threads) {
    const std::vector<double> gs = steps(0.1, 0.45, 0.01);
    std::vector<FigurePanel> out;
    for (const auto& [suffix, what] : std::vector<std::pair<std::string, std::string>>{{"a", "energy_b"}, {"b", "ergotropy"}}) {
        ResultTable t;
        t.title = "figS3_" + suffix + ": steady " + what + " versus g for three battery models, T = 1";
        t.columns = {{"g", "omega_b"}, {"two_oscillators", "omega_b"}, {"two_qubits", "omega_b"}, {"rabi", "omega_b"}};
        std::vector<std::vector<double>> cols;
        std::string hashes;
        for (ScenarioModel m : {ScenarioModel::Isotropic, ScenarioModel::TwoQubits, ScenarioModel::Rabi}) {
            ScenarioConfig c = scenario(m, InitialState::BareVacuum, {{"temperature", 1.0}, {"gamma", 1e-3}});
            c.sweep = {{"g", gs}};
            c.outputs = {what};
            const ResultTable r = run_scenario(c, RunMode::Steady, threads);
            cols.push_back(r.column(what));
            hashes += c.hash();
        }
        for (size_t k = 0; k < gs.size(); ++k) t.add_row({gs[k], cols[0][k], cols[1][k], cols[2][k]});
        t.set_provenance("config_hash", fnv1a_hex(hashes));
        t.set_provenance("code_version", kCodeVersion);
        t.set_provenance("truncation", "rabi n_max=25");
        out.push_back({"figS3_" + suffix, std::move(t)});
    }
    return out;
}

} // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"fig2", "fig3", "fig4", "fig5", "fig6",
                                              "fig7", "fig8", "figS1", "figS2", "figS3"};
    return ids;
}

std::vector<double> figure_time_grid() { return default_grid().values(); }

std::vector<FigurePanel> make_figure(const std::string& id, int threads) {
    std::vector<FigurePanel> out;
    if (id == "fig2") out = fig_bosonic_transients("fig2", InitialState::BareVacuum, threads);
    else if (id == "fig3") out = fig_bosonic_transients("fig3", InitialState::PolaritonGround, threads);
    else if (id == "fig4") out = fig4(threads);
    else if (id == "fig5") out = fig5(threads);
    else if (id == "fig6") out = fig6(threads);
    else if (id == "fig7") out = fig7(threads);
    else if (id == "fig8") out = fig8(threads);
    else if (id == "figS1") out = fig_closed("figS1", InitialState::PolaritonGround);
    else if (id == "figS2") out = fig_closed("figS2", InitialState::BareVacuum);
    else if (id == "figS3") out = figS3(threads);
    else throw ConfigInvalid("figure: unknown id '" + id + "'");
    for (const FigurePanel& p : out) p.table.validate();
    return out;
}

std::vector<std::string> write_figure(const std::string& id, const std::string& out_dir, int threads) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> paths;
    for (const FigurePanel& p : make_figure(id, threads)) {
        const std::string path = (std::filesystem::path(out_dir) / (p.name + ".csv")).string();
        p.table.write(path);
        paths.push_back(path);
    }
    return paths;
}

} // namespace usc
