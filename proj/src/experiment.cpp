#include "qmetro/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qmetro/adaptive.hpp"
#include "qmetro/fisher.hpp"
#include "qmetro/qubit_example.hpp"

namespace qmetro::experiment {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Dispatches row jobs to a small pool; results land in submission order.
void parallel_rows(int threads, int count, const std::function<void(int)>& job) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(threads, count);
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string render_csv() const {
        std::ostringstream os;
        for (size_t c = 0; c < header.size(); ++c)
            os << header[c] << (c + 1 < header.size() ? "," : "");
        os << '\n';
        for (const auto& r : rows) {
            for (size_t c = 0; c < r.size(); ++c) os << r[c] << (c + 1 < r.size() ? "," : "");
            os << '\n';
        }
        return os.str();
    }

    std::string render_json() const {
        json arr = json::array();
        for (const auto& r : rows) {
            json obj;
            for (size_t c = 0; c < header.size(); ++c) obj[header[c]] = r[c];
            arr.push_back(std::move(obj));
        }
        return arr.dump(2) + "\n";
    }
};

Table run_qfi_b(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"omega", "T", "qfi_nocontrol", "qfi_nocontrol_pipeline", "qfi_nocontrol_reldiff",
                "qfi_optimal", "qfi_optimal_pipeline", "qfi_optimal_reldiff", "ratio"};
    struct Point { double omega, T; };
    std::vector<Point> pts;
    for (double w : cfg.omegas)
        for (double T : cfg.T_grid) pts.push_back({w, T});
    t.rows.resize(pts.size());
    parallel_rows(effective_threads(cfg), static_cast<int>(pts.size()), [&](int i) {
        const auto [w, T] = pts[i];
        const qubit::RotatingFieldParams p(cfg.B, w, w);
        const double f0 = qubit::qfi_B_nocontrol(p, T);
        const double f0p = qubit::qfi_B_nocontrol_pipeline(p, T, cfg.steps_per_unit);
        const double fo = qubit::qfi_B_optimal(p, T);
        const double fop = qubit::qfi_B_optimal_pipeline(p, T, cfg.steps_per_unit);
        t.rows[i] = {fmt(w),  fmt(T),   fmt(f0),  fmt(f0p), fmt(rel_diff(f0, f0p)),
                     fmt(fo), fmt(fop), fmt(rel_diff(fo, fop)), fmt(fo / f0)};
    });
    return t;
}

Table run_qfi_omega(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"omega_c", "T", "qfi_optimal", "qfi_controlled_pipeline",
                "qfi_controlled_reldiff", "qfi_detuned_approx", "qfi_nocontrol"};
    struct Point { double wc, T; };
    std::vector<Point> pts;
    for (double wc : cfg.omega_cs)
        for (double T : cfg.T_grid) pts.push_back({wc, T});
    t.rows.resize(pts.size());
    const double omega_true = cfg.omegas.empty() ? 1.0 : cfg.omegas.front();
    parallel_rows(effective_threads(cfg), static_cast<int>(pts.size()), [&](int i) {
        const auto [wc, T] = pts[i];
        const qubit::RotatingFieldParams p(cfg.B, omega_true, wc);
        const double fopt = qubit::qfi_omega_optimal(p, T);
        const double fpipe = qubit::qfi_omega_controlled_pipeline(p, T, cfg.steps_per_unit);
        const double fapprox = qubit::qfi_omega_detuned(p, T);
        const double f0 = qubit::qfi_omega_nocontrol(p, T);
        t.rows[i] = {fmt(wc),      fmt(T),       fmt(fopt), fmt(fpipe),
                     fmt(rel_diff(fapprox, fpipe)), fmt(fapprox), fmt(f0)};
    });
    return t;
}

Table run_detuned(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"delta_omega", "T", "qfi_pipeline", "qfi_approx", "residual"};
    struct Point { double dw, T; };
    std::vector<Point> pts;
    const double omega_true = cfg.omegas.empty() ? 1.0 : cfg.omegas.front();
    for (double wc : cfg.omega_cs)
        for (double T : cfg.T_grid) pts.push_back({wc - omega_true, T});
    t.rows.resize(pts.size());
    parallel_rows(effective_threads(cfg), static_cast<int>(pts.size()), [&](int i) {
        const auto [dw, T] = pts[i];
        const qubit::RotatingFieldParams p(cfg.B, omega_true, omega_true + dw);
        const double fp = qubit::qfi_omega_controlled_pipeline_precise(p, T, 4096);
        const double fa = qubit::qfi_omega_detuned(p, T);
        t.rows[i] = {fmt(dw), fmt(T), fmt(fp), fmt(fa), fmt(fp - fa)};
    });
    return t;
}

Table run_adaptive(const ExperimentConfig& cfg) {
    adaptive::AdaptiveConfig ac;
    ac.I0 = cfg.I0;
    ac.N = cfg.N;
    ac.B = cfg.B;
    ac.seed = cfg.seed;
    ac.rounds = cfg.rounds;
    ac.replicas = cfg.replicas;
    ac.omega_true = cfg.omegas.empty() ? 1.0 : cfg.omegas.front();
    ac.target_T = cfg.T_grid.empty() ? 0.0 : cfg.T_grid.back();
    const auto study = adaptive::simulate_protocol(ac);
    Table t;
    t.header = {"replica", "round", "T_n", "omega_c", "estimate", "I_analytic"};
    for (size_t r = 0; r < study.replicas.size(); ++r)
        for (const auto& round : study.replicas[r].rounds)
            t.rows.push_back({std::to_string(r), std::to_string(round.n), fmt(round.T_n),
                              fmt(round.omega_c), fmt(round.estimate), fmt(round.I_analytic)});
    return t;
}

Table run_crossing_demo(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"l", "profile", "population", "phase_error", "discrete_area"};
    // linear synthetic family with one crossing at tau = 1/2
    HamiltonianFamily fam(
        2,
        [](double time, double g) {
            ComplexMatrix m = ComplexMatrix::Zero(2, 2);
            m(0, 0) = g * (1.0 - time);
            m(1, 1) = g * time;
            return HermitianOperator(std::move(m));
        },
        [](double time, double) {
            ComplexMatrix m = ComplexMatrix::Zero(2, 2);
            m(0, 0) = 1.0 - time;
            m(1, 1) = time;
            return HermitianOperator(std::move(m));
        });
    const TimeGrid grid(0.0, 1.0, cfg.steps_per_unit);
    const SpectralTracks tracks = build_tracks(fam, 1.0, grid, GaugeChoice::zero());
    const auto crossings = detect_crossings(tracks);
    if (crossings.empty()) throw NumericalError("crossing-demo: no crossing found");
    const Crossing cx = crossings.front();

    for (long l : cfg.pulse_l) {
        for (PulseProfile prof : {PulseProfile::flat, PulseProfile::raised_cosine}) {
            ControlSchedule sched = optimal_control(tracks, fam, 1.0);
            CrossingPulse pulse =
                crossing_pulse(tracks, cx.tau, cx.n, cx.m, cfg.pulse_window, l, prof);
            const double area = pulse.area();
            sched.add_pulse(std::move(pulse));
            const HamiltonianFamily tot = total_hamiltonian(fam, sched);
            // start on the pre-crossing extreme track, expect a full transfer
            const int start = tracks.max_track_at(0);
            const int other = start == cx.n ? cx.m : cx.n;
            const PureState psi0(tracks.vectors[0].col(start));
            const Unitary U = propagate(tot, 1.0, grid);
            const ComplexVector psiT = U.matrix() * psi0.amplitudes();
            const complexd amp = tracks.vectors[grid.steps].col(other).dot(psiT);
            const double pop = std::norm(amp);
            const complexd expected = (l % 2 == 0) ? complexd(0, -1) : complexd(0, 1);
            const double phase_err = std::abs(amp - expected);
            t.rows.push_back({std::to_string(l),
                              prof == PulseProfile::flat ? "flat" : "raised_cosine", fmt(pop),
                              fmt(phase_err), fmt(area)});
        }
    }
    return t;
}

Table run_convergence(const ExperimentConfig& cfg) {
    Table t;
    t.header = {"steps", "max_error", "ratio_to_previous"};
    const double T = cfg.T_grid.empty() ? 1.0 : cfg.T_grid.back();
    const double w = cfg.omegas.empty() ? 1.0 : cfg.omegas.front();
    const qubit::RotatingFieldParams p(cfg.B, w, w);
    const HamiltonianFamily fam = qubit::hamiltonian(p, qubit::Parameter::B);
    const ComplexMatrix ref = qubit::closed_form_unitary_nocontrol(p, T).matrix();
    double prev = 0.0;
    for (int steps = 64; steps <= 4096; steps *= 2) {
        const Unitary U = propagate(fam, p.B, TimeGrid(0.0, T, steps));
        const double err = (U.matrix() - ref).cwiseAbs().maxCoeff();
        t.rows.push_back({std::to_string(steps), fmt(err),
                          prev > 0.0 ? fmt(prev / err) : std::string("")});
        prev = err;
    }
    return t;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto strictly_increasing = [](const std::vector<double>& v) {
        for (size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return true;
    };
    if (!(B > 0.0)) throw ConfigError("B must be positive");
    if (steps_per_unit < 1) throw ConfigError("steps_per_unit must be >= 1");
    if (!strictly_increasing(T_grid)) throw ConfigError("T grid must be strictly increasing");
    switch (scenario) {
        case Scenario::qfi_b:
            if (omegas.empty()) throw ConfigError("qfi-b requires a nonempty omega list");
            if (T_grid.empty()) throw ConfigError("qfi-b requires a nonempty T grid");
            break;
        case Scenario::qfi_omega:
        case Scenario::detuned_sweep:
            if (omega_cs.empty()) throw ConfigError("scenario requires omega_c list");
            if (T_grid.empty()) throw ConfigError("scenario requires a nonempty T grid");
            break;
        case Scenario::adaptive:
            if (N < 1 || rounds < 1 || replicas < 1)
                throw ConfigError("adaptive requires N, rounds, replicas >= 1");
            break;
        case Scenario::crossing_demo:
            if (pulse_l.empty()) throw ConfigError("crossing-demo requires pulse_l values");
            if (!(pulse_window > 0.0)) throw ConfigError("pulse_window must be positive");
            break;
        case Scenario::convergence: break;
    }
    if (output.empty()) throw ConfigError("output path must be set");
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "qfi-b") return Scenario::qfi_b;
    if (name == "qfi-omega") return Scenario::qfi_omega;
    if (name == "detuned-sweep") return Scenario::detuned_sweep;
    if (name == "adaptive") return Scenario::adaptive;
    if (name == "crossing-demo") return Scenario::crossing_demo;
    if (name == "convergence") return Scenario::convergence;
    throw ConfigError("unknown scenario: " + name);
}

std::string scenario_to_string(Scenario s) {
    switch (s) {
        case Scenario::qfi_b: return "qfi-b";
        case Scenario::qfi_omega: return "qfi-omega";
        case Scenario::detuned_sweep: return "detuned-sweep";
        case Scenario::adaptive: return "adaptive";
        case Scenario::crossing_demo: return "crossing-demo";
        default: return "convergence";
    }
}

ExperimentConfig parse_config_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    const std::vector<std::string> known = {
        "scenario", "B", "omegas", "omega_cs", "T_grid", "steps_per_unit", "N", "shots",
        "rounds", "replicas", "I0", "seed", "pulse_l", "pulse_window", "output", "format",
        "threads"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key: " + it.key());
    try {
        cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
        cfg.B = j.value("B", cfg.B);
        cfg.omegas = j.value("omegas", cfg.omegas);
        cfg.omega_cs = j.value("omega_cs", cfg.omega_cs);
        cfg.T_grid = j.value("T_grid", cfg.T_grid);
        cfg.steps_per_unit = j.value("steps_per_unit", cfg.steps_per_unit);
        cfg.N = j.value("N", cfg.N);
        cfg.shots = j.value("shots", cfg.shots);
        cfg.rounds = j.value("rounds", cfg.rounds);
        cfg.replicas = j.value("replicas", cfg.replicas);
        cfg.I0 = j.value("I0", cfg.I0);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.pulse_l = j.value("pulse_l", cfg.pulse_l);
        cfg.pulse_window = j.value("pulse_window", cfg.pulse_window);
        cfg.output = j.value("output", cfg.output);
        if (j.contains("format")) {
            const std::string f = j.at("format").get<std::string>();
            if (f == "csv") cfg.format = OutputFormat::csv;
            else if (f == "json") cfg.format = OutputFormat::json;
            else throw ConfigError("format must be csv or json");
        }
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

int effective_threads(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("QFI_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    if (cfg.threads >= 1) return cfg.threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::string run(const ExperimentConfig& cfg) {
    cfg.validate();
    Table t;
    switch (cfg.scenario) {
        case Scenario::qfi_b: t = run_qfi_b(cfg); break;
        case Scenario::qfi_omega: t = run_qfi_omega(cfg); break;
        case Scenario::detuned_sweep: t = run_detuned(cfg); break;
        case Scenario::adaptive: t = run_adaptive(cfg); break;
        case Scenario::crossing_demo: t = run_crossing_demo(cfg); break;
        case Scenario::convergence: t = run_convergence(cfg); break;
    }
    const std::string rendered =
        cfg.format == OutputFormat::csv ? t.render_csv() : t.render_json();
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + cfg.output);
    out << rendered;
    return rendered;
}

std::string schema() {
    json s;
    s["scenario"] = "one of qfi-b | qfi-omega | detuned-sweep | adaptive | crossing-demo | convergence";
    s["B"] = "field amplitude, > 0 (default 1)";
    s["omegas"] = "rotation frequencies; qfi-b sweeps them, other scenarios use the first as the true omega";
    s["omega_cs"] = "trial control frequencies (qfi-omega, detuned-sweep)";
    s["T_grid"] = "strictly increasing evolution times";
    s["steps_per_unit"] = "propagation slices per unit time (default 4096)";
    s["N"] = "adaptive: measurements per round";
    s["shots"] = "measurement sampling shots";
    s["rounds"] = "adaptive: feedback rounds";
    s["replicas"] = "adaptive: protocol replicas";
    s["I0"] = "adaptive: initial per-measurement Fisher information";
    s["seed"] = "RNG seed; identical config + seed gives byte-identical output";
    s["pulse_l"] = "crossing-demo: integer pulse indices l (area (l+1/2) pi)";
    s["pulse_window"] = "crossing-demo: pulse window width";
    s["output"] = "output file path";
    s["format"] = "csv (default) or json";
    s["threads"] = "worker count; env QFI_THREADS overrides";
    return s.dump(2) + "\n";
}

}  // namespace qmetro::experiment
