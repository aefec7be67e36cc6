#include "gcsf/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>

#include "gcsf/error.hpp"
#include "gcsf/io.hpp"

namespace gcsf {

namespace {

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorKind::ConfigError, "bad value '" + text + "' for " + key);
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void ensure_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw Error(ErrorKind::ConfigError, "cannot create output directory " + dir.string());
    }
}

nlohmann::ordered_json summary_header(const RunConfig& cfg) {
    nlohmann::ordered_json s;
    s["schema_version"] = io::kSchemaVersion;
    s["p"] = cfg.p;
    s["n"] = cfg.n;
    s["shape"] = cfg.shape;
    return s;
}

void write_error_summary(const RunConfig& cfg, const Error& e) {
    auto s = summary_header(cfg);
    s["omega_hat"] = nullptr;
    s["omega_fit_residual"] = nullptr;
    s["stop_reason"] = "error";
    s["wall_steps"] = 0;
    s["error"] = std::string(e.name());
    s["message"] = e.what();
    io::write_json(cfg.out_dir / "summary.json", s);
}

void write_simulation(const RunConfig& cfg, const SimulationResult& sim) {
    const Trajectory& traj = sim.trajectory;
    io::write_snapshots_csv(cfg.out_dir / "snapshots.csv", traj);
    io::write_diagnostics_ndjson(cfg.out_dir / "diagnostics.ndjson", traj, sim.geometry);
    auto s = summary_header(cfg);
    s["omega_hat"] = sim.omega.omega;
    s["omega_fit_residual"] = sim.omega.residual;
    s["stop_reason"] = std::string(to_string(traj.stop_reason));
    s["wall_steps"] = traj.total_steps;
    if (sim.omega.omega_area) s["omega_area"] = *sim.omega.omega_area;
    io::write_json(cfg.out_dir / "summary.json", s);
}

// Validation and output-directory errors are config errors (exit 2); anything the
// numerics raise is an abort (exit 3).
template <class Body>
int run_guarded(const RunConfig& cfg, Body&& body) {
    try {
        cfg.validate();
        ensure_out_dir(cfg.out_dir);
        (void)parse_shape(cfg.shape);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        if (e.kind() == ErrorKind::ConfigError) return kExitConfig;
        try {
            write_error_summary(cfg, e);
        } catch (const Error&) {
        }
        return kExitNumerical;
    }
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
    if (!(p >= 1.0) || !std::isfinite(p)) fail("p must be >= 1");
    if (n < 16 || n % 2 != 0) fail("n must be even and >= 16");
    if (!(sigma > 0.0 && sigma <= 1.0)) fail("sigma must lie in (0, 1]");
    if (!(k_stop_factor > 1.0)) fail("k_stop_factor must exceed 1");
    if (l_max < 1 || l_max > 4) fail("l_max must lie in [1, 4]");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (!(slope_tol >= 0.0)) fail("slope_tol must be >= 0");
    if (count < 1) fail("count must be >= 1");
    if (out_dir.empty()) fail("out_dir must be set");
}

void apply_setting(RunConfig& cfg, std::string key, const std::string& raw) {
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(raw);
    if (key == "p") {
        cfg.p = parse_value<double>(key, value);
    } else if (key == "shape") {
        cfg.shape = value;
    } else if (key == "n") {
        // Parse signed so that negative sizes are reported rather than wrapped.
        const long long v = parse_value<long long>(key, value);
        if (v < 0) throw Error(ErrorKind::ConfigError, "n must be positive");
        cfg.n = static_cast<std::size_t>(v);
    } else if (key == "sigma") {
        cfg.sigma = parse_value<double>(key, value);
    } else if (key == "k_stop_factor") {
        cfg.k_stop_factor = parse_value<double>(key, value);
    } else if (key == "snapshot_stride") {
        cfg.snapshot_stride = parse_value<std::size_t>(key, value);
    } else if (key == "l_max") {
        cfg.l_max = parse_value<int>(key, value);
    } else if (key == "alpha") {
        cfg.alpha = parse_value<double>(key, value);
    } else if (key == "slope_tol") {
        cfg.slope_tol = parse_value<double>(key, value);
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else if (key == "seed") {
        cfg.seed = parse_value<std::uint64_t>(key, value);
    } else if (key == "count") {
        const long long v = parse_value<long long>(key, value);
        cfg.count = v < 0 ? 0 : static_cast<std::size_t>(v);
    } else {
        throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigError,
                        path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        }
        apply_setting(cfg, trim(t.substr(0, eq)), t.substr(eq + 1));
    }
}

void apply_environment(RunConfig& cfg) {
    if (const char* out = std::getenv("GCSF_OUT"); out != nullptr && *out != '\0') {
        cfg.out_dir = out;
    }
}

FlowConfig flow_config(const RunConfig& cfg) {
    FlowConfig f;
    f.g = GModel::power_law(cfg.p);
    f.n = cfg.n;
    f.sigma = cfg.sigma;
    f.snapshot_stride = cfg.snapshot_stride;
    return f;
}

VerdictConfig verdict_config(const RunConfig& cfg) {
    VerdictConfig v;
    v.alpha = cfg.alpha;
    v.slope_tol = cfg.slope_tol;
    return v;
}

SimulationResult simulate(const RunConfig& cfg) {
    cfg.validate();
    const PeriodicGrid grid(cfg.n);
    const CurvatureProfile k0 = initial_profile(parse_shape(cfg.shape), grid);
    FlowConfig fc = flow_config(cfg);
    fc.k_stop = cfg.k_stop_factor * k0.max();

    SimulationResult sim;
    sim.trajectory = run_physical(k0, fc);
    for (const CurvatureProfile& k : sim.trajectory.profiles) {
        sim.geometry.push_back(compute_geometry(k, kInf));
    }
    sim.omega = estimate_omega(sim.trajectory);
    sim.trajectory.omega_hat = sim.omega.omega;
    sim.trajectory.omega_fit_residual = sim.omega.residual;
    return sim;
}

bool VerificationResult::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

VerificationResult verify(const RunConfig& cfg) {
    VerificationResult r;
    r.simulation = simulate(cfg);
    const Trajectory& traj = r.simulation.trajectory;
    const double omega = r.simulation.omega.omega;
    const VerdictConfig vc = verdict_config(cfg);

    r.rescaled = rescale(traj, omega);
    r.ledger = build_ledger(r.rescaled, cfg.l_max);
    r.ledger.run_id = cfg.out_dir.filename().string();
    r.roundness = roundness_series(traj, omega);

    auto append = [&r](std::vector<Verdict> more) {
        r.verdicts.insert(r.verdicts.end(), more.begin(), more.end());
    };
    append(verify_roundness(r.roundness, vc));
    append(verify_derivative_decay(r.ledger, cfg.p, vc));
    append(verify_blowup_rates(traj, omega, cfg.l_max, vc));
    r.verdicts.push_back(verify_gage_hamilton(r.rescaled, vc));
    append(verify_energy_bounds(r.ledger, vc));
    return r;
}

int cmd_simulate(const RunConfig& cfg) {
    return run_guarded(cfg, [&cfg] {
        write_simulation(cfg, simulate(cfg));
        return static_cast<int>(kExitOk);
    });
}

int cmd_verify(const RunConfig& cfg) {
    return run_guarded(cfg, [&cfg] {
        const VerificationResult r = verify(cfg);
        write_simulation(cfg, r.simulation);
        io::write_ledger_csv(cfg.out_dir / "ledger.csv", r.ledger);
        io::write_json(cfg.out_dir / "verdicts.json", io::verdicts_to_json(r.verdicts));
        for (const Verdict& v : r.verdicts) {
            std::cout << (v.pass ? "PASS " : "FAIL ") << v.claim_id << " measured="
                      << io::format_double(v.measured) << " required="
                      << io::format_double(v.required) << (v.below_floor ? " (below floor)" : "")
                      << '\n';
        }
        return r.all_pass() ? static_cast<int>(kExitOk) : static_cast<int>(kExitFail);
    });
}

int cmd_inequalities(const RunConfig& cfg) {
    return run_guarded(cfg, [&cfg] {
        const InequalityReport rep = inequality_suite(cfg.seed, cfg.count, cfg.n);
        nlohmann::ordered_json doc;
        doc["schema_version"] = io::kSchemaVersion;
        doc["seed"] = rep.seed;
        doc["count"] = rep.count;
        doc["violations"] = rep.violations;
        doc["worst_young"] = rep.worst_young;
        doc["worst_wirtinger"] = rep.worst_wirtinger;
        doc["worst_sobolev"] = rep.worst_sobolev;
        doc["worst_margin"] = rep.worst_margin();
        doc["wirtinger_equality_gap"] = rep.wirtinger_equality_gap;
        io::write_json(cfg.out_dir / "inequalities.json", doc);
        std::cout << "inequalities: count=" << rep.count << " violations=" << rep.violations
                  << " worst_margin=" << io::format_double(rep.worst_margin()) << '\n';
        return rep.passed() ? static_cast<int>(kExitOk) : static_cast<int>(kExitFail);
    });
}

int run_sweep(const RunConfig& base, const std::vector<double>& ps,
              int (*command)(const RunConfig&)) {
    std::vector<std::future<int>> jobs;
    for (double p : ps) {
        RunConfig cfg = base;
        cfg.p = p;
        cfg.out_dir = base.out_dir / ("p_" + io::format_double(p));
        jobs.push_back(std::async(std::launch::async, command, cfg));
    }
    int worst = kExitOk;
    for (auto& job : jobs) worst = std::max(worst, job.get());
    return worst;
}

}  // namespace gcsf
