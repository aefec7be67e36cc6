#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcsf/analysis.hpp"
#include "gcsf/flow.hpp"
#include "gcsf/geometry.hpp"

namespace gcsf {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFail = 1, kExitConfig = 2, kExitNumerical = 3 };

struct RunConfig {
    double p = 1.0;
    std::string shape = "ellipse:a=1,b=0.5";
    std::size_t n = 256;
    double sigma = 0.2;
    double k_stop_factor = 50.0;
    std::size_t snapshot_stride = 0;
    int l_max = 2;
    double alpha = 0.9;
    double slope_tol = 0.1;
    std::filesystem::path out_dir = "gcsf_out";
    std::uint64_t seed = 42;
    std::size_t count = 1000;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Sets one field from a key (snake_case or kebab-case) and its textual value.
void apply_setting(RunConfig& cfg, std::string key, const std::string& value);

/// Plain-text `key=value` lines; blank lines and `#` comments are ignored.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// GCSF_OUT, when set, replaces out_dir.
void apply_environment(RunConfig& cfg);

FlowConfig flow_config(const RunConfig& cfg);
VerdictConfig verdict_config(const RunConfig& cfg);

struct SimulationResult {
    Trajectory trajectory;
    std::vector<CurveGeometry> geometry;
    OmegaFit omega;
};

/// Integrates the configured shape to blow-up and fits omega. Throws on numerical aborts.
SimulationResult simulate(const RunConfig& cfg);

struct VerificationResult {
    SimulationResult simulation;
    RescaledTrajectory rescaled;
    NormLedger ledger;
    RoundnessSeries roundness;
    std::vector<Verdict> verdicts;

    bool all_pass() const;
};

VerificationResult verify(const RunConfig& cfg);

/// Writes snapshots.csv, diagnostics.ndjson and summary.json. Returns an exit code.
int cmd_simulate(const RunConfig& cfg);
/// Simulate, rescale, build the ledger and write verdicts.json plus ledger.csv.
int cmd_verify(const RunConfig& cfg);
/// Runs the inequality suite and writes inequalities.json.
int cmd_inequalities(const RunConfig& cfg);

/// Runs `command` for each p concurrently, each in out_dir/p_<value>. Returns the
/// largest exit code.
int run_sweep(const RunConfig& base, const std::vector<double>& ps,
              int (*command)(const RunConfig&));

}  // namespace gcsf
