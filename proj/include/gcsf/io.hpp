#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gcsf/analysis.hpp"
#include "gcsf/flow.hpp"
#include "gcsf/geometry.hpp"

namespace gcsf::io {

inline constexpr int kSchemaMajor = 1;
inline constexpr const char* kSchemaVersion = "1.0";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Throws SchemaError unless `version` is "<kSchemaMajor>.<minor>".
void check_schema_version(const std::string& version);

/// `# schema_version=1.0`, header `t,theta_index,k`, one row per (snapshot, grid point).
void write_snapshots_csv(const std::filesystem::path& path, const Trajectory& traj);

struct Snapshot {
    double t = 0.0;
    std::vector<double> k;
};
std::vector<Snapshot> read_snapshots_csv(const std::filesystem::path& path);

/// One JSON object per snapshot: t, A, L, k_min, k_max, r_in, r_out, iso_ratio,
/// closure_residual, spectral_tail (plus schema_version).
void write_diagnostics_ndjson(const std::filesystem::path& path, const Trajectory& traj,
                              const std::vector<CurveGeometry>& geometry);

/// `# schema_version=1.0`, `# grid_size=<n>`, header `coordinate,time,l,q,value`;
/// q is 2, 4 or inf.
void write_ledger_csv(const std::filesystem::path& path, const NormLedger& ledger);
NormLedger read_ledger_csv(const std::filesystem::path& path);

nlohmann::ordered_json verdicts_to_json(const std::vector<Verdict>& verdicts);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace gcsf::io
