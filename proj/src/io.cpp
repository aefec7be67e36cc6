#include "gcsf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gcsf/error.hpp"

namespace gcsf::io {

namespace {

constexpr std::string_view kSchemaPrefix = "# schema_version=";

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::SchemaError, "cannot read " + path.string());
    return in;
}

double parse_double(std::string_view s) {
    if (s == "inf") return kInf;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::SchemaError, "bad number '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                        : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

void read_schema_line(std::istream& in, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kSchemaPrefix, 0) != 0) {
        throw Error(ErrorKind::SchemaError, path.string() + " has no schema_version line");
    }
    check_schema_version(line.substr(kSchemaPrefix.size()));
}

void expect_header(std::istream& in, std::string_view header, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw Error(ErrorKind::SchemaError,
                    path.string() + ": expected header '" + std::string(header) + "'");
    }
}

nlohmann::ordered_json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void check_schema_version(const std::string& version) {
    const auto dot = version.find('.');
    int major = -1;
    const std::string head = version.substr(0, dot);
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), major);
    if (ec != std::errc() || ptr != head.data() + head.size() || dot == std::string::npos) {
        throw Error(ErrorKind::SchemaError, "malformed schema_version '" + version + "'");
    }
    if (major != kSchemaMajor) {
        throw Error(ErrorKind::SchemaError, "unsupported schema major version " + head);
    }
}

void write_snapshots_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << kSchemaPrefix << kSchemaVersion << '\n' << "t,theta_index,k\n";
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const std::string t = format_double(traj.times[j]);
        const Field& k = traj.profiles[j].field();
        for (std::size_t i = 0; i < k.size(); ++i) {
            out << t << ',' << i << ',' << format_double(k[i]) << '\n';
        }
    }
}

std::vector<Snapshot> read_snapshots_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    read_schema_line(in, path);
    expect_header(in, "t,theta_index,k", path);
    std::vector<Snapshot> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 3) throw Error(ErrorKind::SchemaError, "snapshot row needs 3 columns");
        const double t = parse_double(cols[0]);
        std::size_t index = 0;
        auto [ptr, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), index);
        if (ec != std::errc()) throw Error(ErrorKind::SchemaError, "bad theta_index");
        if (index == 0) out.push_back({t, {}});
        if (out.empty() || out.back().t != t || out.back().k.size() != index) {
            throw Error(ErrorKind::SchemaError, "snapshot rows out of order");
        }
        out.back().k.push_back(parse_double(cols[2]));
    }
    return out;
}

void write_diagnostics_ndjson(const std::filesystem::path& path, const Trajectory& traj,
                              const std::vector<CurveGeometry>& geometry) {
    if (geometry.size() != traj.size()) {
        throw Error(ErrorKind::InvalidArgument, "one geometry record per snapshot required");
    }
    auto out = open_out(path);
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const CurveGeometry& g = geometry[j];
        nlohmann::ordered_json row;
        row["schema_version"] = kSchemaVersion;
        row["t"] = traj.times[j];
        row["A"] = g.area;
        row["L"] = g.length;
        row["k_min"] = traj.profiles[j].min();
        row["k_max"] = traj.profiles[j].max();
        row["r_in"] = g.r_in;
        row["r_out"] = g.r_out;
        row["iso_ratio"] = g.isoperimetric_ratio();
        row["closure_residual"] = traj.closure[j];
        row["spectral_tail"] = traj.tail[j];
        out << row.dump() << '\n';
    }
}

void write_ledger_csv(const std::filesystem::path& path, const NormLedger& ledger) {
    auto out = open_out(path);
    const char* coord = ledger.coordinate == TimeCoordinate::Rescaled ? "tau" : "t";
    out << kSchemaPrefix << kSchemaVersion << '\n'
        << "# grid_size=" << ledger.grid_size << '\n'
        << "coordinate,time,l,q,value\n";
    for (const NormRow& r : ledger.rows) {
        out << coord << ',' << format_double(r.time) << ',' << r.l << ',' << format_double(r.q)
            << ',' << format_double(r.value) << '\n';
    }
}

NormLedger read_ledger_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    read_schema_line(in, path);
    NormLedger ledger;
    if (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
        constexpr std::string_view kGrid = "# grid_size=";
        if (line.rfind(kGrid, 0) == 0) {
            ledger.grid_size = static_cast<std::size_t>(parse_double(line.substr(kGrid.size())));
        }
    }
    expect_header(in, "coordinate,time,l,q,value", path);
    ledger.run_id = path.parent_path().filename().string();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 5) throw Error(ErrorKind::SchemaError, "ledger row needs 5 columns");
        ledger.coordinate = cols[0] == "tau" ? TimeCoordinate::Rescaled : TimeCoordinate::Physical;
        NormRow r;
        r.time = parse_double(cols[1]);
        r.l = static_cast<int>(parse_double(cols[2]));
        r.q = parse_double(cols[3]);
        r.value = parse_double(cols[4]);
        ledger.l_max = std::max(ledger.l_max, r.l);
        ledger.rows.push_back(r);
    }
    return ledger;
}

nlohmann::ordered_json verdicts_to_json(const std::vector<Verdict>& verdicts) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["verdicts"] = nlohmann::ordered_json::array();
    for (const Verdict& v : verdicts) {
        nlohmann::ordered_json row;
        row["claim_id"] = v.claim_id;
        row["paper_ref"] = v.statement;
        row["measured"] = number_or_null(v.measured);
        row["required"] = number_or_null(v.required);
        row["pass"] = v.pass;
        row["below_floor"] = v.below_floor;
        doc["verdicts"].push_back(row);
    }
    return doc;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
    }
    if (!doc.contains("schema_version") || !doc["schema_version"].is_string()) {
        throw Error(ErrorKind::SchemaError, path.string() + " has no schema_version");
    }
    check_schema_version(doc["schema_version"].get<std::string>());
    return doc;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

}  // namespace gcsf::io
