#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"

#include "gcsf/error.hpp"
#include "gcsf/io.hpp"
#include "gcsf/pipeline.hpp"
#include "support.hpp"

using namespace gcsf;
using gcsf::testing::thrown_kind;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gcsf_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << text;
}

RunConfig circle_config(const std::string& name) {
    RunConfig cfg;
    cfg.shape = "circle:r=1";
    cfg.out_dir = scratch(name);
    return cfg;
}

}  // namespace

TEST_CASE("double formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.25) == "0.25");
    CHECK(io::format_double(kInf) == "inf");
}

TEST_CASE("schema versions") {
    CHECK_NOTHROW(io::check_schema_version("1.0"));
    CHECK_NOTHROW(io::check_schema_version("1.7"));
    CHECK(thrown_kind([] { io::check_schema_version("2.0"); }) == ErrorKind::SchemaError);
    CHECK(thrown_kind([] { io::check_schema_version("x"); }) == ErrorKind::SchemaError);

    const auto dir = scratch("schema");
    spit(dir / "bad.json", R"({"schema_version": "2.0"})");
    CHECK(thrown_kind([&] { io::read_json(dir / "bad.json"); }) == ErrorKind::SchemaError);
    spit(dir / "missing.json", R"({"x": 1})");
    CHECK(thrown_kind([&] { io::read_json(dir / "missing.json"); }) == ErrorKind::SchemaError);
    spit(dir / "bad.csv", "# schema_version=9.1\nt,theta_index,k\n");
    CHECK(thrown_kind([&] { io::read_snapshots_csv(dir / "bad.csv"); }) == ErrorKind::SchemaError);
    spit(dir / "ledger.csv", "# schema_version=3.0\ncoordinate,time,l,q,value\n");
    CHECK(thrown_kind([&] { io::read_ledger_csv(dir / "ledger.csv"); }) == ErrorKind::SchemaError);
}

TEST_CASE("run configuration") {
    RunConfig cfg;
    apply_setting(cfg, "k-stop-factor", "20");
    apply_setting(cfg, "l_max", "3");
    apply_setting(cfg, "shape", "circle:r=2");
    CHECK(cfg.k_stop_factor == 20.0);
    CHECK(cfg.l_max == 3);
    CHECK(cfg.shape == "circle:r=2");
    CHECK(thrown_kind([&] { apply_setting(cfg, "bogus", "1"); }) == ErrorKind::ConfigError);
    CHECK(thrown_kind([&] { apply_setting(cfg, "n", "many"); }) == ErrorKind::ConfigError);

    const auto dir = scratch("config");
    spit(dir / "run.cfg", "# comment\np = 2\n\nn=128\nalpha=0.8\n");
    apply_config_file(cfg, dir / "run.cfg");
    CHECK(cfg.p == 2.0);
    CHECK(cfg.n == 128);
    CHECK(cfg.alpha == 0.8);
    spit(dir / "broken.cfg", "p\n");
    CHECK(thrown_kind([&] { apply_config_file(cfg, dir / "broken.cfg"); }) == ErrorKind::ConfigError);

    ::setenv("GCSF_OUT", "/tmp/gcsf_env_out", 1);
    apply_environment(cfg);
    ::unsetenv("GCSF_OUT");
    CHECK(cfg.out_dir == fs::path("/tmp/gcsf_env_out"));

    RunConfig invalid;
    invalid.n = 15;
    CHECK(thrown_kind([&] { invalid.validate(); }) == ErrorKind::ConfigError);
    invalid = RunConfig{};
    invalid.l_max = 5;
    CHECK(thrown_kind([&] { invalid.validate(); }) == ErrorKind::ConfigError);
    invalid = RunConfig{};
    invalid.p = 0.5;
    CHECK(thrown_kind([&] { invalid.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("simulate a circle") {
    auto cfg = circle_config("circle");
    CHECK(cmd_simulate(cfg) == kExitOk);
    const auto summary = io::read_json(cfg.out_dir / "summary.json");
    CHECK(summary["omega_hat"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(summary["stop_reason"] == "k_stop");

    const auto snaps = io::read_snapshots_csv(cfg.out_dir / "snapshots.csv");
    REQUIRE_FALSE(snaps.empty());
    CHECK(snaps.front().k.size() == 256);
    CHECK(snaps.front().t == 0.0);

    std::ifstream diag(cfg.out_dir / "diagnostics.ndjson");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(diag, line)) {
        auto obj = nlohmann::json::parse(line);
        CHECK(obj.contains("schema_version"));
        for (const char* key : {"t", "A", "L", "k_min", "k_max", "r_in", "r_out", "iso_ratio",
                                "closure_residual", "spectral_tail"}) {
            CHECK(obj.contains(key));
        }
        ++lines;
    }
    CHECK(lines == snaps.size());
}

TEST_CASE("exit codes") {
    auto odd = circle_config("odd");
    odd.n = 15;
    CHECK(cmd_simulate(odd) == kExitConfig);

    auto bad_shape = circle_config("bad_shape");
    bad_shape.shape = "support:c0=1,a2=0.5";
    CHECK(cmd_simulate(bad_shape) == kExitNumerical);
    const auto summary = io::read_json(bad_shape.out_dir / "summary.json");
    CHECK(summary["error"] == "NotConvex");
    CHECK(summary["stop_reason"] == "error");

    auto garbled = circle_config("garbled");
    garbled.shape = "triangle";
    CHECK(cmd_simulate(garbled) == kExitConfig);

    auto none = circle_config("none");
    none.count = 0;
    CHECK(cmd_inequalities(none) == kExitConfig);
}

TEST_CASE("verify a circle") {
    auto cfg = circle_config("verify_circle");
    cfg.p = 2.0;
    CHECK(cmd_verify(cfg) == kExitOk);
    const auto doc = io::read_json(cfg.out_dir / "verdicts.json");
    for (const auto& v : doc["verdicts"]) {
        CHECK(v["pass"].get<bool>());
        const std::string id = v["claim_id"];
        if (id.rfind("derivative_decay", 0) == 0) CHECK(v["below_floor"].get<bool>());
    }
    const auto ledger = io::read_ledger_csv(cfg.out_dir / "ledger.csv");
    CHECK(ledger.grid_size == 256);
    CHECK(ledger.l_max == cfg.l_max);
}

TEST_CASE("ledger round trip") {
    NormLedger ledger;
    ledger.l_max = 1;
    ledger.grid_size = 64;
    ledger.rows = {{0.0, 0, 2.0, 1.5}, {0.0, 0, kInf, 1.0}, {0.5, 1, 4.0, 0.1}, {0.5, 1, kInf, 0.3}};
    const auto dir = scratch("ledger");
    fs::create_directories(dir);
    io::write_ledger_csv(dir / "ledger.csv", ledger);
    const auto back = io::read_ledger_csv(dir / "ledger.csv");
    CHECK(back.grid_size == 64);
    REQUIRE(back.rows.size() == ledger.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
        CHECK(back.rows[i].time == ledger.rows[i].time);
        CHECK(back.rows[i].l == ledger.rows[i].l);
        CHECK(back.rows[i].q == ledger.rows[i].q);
        CHECK(back.rows[i].value == ledger.rows[i].value);
    }
}

TEST_CASE("property: identical configs give byte-identical outputs") {
    auto a = circle_config("det_a");
    auto b = circle_config("det_b");
    a.shape = b.shape = "ellipse:a=1,b=0.8";
    a.k_stop_factor = b.k_stop_factor = 5.0;
    CHECK(cmd_simulate(a) == kExitOk);
    CHECK(cmd_simulate(b) == kExitOk);
    for (const char* file : {"snapshots.csv", "diagnostics.ndjson", "summary.json"}) {
        CAPTURE(file);
        CHECK(slurp(a.out_dir / file) == slurp(b.out_dir / file));
    }

    CHECK(cmd_inequalities(a) == kExitOk);
    CHECK(cmd_inequalities(b) == kExitOk);
    CHECK(slurp(a.out_dir / "inequalities.json") == slurp(b.out_dir / "inequalities.json"));
}

TEST_CASE("sweep writes one directory per exponent") {
    auto cfg = circle_config("sweep");
    CHECK(run_sweep(cfg, {1.0, 2.0}, cmd_simulate) == kExitOk);
    CHECK(fs::exists(cfg.out_dir / "p_1" / "summary.json"));
    CHECK(fs::exists(cfg.out_dir / "p_2" / "summary.json"));
    const auto s2 = io::read_json(cfg.out_dir / "p_2" / "summary.json");
    CHECK(s2["omega_hat"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}
