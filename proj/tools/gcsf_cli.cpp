#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcsf/error.hpp"
#include "gcsf/pipeline.hpp"

namespace {

// Flag names mirror RunConfig fields in kebab-case.
const char* const kSettings[] = {
    "p",     "shape",     "n",       "sigma", "k-stop-factor", "snapshot-stride",
    "l-max", "slope-tol", "out-dir", "seed",  "count",         "alpha",
};

struct Invocation {
    std::string config_file;
    std::map<std::string, std::string> flags;
    std::vector<double> sweep_p;
};

void add_run_options(CLI::App* sub, Invocation& inv) {
    sub->add_option("--config", inv.config_file, "key=value config file");
    for (const char* name : kSettings) {
        sub->add_option_function<std::string>(
            std::string("--") + name,
            [&inv, name](const std::string& v) { inv.flags[name] = v; },
            std::string("override ") + name);
    }
    sub->add_option("--sweep-p", inv.sweep_p, "run one job per exponent, concurrently")
        ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-law curve shortening flow: blow-up simulation and rate verification"};
    app.require_subcommand(1);

    Invocation inv;
    auto* simulate = app.add_subcommand("simulate", "integrate to blow-up and write snapshots");
    auto* verify = app.add_subcommand("verify", "simulate, rescale and run the verdict battery");
    auto* inequalities =
        app.add_subcommand("inequalities", "check Young/Wirtinger/Sobolev on random fields");
    for (auto* sub : {simulate, verify, inequalities}) add_run_options(sub, inv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return gcsf::kExitConfig;
    }

    gcsf::RunConfig cfg;
    try {
        if (!inv.config_file.empty()) gcsf::apply_config_file(cfg, inv.config_file);
        for (const auto& [key, value] : inv.flags) gcsf::apply_setting(cfg, key, value);
        gcsf::apply_environment(cfg);
    } catch (const gcsf::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return gcsf::kExitConfig;
    }

    int (*command)(const gcsf::RunConfig&) = nullptr;
    if (*simulate) command = gcsf::cmd_simulate;
    if (*verify) command = gcsf::cmd_verify;
    if (*inequalities) command = gcsf::cmd_inequalities;

    if (!inv.sweep_p.empty()) return gcsf::run_sweep(cfg, inv.sweep_p, command);
    return command(cfg);
}
