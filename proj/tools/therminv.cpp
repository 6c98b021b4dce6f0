// therminv: estimates climatic-chamber surface heat-transfer coefficients by
// Bayesian inversion of a lumped heat-conduction model, with a 2D reference
// model for error modeling and validation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "therminv/config.hpp"
#include "therminv/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian estimation of surface heat-transfer coefficients"};
    app.require_subcommand(1);

    therminv::commands::CommonArgs common;
    std::string model = "lumped";
    std::string params_file, data_dir, aem_file, out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd, bool needs_out = true) {
        cmd->add_option("--config", common.config, "configuration file (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        if (needs_out) cmd->add_option("--out", out_dir, "output directory");
        cmd->add_flag("--strict", common.strict,
                      "escalate consistency-guard warnings to errors");
    };
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "random seed (overrides the configuration)")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* sim = app.add_subcommand("simulate", "run one forward model and export the field");
    add_common(sim);
    sim->add_option("--model", model, "lumped | complete")->required();
    sim->add_option("--params", params_file, "parameter file (JSON: h_t, R_l, h_l)")
        ->check(CLI::ExistingFile);

    auto* sens = app.add_subcommand("sensitivity",
                                    "sensitivity fields, Fisher matrix and correlations");
    add_common(sens);

    auto* aem = app.add_subcommand("aem", "build the approximation error model");
    add_common(aem);
    add_seed(aem);

    auto* synth = app.add_subcommand("synth", "synthesize observation repeats from the 2D model");
    add_common(synth);
    synth->add_option("--params", params_file, "truth parameters (JSON: h_t, R_l, h_l)")
        ->check(CLI::ExistingFile);
    add_seed(synth);

    auto* est = app.add_subcommand("estimate", "run the MCMC estimation on observation data");
    add_common(est);
    est->add_option("--data", data_dir, "directory with sensors.csv and repeat_*.csv")
        ->required()
        ->check(CLI::ExistingDirectory);
    est->add_option("--aem", aem_file, "AEM artifact CSV")->check(CLI::ExistingFile);
    add_seed(est);

    auto* val = app.add_subcommand("validate", "compare lumped vs complete model and report");
    add_common(val);
    val->add_option("--params", params_file, "parameter file (JSON: h_t, R_l, h_l)")
        ->check(CLI::ExistingFile);

    auto* init = app.add_subcommand("init-config", "write the default configuration");
    std::string init_path = "therminv.json";
    init->add_option("path", init_path, "destination file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    common.out_dir = out_dir;
    using namespace therminv::commands;
    if (sim->parsed()) return simulate(common, model, params_file);
    if (sens->parsed()) return sensitivity(common);
    if (aem->parsed()) return therminv::commands::aem(common, seed, seed_given);
    if (synth->parsed()) return therminv::commands::synth(common, params_file, seed, seed_given);
    if (est->parsed()) return estimate(common, data_dir, aem_file, seed, seed_given);
    if (val->parsed()) return validate(common, params_file);
    if (init->parsed()) {
        std::ofstream out(init_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << init_path << "\n";
            return 2;
        }
        out << therminv::default_config_json();
        return 0;
    }
    return 2;
}
