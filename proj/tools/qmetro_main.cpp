#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qmetro/experiment.hpp"
#include "qmetro/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"time-dependent quantum metrology simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_override;
    auto* run_cmd = app.add_subcommand("run", "run an experiment from a JSON config");
    run_cmd->add_option("-c,--config", config_path, "config file (see `qmetro schema`)")
        ->required();
    run_cmd->add_option("-o,--output", output_override, "override the config's output path");

    auto* verify_cmd =
        app.add_subcommand("verify", "run the acceptance suite, one line per criterion");
    auto* schema_cmd = app.add_subcommand("schema", "print the config schema");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            qmetro::experiment::ExperimentConfig cfg =
                qmetro::experiment::load_config(config_path);
            if (!output_override.empty()) cfg.output = output_override;
            qmetro::experiment::run(cfg);
            std::cerr << "wrote " << cfg.output << "\n";
            return 0;
        }
        if (verify_cmd->parsed()) {
            const auto report = qmetro::verify::run_all(std::cout);
            return report.all_passed ? 0 : 1;
        }
        if (schema_cmd->parsed()) {
            std::cout << qmetro::experiment::schema();
            return 0;
        }
    } catch (const qmetro::ConfigError& e) {
        std::cerr << "{\"error\":\"config\",\"message\":\"" << e.what() << "\"}\n";
        return 2;
    } catch (const qmetro::Error& e) {
        std::cerr << "{\"error\":\"numerical\",\"message\":\"" << e.what() << "\"}\n";
        return 3;
    }
    return 0;
}
