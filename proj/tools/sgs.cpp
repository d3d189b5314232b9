#include <iostream>

#include <CLI11.hpp>

#include "sgs/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Soliton guidance simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool overwrite = false;

    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    run->add_flag("--overwrite", overwrite, "Replace an existing non-empty output directory");

    auto* check = app.add_subcommand("validate", "Check a config file without running it");
    check->add_option("config", config_path, "Config file")->required();

    app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("version")) {
            std::cout << "sgs " << sgs::cli::kVersion << "\n";
            return 0;
        }
        const auto cfg = sgs::cli::Config::load(config_path);
        if (app.got_subcommand("validate")) {
            sgs::cli::validate(cfg);
            std::cout << "ok: " << cfg.experiment() << "\n";
            for (const auto& [key, value] : cfg.resolved()) std::cout << "  " << key << " = " << value << "\n";
            return 0;
        }
        const auto report = sgs::cli::run(cfg, out_dir, overwrite);
        std::cout << report.output_dir.string() << "\n";
        for (const auto& p : report.products) std::cout << "  " << p.path << " (" << p.bytes << " bytes)\n";
        return 0;
    } catch (const sgs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sgs::cli::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
