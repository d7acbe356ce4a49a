#include "fermiwalk/io/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"fermiwalk: free fermions on a walk coupled to a quasi-free reservoir"};
    app.require_subcommand(1, 1);

    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    for (const std::string& name : fermiwalk::io::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "experiment config (JSON)")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "master seed, overrides options.seed");
        sub->add_option("--threads", threads, "worker threads (default: FERMIWALK_THREADS, else 1)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    fermiwalk::io::RunRequest req;
    req.command = app.get_subcommands().front()->get_name();
    req.config_path = config;
    req.out = out;
    req.seed = seed;
    try {
        req.threads = fermiwalk::io::resolve_threads(threads);
    } catch (const fermiwalk::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    return fermiwalk::io::run(req, std::cerr);
}
