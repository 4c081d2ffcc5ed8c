#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "trap/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"TRAP: transferable and robust adversarial perturbation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;

    std::vector<CLI::App*> subs;
    for (const char* name : {"train", "attack", "eval", "sweep", "report", "all"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--out", out, "override the report/output directory");
        subs.push_back(sub);
    }
    subs[0]->description("train the configured models and write checkpoints");
    subs[1]->description("run the configured attack and write an adversarial batch");
    subs[2]->description("evaluate an adversarial batch against the target models");
    subs[3]->description("sweep one axis (layer, T, preset, beta, p)");
    subs[4]->description("write the manifest and optional SVG plots");
    subs[5]->description("train, attack, eval and report in one go");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = trap::config::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.report.dir = *out;
        trap::runner::run_command(cfg, app.get_subcommands().front()->get_name());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
