#include "hetsnn/runner.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous recurrent spiking network experiments"};
    app.require_subcommand(1);

    hetsnn::CommandArgs args;
    std::uint64_t seed = 0;
    std::string out, snapshot, task;
    const std::vector<std::string> tasks{"lorenz63", "lorenz96", "rossler", "synth-class"};

    for (const char* name : {"build", "train", "prune", "evaluate", "bo"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config, "INI experiment config")->required();
        sub->add_option("--seed", seed, "Overrides the config seed");
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--snapshot", snapshot, "Model snapshot (JSON)");
        sub->add_option("--task", task, "Task")->check(CLI::IsMember(tasks));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    args.command = sub->get_name();
    if (sub->count("--seed")) args.seed = seed;
    if (sub->count("--out")) args.out = out;
    if (sub->count("--snapshot")) args.snapshot = snapshot;
    if (sub->count("--task")) args.task = task;
    return hetsnn::run_command(args);
}
