#include <string>

#include "CLI11.hpp"
#include "sdot/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"semi-discrete optimal transport experiments"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    run->add_option("--threads", threads, "worker threads for the k-list");

    CLI11_PARSE(app, argc, argv);
    return sdot::run_experiment(config_path, out_dir, threads);
}
