#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "ulch/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ulch: Cahn-Hilliard / Cahn-Hilliard-Oono simulator with a "
                 "uniformly-local diagnostics harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file");
        cmd->add_option("--set", overrides, "override key=value (repeatable)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the run seed")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto make_invocation = [&]() {
        ulch::RunInvocation inv;
        inv.config_path = config_path;
        inv.overrides = overrides;
        inv.out_dir = out_dir;
        if (seed_set) inv.seed = seed;
        return inv;
    };

    auto* run = app.add_subcommand("run", "integrate a configured simulation");
    add_common(run);

    auto* verify = app.add_subcommand("verify", "run a randomized verifier suite");
    std::string suite = "weights";
    std::string report_path;
    double gamma = 5.0;
    std::uint64_t vseed = 7;
    verify->add_option("suite", suite, "weights | norms | inequalities")->required();
    verify->add_option("--seed", vseed, "verifier seed");
    verify->add_option("--out", report_path, "JSON report path");
    verify->add_option("--gamma", gamma, "weight exponent under test");

    auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
    add_common(sweep);
    std::vector<std::string> axes;
    int jobs = 1;
    sweep->add_option("--axis", axes, "axis spec key=v1,v2,... (repeatable)");
    sweep->add_option("--jobs", jobs, "concurrent runs");

    auto* stability = app.add_subcommand("stability", "two-solution stability experiment");
    add_common(stability);
    std::vector<double> deltas = {1e-4, 5e-5};
    stability->add_option("--delta", deltas, "perturbation amplitudes");

    auto* smoothing = app.add_subcommand("smoothing", "time-derivative smoothing experiment");
    add_common(smoothing);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return ulch::cmd_run(make_invocation());
    if (verify->parsed()) return ulch::cmd_verify(suite, vseed, report_path, gamma);
    if (sweep->parsed()) return ulch::cmd_sweep(make_invocation(), axes, jobs);
    if (stability->parsed()) return ulch::cmd_stability(make_invocation(), deltas);
    if (smoothing->parsed()) return ulch::cmd_smoothing(make_invocation());
    return 0;
}
