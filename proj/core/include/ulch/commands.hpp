#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ulch {

// Command-layer entry points shared by the CLI binary and the test suite.
// Exit codes: 0 success, 1 failed verification, 2 solver error, 3 validation
// or configuration error.

struct RunInvocation {
    std::string config_path;                 // empty: config_text is used
    std::string config_text;
    std::vector<std::string> overrides;      // key=value
    std::optional<std::uint64_t> seed;       // overrides solver.seed
    std::string out_dir;                     // overrides output.dir
};

int cmd_run(const RunInvocation& inv);

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path,
               double weight_gamma = 5.0);

// axes: "section.key=v1,v2,..."; cartesian product of all axes.
int cmd_sweep(const RunInvocation& base, const std::vector<std::string>& axes, int jobs);

int cmd_stability(const RunInvocation& base, const std::vector<double>& deltas);

int cmd_smoothing(const RunInvocation& base);

}  // namespace ulch
