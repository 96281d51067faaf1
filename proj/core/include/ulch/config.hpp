#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulch/diagnostics.hpp"
#include "ulch/solver.hpp"

namespace ulch {

// Plain `key = value` run configuration with [section] headers and '#'
// comments. Keys are stored section-qualified ("solver.dt"). Unknown keys are
// rejected at resolution time.
struct RunConfigFile {
    std::vector<std::pair<std::string, std::string>> entries;

    static RunConfigFile parse_file(const std::string& path);
    static RunConfigFile parse_string(const std::string& text);

    // "key=value" or "section.key=value"; bare keys are resolved against the
    // known-key table when unambiguous.
    void apply_override(const std::string& assignment);

    std::optional<std::string> get(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
};

enum class ForcingKind { zero, sine, bump, file };

struct ForcingSpec {
    ForcingKind kind = ForcingKind::zero;
    double amplitude = 0.0;
    int mode = 1;        // sine wavenumber index per axis
    double width = 1.0;  // bump width
    std::string path;
};

Field build_forcing(const ForcingSpec& spec, const GridSpec& g);

// Everything needed to execute a run, with defaults applied. The epsilon
// schedule may still be "auto": it is finalized against the realized data
// norms by finalize_schedule.
struct ResolvedConfig {
    SimConfig sim;
    DiagnosticsConfig diag;
    ForcingSpec forcing;
    std::string schedule_kind = "auto";  // auto|constant|fixed-horizon-regular|...
    double schedule_eps0 = 0.25;
    double schedule_C = 1.0;
    double schedule_sigma = -1.0;        // < 0: lambda/5
    std::string out_dir = "out";
    int snapshot_every = 0;              // 0 disables snapshots
    int energy_every_step = -1;          // -1 auto (d <= 2), 0 off, 1 on
    std::vector<std::pair<std::string, std::string>> resolved_entries;

    bool energy_tracking() const {
        return energy_every_step == 1 || (energy_every_step == -1 && sim.grid.dim <= 2);
    }
};

// Validates and applies defaults; throws ConfigError (unknown key, bad value,
// missing potential) or ValidationError (inconsistent physics).
ResolvedConfig resolve_config(const RunConfigFile& file);

// Chooses the epsilon schedule from the resolved options and the realized
// norms of g and u0.
EpsilonSchedule finalize_schedule(const ResolvedConfig& rc, double g_l6b, double u0_phib);

}  // namespace ulch
