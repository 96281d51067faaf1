#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ulch/grid.hpp"
#include "ulch/potentials.hpp"

namespace ulch {

// Initial data: seeded uniform noise, a Gaussian bump, band-limited spectral
// noise with power-law decay (rough data for smoothing experiments), or a
// snapshot file.
enum class ICKind { random_uniform, bump, rough_spectral, file };

struct InitialCondition {
    ICKind kind = ICKind::random_uniform;
    double amplitude = -1.0;      // < 0 picks 0.5 (regular) or 0.9(1 - delta_min) (singular)
    double width = 1.0;           // bump width
    double rough_exponent = 2.0;  // spectral decay (1+|k|^2)^(-a/2)
    double mean = 0.0;            // additive offset (not applied to file data)
    std::string path;             // snapshot file
};

struct SimConfig {
    GridSpec grid{1, 64, 3.141592653589793};
    PotentialSpec potential;
    double lambda = 0.0;          // 0 selects plain CH, > 0 the Oono variant
    Field g{GridSpec{1, 64, 3.141592653589793}, 0.0};
    double dt = 1e-3;
    double t_end = 1.0;
    double stabilization = -1.0;  // < 0: auto s = max(2, running max f'(u))
    double delta_min = 0.05;      // singular safeguard margin
    double dt_min = 1e-9;
    std::uint64_t seed = 1;
    InitialCondition ic;
    int dealias = -1;             // -1 auto (degree > 3 or singular), 0 off, 1 on

    bool dealias_enabled() const;
    double ic_amplitude() const;
};

struct SimState {
    SimState(double t_, Field u_) : t(t_), u(std::move(u_)) {}
    double t = 0.0;
    Field u;
    long long step_count = 0;
    double dt_current = 0.0;
    double s_current = 2.0;        // stabilization shift in effect
    double fprime_peak = 0.0;      // running max of f'(u) over the trajectory
    mutable std::optional<Field> mu_cache;
    mutable long long mu_step = -1;
};

// mu = -Lap u + f(u) + g. DomainError if a singular nonlinearity sees
// max|u| >= 1.
Field compute_mu(const Field& u, const SimConfig& cfg);
// Cached chemical potential consistent with state.u.
const Field& state_mu(const SimState& state, const SimConfig& cfg);

Field build_initial_condition(const SimConfig& cfg);

// One semi-implicit IMEX step:
//   (1 + dt(k^4 + s k^2 + lambda)) u_hat' = u_hat - dt k^2 FT[f(u) - s u + g].
// Biharmonic, stabilization and lambda are implicit (diagonal in Fourier
// space); the shifted nonlinearity is explicit. Singular safeguard: a step
// with max|u'| > 1 - delta_min is rejected and dt halved (SafeguardError once
// dt < dt_min). StepError on non-finite values.
SimState step(SimState state, const SimConfig& cfg);

// Free energy of the state over the box: sum (F(u) + |grad u|^2/2 + g u) h^d.
double box_energy(const Field& u, const SimConfig& cfg);

struct RunProbes {
    int cadence = 10;                                   // records every n steps
    std::function<void(const SimState&)> on_record;     // t=0, cadence hits, final
    std::function<void(const SimState&)> on_step;       // every accepted step
    bool track_energy = false;
    std::vector<std::pair<double, double>>* energy_log = nullptr;  // (t, E)
};

// Validates the potential assumptions, builds u0, and advances to t_end,
// invoking the probes. Deterministic for a fixed config and seed.
SimState run(const SimConfig& cfg, const RunProbes& probes = {});

}  // namespace ulch
