#pragma once

#include <cstdint>
#include <vector>

#include "ulch/grid.hpp"
#include "ulch/norms.hpp"
#include "ulch/potentials.hpp"
#include "ulch/weights.hpp"

namespace ulch {

// Small-scale reference computations for the test suite. Everything here is
// deliberately naive and shares no code with the primary paths: direct
// summation DFTs, explicit finite differences, per-center window loops.
namespace oracle {

// Explicit forward-Euler finite-difference integration of
//   du/dt = Lap_fd(-Lap_fd u + f(u) + g) - lambda u
// with second-order centered stencils. Guards: N <= 128 (d=1), N <= 32
// (d=2), N <= 16 (d=3); dt_e <= c_stab * h^4 (StabilityError otherwise).
struct OracleConfig {
    PotentialSpec potential;
    double lambda = 0.0;
    double dt_e = 0.0;       // <= 0 picks 0.05 h^4 / d^2
    double c_stab = 0.1;
};
Field fd_run(const OracleConfig& cfg, const Field& u0, const Field& g, double t_end);

// Naive second-order periodic FD Laplacian (exposed for stencil tests).
Field fd_laplacian(const Field& f);

// Direct-summation separable DFT implementations of the spectral operators.
Field brute_gradient(const Field& f, int axis);
Field brute_helmholtz_inverse(const Field& f);

// Norm references: direct sums, exhaustive centers (stride as given).
double brute_lp_weighted(const Field& f, const WeightFn& w, double p);
double brute_lp_uniformly_local(const Field& f, double p, double R, int stride = 1);
double brute_w12b(const Field& f, double R, int stride = 1);
double brute_wm12b(const Field& f, double R, int stride = 1);
double brute_spacetime_ul(const std::vector<Field>& series, double dt_snap, double window,
                          double R, int stride = 1);

}  // namespace oracle
}  // namespace ulch
