#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "ulch/norms.hpp"
#include "ulch/solver.hpp"
#include "ulch/weights.hpp"

namespace ulch {

struct DiagnosticsConfig {
    WeightKind weight_kind = WeightKind::polynomial;
    double gamma = 0.0;  // <= 0 picks 5 (regular) or 3 + 2/(2 kappa - 1) (singular)
    EpsilonSchedule schedule = EpsilonSchedule::constant_eps(0.25);
    std::vector<std::array<double, 3>> centers = {{0.0, 0.0, 0.0}};
    double R = 1.0;
    int stride = 0;      // <= 0: max(1, N/64)
    int cadence = 10;
    double window = 1.0; // trailing window for the space-time norm

    double resolve_gamma(const PotentialSpec& p) const;
};

// Everything tracked per record. Norm fields follow the CSV column names:
// W12b(u), L1b(F(u)), Phib(u), STL2b(grad_mu), Wm12b(dt_u), E_phi[c].
struct DiagnosticsRecord {
    double t = 0.0;
    double w12b_u = 0.0;            // ||u||_{W^{1,2}_b}
    double l1b_F = 0.0;             // ||F(u)||_{L^1_b}
    double phib = 0.0;              // w12b_u^2 + l1b_F
    double stl2b_grad_mu = 0.0;     // ||grad mu|| over the trailing window
    double stl2b_grad_mu_cum = 0.0; // ... over [0, t]
    std::vector<double> E_phi;            // weighted energies, per center
    std::vector<double> grad_mu_l2phi2;   // (|grad mu|^2, phi_eps), per center
    double wm12b_dtu = 0.0;         // ||dt u||_{W^{-1,2}_b} via dt u = Lap mu - lambda u
    double mean_u = 0.0;
    double max_abs_u = 0.0;
    double separation = 0.0;        // 1 - max|u|
    double eps_t = 0.0;
    double energy_box = 0.0;
    double dt = 0.0;
    double s = 0.0;
};

struct DiagnosticsSeries {
    std::vector<DiagnosticsRecord> records;
    double g_l6b = 0.0;
    double g_l2b = 0.0;
    double u0_phib = 0.0;
    double lambda = 0.0;
    double kappa = 0.0;  // 0 for regular potentials
    std::size_t n_centers = 1;
};

// Pure function of (state, config, schedule); feeding identical snapshots
// reproduces records bitwise.
class Recorder {
  public:
    Recorder(const SimConfig& sim, DiagnosticsConfig diag);
    void operator()(const SimState& state);
    const DiagnosticsSeries& series() const { return series_; }
    DiagnosticsSeries& series() { return series_; }
    const DiagnosticsConfig& config() const { return diag_; }

  private:
    const SimConfig& sim_;
    DiagnosticsConfig diag_;
    DiagnosticsSeries series_;
    std::vector<double> cum_;                       // running [0,t] window integrals
    std::deque<std::pair<double, std::vector<double>>> ring_;  // (t, window integrals)
    std::vector<double> prev_A_;
    double prev_t_ = 0.0;
    bool have_prev_ = false;
};

struct RunOutput {
    SimState final_state;
    DiagnosticsSeries series;
    std::vector<std::pair<double, double>> energy_log;  // (t, box energy) per step
};
RunOutput run_with_diagnostics(const SimConfig& sim, const DiagnosticsConfig& diag,
                               bool energy_every_step = false);

// Envelope fit of one of the a priori bounds along a trajectory. `pass` means
// LHS(t_i) <= RHS(t_i) for every record with the reported constants; the
// margin is min(RHS - LHS) as stored.
struct BoundFit {
    std::string bound_id;
    bool pass = false;
    double margin = 0.0;
    double slope = 0.0;
    std::vector<std::pair<std::string, double>> constants;
    std::string note;
    double constant(const std::string& name, double fallback = 0.0) const;
};

// Polynomial-growth bound: Phib(t) + cumulative grad-mu term against
// C (1+t^4) (1 + g^2 + u0)^{5/2}; envelope slope must stay <= 4 + 0.5.
BoundFit fit_growth_bound(const DiagnosticsSeries& s);

// Dissipative bound: Phib(t) + forward-window grad-mu term against
// A + B e^{-sigma t}. Multi-run variant checks the long-time level A agrees
// within a factor 2 across runs (FitError if fewer than two runs).
BoundFit fit_dissipative_single(const DiagnosticsSeries& s, const std::string& bound_id);
BoundFit fit_dissipative_bound(const std::vector<const DiagnosticsSeries*>& runs);

// Singular-potential growth bound with exponents 3k+1 and 3k-1/2 (plain CH)
// or the dissipative envelope (Oono variant).
BoundFit fit_singular_bound(const DiagnosticsSeries& s, bool oono);

// Discrete residual of the weighted energy inequality: centered dE/dt
// (+ lambda/2 E for lambda > 0) + beta (|grad mu|^2, phi) against
// C (eps^2 E + eps^p E^q + eps^-3 (g^2+1)) with (p,q) = (5,2) regular and
// (6k-1, 2k) singular. Constants fitted on a log lattice.
BoundFit fit_energy_inequality(const DiagnosticsSeries& s);

// Pointwise-in-time residuals of the two lemma inequalities.
struct InequalityReport {
    double lhs_f6 = 0.0;         // (phi^3, |f(u)|^6)
    double grad_phimu_sq = 0.0;  // ||grad(phi^(1/2) mu)||_L2^2
    double rhs_f6 = 0.0;         // grad term cubed + eps^-3 (1 + g^6)
    double ratio_f6 = 0.0;
    double lhs_h2 = 0.0;         // (phi, |D^2 u|^2)
    double rhs_h2 = 0.0;         // (phi, |grad mu|^2 + |grad u|^2 + |g|^2)
    double ratio_h2 = 0.0;
};
InequalityReport inequality_residuals(const SimState& state, const SimConfig& cfg,
                                      const WeightFn& w);

// Two-solution experiment: evolves u1 and u2 = u1 + delta0 * noise in
// lockstep, records the W^{-1,2}_b distance, the averaged derivative
// coefficient l(t) (8-point Gauss quadrature in s) and its L^1_b norm.
// AssumptionError if the uniqueness hypotheses fail.
struct StabilityRecord {
    double t = 0.0;
    double v_wm12b = 0.0;
    double l_l1b = 0.0;
    double F1_l1b = 0.0;
    double F2_l1b = 0.0;
    double mean_v = 0.0;
};
struct StabilityResult {
    std::vector<StabilityRecord> records;
    BoundFit lipschitz;   // bound id 1.2: ||v(t)|| <= C_T ||v(0)||
    BoundFit l_bound;     // ||l||_{L1b} <= C(||F(u1)|| + ||F(u2)|| + 1)
    double gronwall_c = 0.0;
    double v_final = 0.0;
    double v_initial = 0.0;
};
StabilityResult stability_experiment(const SimConfig& cfg, const DiagnosticsConfig& diag,
                                     double delta0, std::uint64_t perturbation_seed);

// Smoothing experiment (lambda > 0): records ||dt u||_{W^{-1,2}_b} densely on
// (0, 1], fits the t^{-1/2} envelope and the early log-log slope, and the
// dissipative envelope for t >= 1.
struct SmoothingResult {
    std::vector<std::pair<double, double>> records;  // (t, ||dt u||)
    double slope_early = 0.0;
    BoundFit envelope;   // 3.dtsm on (t_min, 1]
    BoundFit late;       // dtdis for t >= 1
    double level_late = 0.0;
};
SmoothingResult smoothing_experiment(const SimConfig& cfg, const DiagnosticsConfig& diag,
                                     double t_min);

}  // namespace ulch
