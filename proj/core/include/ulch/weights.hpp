#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ulch/errors.hpp"
#include "ulch/grid.hpp"

namespace ulch {

enum class WeightKind { polynomial, exponential };

// Localization weight centered at x0:
//   polynomial:  (1 + |eps (x - x0)|^2)^(-gamma/2)
//   exponential: exp(-sqrt(|eps (x - x0)|^2 + 1))
// On a periodic grid the displacement x - x0 is taken per-axis in the minimal
// image, so fields of shifted weights are grid translates of each other.
struct WeightFn {
    WeightKind kind = WeightKind::polynomial;
    double gamma = 5.0;
    double eps = 1.0;
    std::array<double, 3> center = {0.0, 0.0, 0.0};

    double operator()(const std::array<double, 3>& x, int dim) const;
    // Closed-form first derivatives and second-derivative Frobenius norm.
    std::array<double, 3> grad(const std::array<double, 3>& x, int dim) const;
    double hessian_norm(const std::array<double, 3>& x, int dim) const;
};

double eval_weight(const WeightFn& w, const std::array<double, 3>& x, int dim);
Field weight_field(const WeightFn& w, const GridSpec& g);
// Field of w raised to a power, evaluated with minimal-image displacement.
Field weight_field_pow(const WeightFn& w, const GridSpec& g, double power);
// Analytic d(phi)/dx_axis on the grid (minimal-image displacement).
Field weight_field_grad(const WeightFn& w, const GridSpec& g, int axis);

// Randomized estimate of the growth-rate axiom phi(x+y) <= C e^{nu|x|} phi(y)
// over a sampled (x, y) cloud, per epsilon. Also checks the matching lower
// bound phi(x+y) >= C^{-1} e^{-nu|x|} phi(y) with the same constant.
struct WeightAxiomReport {
    double nu = 1.0;
    std::vector<double> eps_values;
    std::vector<double> C_upper;       // per eps
    bool lower_bound_ok = true;        // with C = max over eps of C_upper
    double uniformity_factor = 1.0;    // max C / min C across eps
};
WeightAxiomReport verify_weight_axiom(WeightKind kind, double gamma, double nu,
                                      const std::vector<double>& eps_values, int dim,
                                      int n_samples, double box_radius, std::uint64_t seed);

// Max over a sample cloud of |D^N phi| / (eps^N phi^(1+N/gamma)) (polynomial)
// or |D^N phi| / (eps^N phi) (exponential), N in {1, 2}, per eps.
struct DerivativeBoundReport {
    int order = 1;
    std::vector<double> eps_values;
    std::vector<double> ratio_max;     // per eps
    double uniformity_factor = 1.0;
};
DerivativeBoundReport verify_derivative_bound(WeightKind kind, double gamma, int order,
                                              const std::vector<double>& eps_values, int dim,
                                              int n_samples, double box_radius,
                                              std::uint64_t seed);

// Quadrature of the weight over the box of the given grid. Requires
// gamma > dim for the polynomial kind (ValidationError otherwise).
double weight_l1(const WeightFn& w, const GridSpec& g);

// Log-log slope of ||phi_eps||_L1 against eps, each quadrature taken on a box
// scaled so that eps * L is constant (box_factor / eps half-length, n points
// per axis). Expected slope: -dim.
double l1_scaling_exponent(WeightKind kind, double gamma, int dim,
                           const std::vector<double>& eps_values, double box_factor = 10.0,
                           int points_per_axis = 64);

enum class ScheduleKind {
    constant,
    fixed_horizon_regular,    // eps = 1 / (2(T+1) sqrt(C (1 + g^2 + u0)))
    fixed_horizon_singular,   // eps = 1 / ([2(T+1)]^kappa [C (1 + g^2 + u0)]^(kappa-1/2))
    dissipative               // eps(t) = eps0 sqrt( (lambda/4) / (4Cg/lambda + V0 e^(-sigma t)) )
};

struct EpsilonSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double eps0 = 0.25;       // constant value / dissipative prefactor
    double horizon_T = 1.0;   // fixed-horizon kinds
    double C = 1.0;           // generic a-priori constant (input, not derived)
    double g_norm = 0.0;      // ||g||_{L^6_b}
    double u0_norm = 0.0;     // ||u0||_{Phi_b}
    double kappa = 1.0;       // fixed_horizon_singular
    double lambda = 1.0;      // dissipative
    double C_g = 1.0;
    double V0 = 0.0;
    double sigma = 0.2;

    static EpsilonSchedule constant_eps(double eps);
    static EpsilonSchedule fixed_horizon(double T, double C, double g_norm, double u0_norm);
    static EpsilonSchedule fixed_horizon_sing(double T, double C, double g_norm,
                                              double u0_norm, double kappa);
    static EpsilonSchedule dissipative_eps(double eps0, double lambda, double C_g, double V0,
                                           double sigma);
};

double eval_schedule(const EpsilonSchedule& s, double t);
double schedule_derivative(const EpsilonSchedule& s, double t);  // closed-form eps'(t)

// Checks 5|eps'|/eps <= lambda/2 and eps^2 (4Cg/lambda + V0 e^(-sigma t)) <=
// lambda/4 on a uniform time grid (dissipative kind; other kinds only check
// positivity). Throws ScheduleError naming the violating t.
struct ScheduleReport {
    double max_log_derivative_ratio = 0.0;  // max of 5|eps'|/eps
    double max_smallness = 0.0;             // max of eps^2 (4Cg/lambda + V0 e^(-sigma t))
    double eps_limit_ratio = 1.0;           // eps(inf)/eps(0), closed form
    bool ok = true;
};
ScheduleReport verify_schedule(const EpsilonSchedule& s, double t_max = 50.0, int n = 2001);

}  // namespace ulch
