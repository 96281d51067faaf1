#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulch/errors.hpp"

namespace ulch {

enum class PotentialKind { regular_polynomial, singular_power };

// Sampling window used by the validators. The reported constants are certified
// on this grid only, not symbolically.
struct UGrid {
    double lo = -10.0;
    double hi = 10.0;
    int n = 20001;
    double at(int i) const { return lo + (hi - lo) * i / (n - 1); }
};

// Nonlinearity f with antiderivative F (F(0) = 0).
//
// regular_polynomial: f is an odd-degree polynomial given by ascending
//   coefficients, split as f = f0 + psi with psi(u) = -a*tanh(b*u) so that
//   f0' stays >= 1 on the validation window. (a, b) may be supplied or found
//   by a small search.
//
// singular_power: f(u) = u/(1-u^2)^l - alpha*u on (-1, 1), l > 1, alpha >= 0,
//   with growth index kappa = 1 + 1/(l-1).
struct PotentialSpec {
    PotentialKind kind = PotentialKind::regular_polynomial;
    std::vector<double> coeffs;   // ascending powers (regular)
    double psi_a = 0.0;
    double psi_b = 0.0;
    double l = 0.0;               // singular exponent
    double alpha = 0.0;           // singular linear coefficient

    int degree() const;           // polynomial degree (regular), -1 otherwise
    double kappa() const;         // 1 + 1/(l-1); ValidationError if l <= 1

    static PotentialSpec regular(std::vector<double> coeffs,
                                 std::optional<std::pair<double, double>> psi = std::nullopt,
                                 const UGrid& grid = UGrid{});
    static PotentialSpec singular(double l, double alpha = 0.0);
};

double eval_f(const PotentialSpec& p, double u);
double eval_fprime(const PotentialSpec& p, double u);
double eval_F(const PotentialSpec& p, double u);
double eval_psi(const PotentialSpec& p, double u);
double eval_psi_prime(const PotentialSpec& p, double u);
double eval_f0(const PotentialSpec& p, double u);
double eval_f0_prime(const PotentialSpec& p, double u);

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    double witness_u = 0.0;   // where the worst ratio / violation occurred
    std::string detail;
};

// Constants reported are maxima of the defining ratios over the validation
// grid, hence certified lower bounds for any admissible constant.
struct AssumptionReport {
    bool pass = false;
    std::vector<AssumptionCheck> checks;
    UGrid grid_used;

    // regular kind
    double margin = 0.0;        // inf f0' on the grid
    double psi_bound = 0.0;     // C with |psi|, |psi'| <= C
    double alpha_growth = 0.0;  // alpha of |f| <= alpha|F| + C
    double C_growth = 0.0;
    double C_psi_env = 0.0;     // C with Psi <= C(|F| + 1), Psi convex >= |f'|
    double beta_quad = 0.0;     // F >= beta u^2 - C_quad
    double C_quad = 0.0;

    // singular kind
    double kappa = 0.0;         // 1 + 1/(l-1)
    double beta_sing = 0.0;     // beta of |f| <= beta|F|^kappa + C
    double C_sing = 0.0;
    double kappa1 = 0.0;        // 1 + 1/l, exponent of |f'| <= Psi^kappa1
    double C1_sing = 0.0;       // Psi <= C1|f| + C2
    double C2_sing = 0.0;
    bool uniqueness_ok = false; // kappa1 < 8/5, i.e. l > 5/3 (singular);
                                // convex-envelope check passed (regular)

    const AssumptionCheck* find(const std::string& name) const;
};

// Checks the regular structural assumptions (monotone split, bounded psi,
// |f| <= alpha|F| + C on a fixed alpha lattice {1/8,...,8}, convex Psi >= |f'|
// with Psi <= C(|F|+1)) on the window. Throws ValidationError naming the first
// violated assumption and the witness u.
AssumptionReport validate_regular(const PotentialSpec& p, const UGrid& grid = UGrid{});

// Checks the singular assumptions on (-1+1e-6, 1-1e-6): f in C^2 with
// f(0) = 0, blow-up of f and f' at the endpoints, |f| <= beta|F|^kappa + C,
// and the uniqueness condition kappa1 < 8/5 (flag, not an error).
// ValidationError if l <= 1.
AssumptionReport validate_singular(const PotentialSpec& p);

// Piecewise-linear convex majorant of h on an ascending grid, built by a
// running maximum of secant slopes (slopes are nondecreasing by construction
// and each node value dominates h there).
std::vector<double> convex_majorant(const std::vector<double>& u,
                                    const std::vector<double>& h);

// Search (a, b) for psi(u) = -a*tanh(b*u) with inf (f - psi)' >= 1 on the
// window. Returns nullopt when no lattice point works.
std::optional<std::pair<double, double>> find_tanh_split(const std::vector<double>& coeffs,
                                                         const UGrid& grid);

}  // namespace ulch
