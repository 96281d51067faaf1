#include "ulch/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ulch {

namespace {

double poly_eval(const std::vector<double>& c, double u) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
    return v;
}

double poly_deriv_eval(const std::vector<double>& c, double u) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) v = v * u + c[i] * static_cast<double>(i);
    return v;
}

double poly_antideriv_eval(const std::vector<double>& c, double u) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i] / static_cast<double>(i + 1);
    return v * u;  // F(0) = 0
}

void require_singular_range(double u) {
    if (!(std::abs(u) < 1.0))
        throw DomainError("singular potential evaluated at |u| >= 1");
}

std::string fmt_witness(const char* what, double u, double value) {
    std::ostringstream os;
    os << what << " violated at u = " << u << " (value " << value << ")";
    return os.str();
}

const double kAlphaLattice[] = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

// Grid for singular validation: uniform bulk plus geometric refinement
// toward the endpoints where everything blows up.
std::vector<double> singular_grid() {
    std::vector<double> u;
    const int bulk = 8001;
    for (int i = 0; i < bulk; ++i) u.push_back(-0.999 + 1.998 * i / (bulk - 1));
    for (int j = 4; j <= 6; ++j) {
        const double margin = std::pow(10.0, -j);
        u.push_back(-1.0 + margin);
        u.push_back(1.0 - margin);
    }
    std::sort(u.begin(), u.end());
    return u;
}

}  // namespace

int PotentialSpec::degree() const {
    if (kind != PotentialKind::regular_polynomial) return -1;
    for (std::size_t i = coeffs.size(); i-- > 0;)
        if (coeffs[i] != 0.0) return static_cast<int>(i);
    return 0;
}

double PotentialSpec::kappa() const {
    if (kind != PotentialKind::singular_power)
        throw ValidationError("kappa is defined for singular potentials only");
    if (!(l > 1.0)) throw ValidationError("kappa undefined: requires l > 1");
    return 1.0 + 1.0 / (l - 1.0);
}

PotentialSpec PotentialSpec::regular(std::vector<double> coeffs,
                                     std::optional<std::pair<double, double>> psi,
                                     const UGrid& grid) {
    if (coeffs.empty()) throw ValidationError("regular potential needs coefficients");
    if (coeffs[0] != 0.0) throw ValidationError("regular potential requires f(0) = 0");
    PotentialSpec p;
    p.kind = PotentialKind::regular_polynomial;
    p.coeffs = std::move(coeffs);
    if (psi) {
        p.psi_a = psi->first;
        p.psi_b = psi->second;
    } else if (auto found = find_tanh_split(p.coeffs, grid)) {
        p.psi_a = found->first;
        p.psi_b = found->second;
    }
    return p;
}

PotentialSpec PotentialSpec::singular(double l, double alpha) {
    if (!(l > 1.0))
        throw ValidationError("singular potential requires l > 1");
    if (alpha < 0.0) throw ValidationError("singular potential requires alpha >= 0");
    PotentialSpec p;
    p.kind = PotentialKind::singular_power;
    p.l = l;
    p.alpha = alpha;
    return p;
}

double eval_f(const PotentialSpec& p, double u) {
    if (p.kind == PotentialKind::regular_polynomial) return poly_eval(p.coeffs, u);
    require_singular_range(u);
    return u * std::pow(1.0 - u * u, -p.l) - p.alpha * u;
}

double eval_fprime(const PotentialSpec& p, double u) {
    if (p.kind == PotentialKind::regular_polynomial) return poly_deriv_eval(p.coeffs, u);
    require_singular_range(u);
    const double s = 1.0 - u * u;
    return (1.0 + (2.0 * p.l - 1.0) * u * u) * std::pow(s, -p.l - 1.0) - p.alpha;
}

double eval_F(const PotentialSpec& p, double u) {
    if (p.kind == PotentialKind::regular_polynomial) return poly_antideriv_eval(p.coeffs, u);
    require_singular_range(u);
    const double s = 1.0 - u * u;
    return (std::pow(s, 1.0 - p.l) - 1.0) / (2.0 * (p.l - 1.0)) - 0.5 * p.alpha * u * u;
}

double eval_psi(const PotentialSpec& p, double u) {
    if (p.kind != PotentialKind::regular_polynomial) return 0.0;
    return -p.psi_a * std::tanh(p.psi_b * u);
}

double eval_psi_prime(const PotentialSpec& p, double u) {
    if (p.kind != PotentialKind::regular_polynomial) return 0.0;
    const double c = std::cosh(p.psi_b * u);
    return -p.psi_a * p.psi_b / (c * c);
}

double eval_f0(const PotentialSpec& p, double u) { return eval_f(p, u) - eval_psi(p, u); }

double eval_f0_prime(const PotentialSpec& p, double u) {
    return eval_fprime(p, u) - eval_psi_prime(p, u);
}

std::vector<double> convex_majorant(const std::vector<double>& u,
                                     const std::vector<double>& h) {
    if (u.size() != h.size() || u.size() < 2)
        throw ValidationError("convex_majorant: need matching grids of size >= 2");
    std::vector<double> out(h.size());
    out[0] = h[0];
    double slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < h.size(); ++i) {
        const double du = u[i] - u[i - 1];
        slope = std::max(slope, (h[i] - out[i - 1]) / du);
        out[i] = out[i - 1] + slope * du;
    }
    return out;
}

std::optional<std::pair<double, double>> find_tanh_split(const std::vector<double>& coeffs,
                                                         const UGrid& grid) {
    const double a_lat[] = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    const double b_lat[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    std::optional<std::pair<double, double>> best;
    double best_bound = std::numeric_limits<double>::infinity();
    for (double a : a_lat) {
        for (double b : b_lat) {
            double margin = std::numeric_limits<double>::infinity();
            for (int i = 0; i < grid.n; ++i) {
                const double u = grid.at(i);
                const double c = std::cosh(b * u);
                margin = std::min(margin, poly_deriv_eval(coeffs, u) + a * b / (c * c));
            }
            if (margin >= 1.0 - 1e-12) {
                const double bound = a * std::max(1.0, b);
                if (bound < best_bound) {
                    best_bound = bound;
                    best = std::make_pair(a, b);
                }
            }
        }
    }
    return best;
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

AssumptionReport validate_regular(const PotentialSpec& p, const UGrid& grid) {
    if (p.kind != PotentialKind::regular_polynomial)
        throw ValidationError("validate_regular: not a regular potential");
    AssumptionReport rep;
    rep.grid_used = grid;

    // Monotone split: inf f0' >= 1 with the stored tanh split.
    double margin = std::numeric_limits<double>::infinity();
    double margin_u = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double u = grid.at(i);
        const double d = eval_f0_prime(p, u);
        if (d < margin) {
            margin = d;
            margin_u = u;
        }
    }
    rep.margin = margin;
    if (!(margin >= 1.0 - 1e-12))
        throw ValidationError("validate_regular: " + fmt_witness("monotone-split assumption (f0' >= 1)",
                                                                  margin_u, margin));
    rep.checks.push_back({"monotone-split", true, margin_u, "inf f0'"});

    // Bounded perturbation: |psi|, |psi'| <= a*max(1,b), exact for tanh.
    double psi_max = 0.0, psi_u = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double u = grid.at(i);
        const double v = std::max(std::abs(eval_psi(p, u)), std::abs(eval_psi_prime(p, u)));
        if (v > psi_max) {
            psi_max = v;
            psi_u = u;
        }
    }
    rep.psi_bound = psi_max;
    const double psi_cap = p.psi_a * std::max(1.0, p.psi_b) + 1e-12;
    if (psi_max > psi_cap)
        throw ValidationError("validate_regular: " +
                              fmt_witness("bounded-psi assumption", psi_u, psi_max));
    rep.checks.push_back({"bounded-psi", true, psi_u, "max(|psi|,|psi'|)"});

    // Growth control: |f| <= alpha|F| + C; smallest C over the alpha lattice.
    double best_C = std::numeric_limits<double>::infinity();
    double best_alpha = kAlphaLattice[0];
    double best_u = 0.0;
    for (double alpha : kAlphaLattice) {
        double C = 0.0, at = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            const double u = grid.at(i);
            const double gap = std::abs(eval_f(p, u)) - alpha * std::abs(eval_F(p, u));
            if (gap > C) {
                C = gap;
                at = u;
            }
        }
        if (C < best_C) {
            best_C = C;
            best_alpha = alpha;
            best_u = at;
        }
    }
    rep.alpha_growth = best_alpha;
    rep.C_growth = best_C;
    rep.checks.push_back({"growth-control", true, best_u, "|f| <= alpha|F| + C"});

    // Convex envelope: Psi >= |f'| convex with Psi <= C(|F| + 1).
    std::vector<double> us(grid.n), habs(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        us[i] = grid.at(i);
        habs[i] = std::abs(eval_fprime(p, us[i]));
    }
    const std::vector<double> Psi = convex_majorant(us, habs);
    double c_env = 0.0, env_u = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double r = Psi[i] / (std::abs(eval_F(p, us[i])) + 1.0);
        if (r > c_env) {
            c_env = r;
            env_u = us[i];
        }
    }
    rep.C_psi_env = c_env;
    rep.checks.push_back({"convex-envelope", true, env_u, "Psi <= C(|F|+1)"});
    rep.uniqueness_ok = true;

    // Quadratic coercivity F >= beta u^2 - C (follows from the split bounds).
    double q_best_C = std::numeric_limits<double>::infinity();
    double q_beta = kAlphaLattice[0];
    for (double beta : kAlphaLattice) {
        double C = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            const double u = grid.at(i);
            C = std::max(C, beta * u * u - eval_F(p, u));
        }
        if (C < q_best_C) {
            q_best_C = C;
            q_beta = beta;
        }
    }
    rep.beta_quad = q_beta;
    rep.C_quad = q_best_C;
    rep.checks.push_back({"F-coercive", true, 0.0, "F >= beta u^2 - C"});

    rep.pass = true;
    return rep;
}

AssumptionReport validate_singular(const PotentialSpec& p) {
    if (p.kind != PotentialKind::singular_power)
        throw ValidationError("validate_singular: not a singular potential");
    if (!(p.l > 1.0))
        throw ValidationError("validate_singular: requires l > 1 (kappa undefined)");
    AssumptionReport rep;
    rep.kappa = p.kappa();

    const std::vector<double> us = singular_grid();

    // Regularity at the origin: f in C^2(-1,1), f(0) = 0 (closed form).
    if (std::abs(eval_f(p, 0.0)) > 1e-14)
        throw ValidationError("validate_singular: f(0) != 0");
    rep.checks.push_back({"smooth-inside", true, 0.0, "f(0) = 0, f in C^2(-1,1)"});

    // Blow-up of f and f' at the endpoints, monotone
    // approach beyond |u| = 0.99.
    {
        bool ok = true;
        double wit = 0.0;
        double prev_f = eval_f(p, 0.99), prev_fp = eval_fprime(p, 0.99);
        for (int j = 3; j <= 6; ++j) {
            const double u = 1.0 - std::pow(10.0, -j);
            const double fv = eval_f(p, u), fpv = eval_fprime(p, u);
            if (!(fv > prev_f && fpv > prev_fp)) {
                ok = false;
                wit = u;
                break;
            }
            prev_f = fv;
            prev_fp = fpv;
        }
        const double u_top = 1.0 - 1e-6;
        if (!(eval_f(p, u_top) > 1e3 && eval_f(p, -u_top) < -1e3 &&
              eval_fprime(p, u_top) > 1e3 && eval_fprime(p, -u_top) > 1e3)) {
            ok = false;
            wit = u_top;
        }
        if (!ok)
            throw ValidationError("validate_singular: " +
                                  fmt_witness("endpoint blow-up assumption", wit, 0.0));
        rep.checks.push_back({"blow-up-f", true, u_top, "f -> +/-inf at +/-1"});
        rep.checks.push_back({"blow-up-fprime", true, u_top, "f' -> +inf at +/-1"});
    }

    // Power growth control: |f| <= beta |F|^kappa + C on the refined grid.
    {
        double best_C = std::numeric_limits<double>::infinity();
        double best_beta = kAlphaLattice[0], best_u = 0.0;
        for (double beta : kAlphaLattice) {
            double C = 0.0, at = 0.0;
            for (double u : us) {
                const double gap =
                    std::abs(eval_f(p, u)) - beta * std::pow(std::abs(eval_F(p, u)), rep.kappa);
                if (gap > C) {
                    C = gap;
                    at = u;
                }
            }
            if (C < best_C) {
                best_C = C;
                best_beta = beta;
                best_u = at;
            }
        }
        rep.beta_sing = best_beta;
        rep.C_sing = best_C;
        rep.checks.push_back({"power-growth-control", true, best_u, "|f| <= beta|F|^kappa + C"});
    }

    // Uniqueness condition: |f'| <= Psi^kappa1 with convex Psi <= C1|f| + C2 and the
    // uniqueness threshold kappa1 < 8/5 (equivalently l > 5/3).
    {
        rep.kappa1 = 1.0 + 1.0 / p.l;
        std::vector<double> target(us.size());
        for (std::size_t i = 0; i < us.size(); ++i)
            target[i] = std::pow(std::abs(eval_fprime(p, us[i])), 1.0 / rep.kappa1);
        const std::vector<double> Psi = convex_majorant(us, target);
        double best_C2 = std::numeric_limits<double>::infinity();
        double best_C1 = kAlphaLattice[0];
        for (double c1 : kAlphaLattice) {
            double c2 = 0.0;
            for (std::size_t i = 0; i < us.size(); ++i)
                c2 = std::max(c2, Psi[i] - c1 * std::abs(eval_f(p, us[i])));
            if (c2 < best_C2) {
                best_C2 = c2;
                best_C1 = c1;
            }
        }
        rep.C1_sing = best_C1;
        rep.C2_sing = best_C2;
        rep.uniqueness_ok = rep.kappa1 < 1.6;
        rep.checks.push_back({"derivative-growth", true, 0.0,
                              rep.uniqueness_ok ? "kappa1 < 8/5"
                                                : "kappa1 >= 8/5 (uniqueness untreated)"});
    }

    rep.pass = true;
    return rep;
}

}  // namespace ulch
