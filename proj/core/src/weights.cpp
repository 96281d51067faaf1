#include "ulch/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ulch/rng.hpp"

namespace ulch {

namespace {

// Squared scaled displacement |eps (x - x0)|^2 with explicit components.
struct Disp {
    std::array<double, 3> d = {0.0, 0.0, 0.0};
    double r2 = 0.0;  // |x - x0|^2 (unscaled)
};

Disp displacement(const WeightFn& w, const std::array<double, 3>& x, int dim) {
    Disp out;
    for (int a = 3 - dim; a < 3; ++a) {
        out.d[a] = x[a] - w.center[a];
        out.r2 += out.d[a] * out.d[a];
    }
    return out;
}

double eval_from_r2(const WeightFn& w, double r2) {
    const double s = w.eps * w.eps * r2;
    if (w.kind == WeightKind::polynomial) return std::pow(1.0 + s, -0.5 * w.gamma);
    return std::exp(-std::sqrt(s + 1.0));
}

std::vector<std::array<double, 3>> sample_cloud(int dim, int n, double box_radius,
                                                Rng& rng) {
    std::vector<std::array<double, 3>> pts(n);
    for (auto& p : pts) {
        p = {0.0, 0.0, 0.0};
        for (int a = 3 - dim; a < 3; ++a) p[a] = rng.symmetric(box_radius);
    }
    return pts;
}

double norm3(const std::array<double, 3>& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

std::array<double, 3> add3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

}  // namespace

double WeightFn::operator()(const std::array<double, 3>& x, int dim) const {
    return eval_from_r2(*this, displacement(*this, x, dim).r2);
}

double eval_weight(const WeightFn& w, const std::array<double, 3>& x, int dim) {
    return w(x, dim);
}

std::array<double, 3> WeightFn::grad(const std::array<double, 3>& x, int dim) const {
    const Disp dp = displacement(*this, x, dim);
    const double e2 = eps * eps;
    std::array<double, 3> g = {0.0, 0.0, 0.0};
    if (kind == WeightKind::polynomial) {
        const double A = std::pow(1.0 + e2 * dp.r2, -0.5 * gamma - 1.0);
        for (int a = 0; a < 3; ++a) g[a] = -gamma * e2 * dp.d[a] * A;
    } else {
        const double m = std::sqrt(1.0 + e2 * dp.r2);
        const double phi = std::exp(-m);
        for (int a = 0; a < 3; ++a) g[a] = -phi * e2 * dp.d[a] / m;
    }
    return g;
}

double WeightFn::hessian_norm(const std::array<double, 3>& x, int dim) const {
    const Disp dp = displacement(*this, x, dim);
    const double e2 = eps * eps;
    double frob2 = 0.0;
    if (kind == WeightKind::polynomial) {
        const double A = std::pow(1.0 + e2 * dp.r2, -0.5 * gamma - 1.0);
        const double B = std::pow(1.0 + e2 * dp.r2, -0.5 * gamma - 2.0);
        for (int i = 3 - dim; i < 3; ++i)
            for (int j = 3 - dim; j < 3; ++j) {
                const double hij = -gamma * e2 * (i == j ? 1.0 : 0.0) * A +
                                   gamma * (gamma + 2.0) * e2 * e2 * dp.d[i] * dp.d[j] * B;
                frob2 += hij * hij;
            }
    } else {
        const double m = std::sqrt(1.0 + e2 * dp.r2);
        const double phi = std::exp(-m);
        for (int i = 3 - dim; i < 3; ++i)
            for (int j = 3 - dim; j < 3; ++j) {
                const double hij =
                    phi * (e2 * e2 * dp.d[i] * dp.d[j] * (1.0 / (m * m) + 1.0 / (m * m * m)) -
                           e2 * (i == j ? 1.0 : 0.0) / m);
                frob2 += hij * hij;
            }
    }
    return std::sqrt(frob2);
}

Field weight_field(const WeightFn& w, const GridSpec& g) {
    return weight_field_pow(w, g, 1.0);
}

Field weight_field_pow(const WeightFn& w, const GridSpec& g, double power) {
    const double period = 2.0 * g.half_length;
    Field out(g);
    const std::size_t count = g.point_count();
    for (std::size_t i = 0; i < count; ++i) {
        const auto x = grid_point(g, i);
        double r2 = 0.0;
        for (int a = 3 - g.dim; a < 3; ++a) {
            const double d = std::remainder(x[a] - w.center[a], period);
            r2 += d * d;
        }
        const double v = eval_from_r2(w, r2);
        out.values[i] = (power == 1.0) ? v : std::pow(v, power);
    }
    return out;
}

Field weight_field_grad(const WeightFn& w, const GridSpec& g, int axis) {
    if (axis < 0 || axis >= g.dim)
        throw ValidationError("weight_field_grad: axis out of range");
    const int slot = 3 - g.dim + axis;
    const double period = 2.0 * g.half_length;
    const double e2 = w.eps * w.eps;
    Field out(g);
    const std::size_t count = g.point_count();
    for (std::size_t i = 0; i < count; ++i) {
        const auto x = grid_point(g, i);
        double r2 = 0.0, da = 0.0;
        for (int a = 3 - g.dim; a < 3; ++a) {
            const double d = std::remainder(x[a] - w.center[a], period);
            r2 += d * d;
            if (a == slot) da = d;
        }
        if (w.kind == WeightKind::polynomial) {
            out.values[i] = -w.gamma * e2 * da * std::pow(1.0 + e2 * r2, -0.5 * w.gamma - 1.0);
        } else {
            const double m = std::sqrt(1.0 + e2 * r2);
            out.values[i] = -std::exp(-m) * e2 * da / m;
        }
    }
    return out;
}

WeightAxiomReport verify_weight_axiom(WeightKind kind, double gamma, double nu,
                                      const std::vector<double>& eps_values, int dim,
                                      int n_samples, double box_radius, std::uint64_t seed) {
    if (!(nu > 0.0)) throw ValidationError("verify_weight_axiom: nu must be positive");
    WeightAxiomReport rep;
    rep.nu = nu;
    rep.eps_values = eps_values;
    for (std::size_t e = 0; e < eps_values.size(); ++e) {
        WeightFn w{kind, gamma, eps_values[e], {0.0, 0.0, 0.0}};
        Rng rng(mix_seed(seed, e));
        const auto xs = sample_cloud(dim, n_samples, box_radius, rng);
        const auto ys = sample_cloud(dim, n_samples, box_radius, rng);
        double c = 1.0;  // attained at x = 0
        for (int i = 0; i < n_samples; ++i) {
            const double growth = std::exp(nu * norm3(xs[i]));
            const double pxy = w(add3(xs[i], ys[i]), dim);
            const double py = w(ys[i], dim);
            c = std::max(c, pxy / (growth * py));   // upper axiom
            c = std::max(c, py / (growth * pxy));   // two-sided: covers the lower bound
        }
        rep.C_upper.push_back(c);
    }
    // Explicit lower-bound recheck with the fitted constants.
    for (std::size_t e = 0; e < eps_values.size(); ++e) {
        WeightFn w{kind, gamma, eps_values[e], {0.0, 0.0, 0.0}};
        Rng rng(mix_seed(seed ^ 0x5b5b5b5bULL, e));
        const auto xs = sample_cloud(dim, n_samples / 4 + 1, box_radius, rng);
        const auto ys = sample_cloud(dim, n_samples / 4 + 1, box_radius, rng);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double lhs = w(add3(xs[i], ys[i]), dim);
            const double rhs = std::exp(-nu * norm3(xs[i])) * w(ys[i], dim) / rep.C_upper[e];
            if (lhs < rhs * (1.0 - 1e-12)) rep.lower_bound_ok = false;
        }
    }
    const auto [mn, mx] = std::minmax_element(rep.C_upper.begin(), rep.C_upper.end());
    rep.uniformity_factor = *mx / *mn;
    return rep;
}

DerivativeBoundReport verify_derivative_bound(WeightKind kind, double gamma, int order,
                                              const std::vector<double>& eps_values, int dim,
                                              int n_samples, double box_radius,
                                              std::uint64_t seed) {
    if (order < 1 || order > 2)
        throw ValidationError("verify_derivative_bound: order must be 1 or 2");
    DerivativeBoundReport rep;
    rep.order = order;
    rep.eps_values = eps_values;
    for (std::size_t e = 0; e < eps_values.size(); ++e) {
        WeightFn w{kind, gamma, eps_values[e], {0.0, 0.0, 0.0}};
        Rng rng(mix_seed(seed, 101 + e));
        auto xs = sample_cloud(dim, n_samples, box_radius, rng);
        xs.push_back({0.0, 0.0, 0.0});
        double worst = 0.0;
        for (const auto& x : xs) {
            const double phi = w(x, dim);
            double deriv;
            if (order == 1) {
                deriv = norm3(w.grad(x, dim));
            } else {
                deriv = w.hessian_norm(x, dim);
            }
            const double epsn = std::pow(w.eps, order);
            const double denom = (kind == WeightKind::polynomial)
                                     ? epsn * std::pow(phi, 1.0 + order / gamma)
                                     : epsn * phi;
            worst = std::max(worst, deriv / denom);
        }
        rep.ratio_max.push_back(worst);
    }
    const auto [mn, mx] = std::minmax_element(rep.ratio_max.begin(), rep.ratio_max.end());
    rep.uniformity_factor = (*mn > 0.0) ? *mx / *mn : 1.0;
    return rep;
}

double weight_l1(const WeightFn& w, const GridSpec& g) {
    if (w.kind == WeightKind::polynomial && !(w.gamma > g.dim)) {
        std::ostringstream os;
        os << "weight_l1: gamma = " << w.gamma << " <= dim = " << g.dim
           << ", weight is not integrable as the box grows";
        throw ValidationError(os.str());
    }
    const double period = 2.0 * g.half_length;
    const double cell = std::pow(g.spacing(), g.dim);
    double sum = 0.0;
    const std::size_t count = g.point_count();
    for (std::size_t i = 0; i < count; ++i) {
        const auto x = grid_point(g, i);
        double r2 = 0.0;
        for (int a = 3 - g.dim; a < 3; ++a) {
            const double d = std::remainder(x[a] - w.center[a], period);
            r2 += d * d;
        }
        sum += eval_from_r2(w, r2);
    }
    return sum * cell;
}

double l1_scaling_exponent(WeightKind kind, double gamma, int dim,
                           const std::vector<double>& eps_values, double box_factor,
                           int points_per_axis) {
    if (eps_values.size() < 2)
        throw ValidationError("l1_scaling_exponent: need at least two eps values");
    // Least-squares slope of log ||phi_eps||_1 against log eps.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (double eps : eps_values) {
        const GridSpec g(dim, points_per_axis, box_factor / eps);
        WeightFn w{kind, gamma, eps, {0.0, 0.0, 0.0}};
        const double x = std::log(eps);
        const double y = std::log(weight_l1(w, g));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(eps_values.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

EpsilonSchedule EpsilonSchedule::constant_eps(double eps) {
    if (!(eps > 0.0)) throw ScheduleError("constant schedule requires eps > 0");
    EpsilonSchedule s;
    s.kind = ScheduleKind::constant;
    s.eps0 = eps;
    return s;
}

EpsilonSchedule EpsilonSchedule::fixed_horizon(double T, double C, double g_norm,
                                               double u0_norm) {
    if (!(T >= 0.0) || !(C > 0.0))
        throw ScheduleError("fixed-horizon schedule requires T >= 0 and C > 0");
    EpsilonSchedule s;
    s.kind = ScheduleKind::fixed_horizon_regular;
    s.horizon_T = T;
    s.C = C;
    s.g_norm = g_norm;
    s.u0_norm = u0_norm;
    return s;
}

EpsilonSchedule EpsilonSchedule::fixed_horizon_sing(double T, double C, double g_norm,
                                                    double u0_norm, double kappa) {
    if (!(kappa > 1.0)) throw ScheduleError("singular schedule requires kappa > 1");
    EpsilonSchedule s = fixed_horizon(T, C, g_norm, u0_norm);
    s.kind = ScheduleKind::fixed_horizon_singular;
    s.kappa = kappa;
    return s;
}

EpsilonSchedule EpsilonSchedule::dissipative_eps(double eps0, double lambda, double C_g,
                                                 double V0, double sigma) {
    if (!(eps0 > 0.0) || eps0 > 1.0)
        throw ScheduleError("dissipative schedule requires 0 < eps0 <= 1");
    if (!(lambda > 0.0) || !(C_g > 0.0) || V0 < 0.0 || !(sigma > 0.0))
        throw ScheduleError("dissipative schedule requires lambda, C_g, sigma > 0, V0 >= 0");
    EpsilonSchedule s;
    s.kind = ScheduleKind::dissipative;
    s.eps0 = eps0;
    s.lambda = lambda;
    s.C_g = C_g;
    s.V0 = V0;
    s.sigma = sigma;
    return s;
}

double eval_schedule(const EpsilonSchedule& s, double t) {
    switch (s.kind) {
        case ScheduleKind::constant:
            return s.eps0;
        case ScheduleKind::fixed_horizon_regular: {
            const double data = s.C * (1.0 + s.g_norm * s.g_norm + s.u0_norm);
            return 1.0 / (2.0 * (s.horizon_T + 1.0) * std::sqrt(data));
        }
        case ScheduleKind::fixed_horizon_singular: {
            const double data = s.C * (1.0 + s.g_norm * s.g_norm + s.u0_norm);
            return 1.0 / (std::pow(2.0 * (s.horizon_T + 1.0), s.kappa) *
                          std::pow(data, s.kappa - 0.5));
        }
        case ScheduleKind::dissipative: {
            const double pool = 4.0 * s.C_g / s.lambda + s.V0 * std::exp(-s.sigma * t);
            return s.eps0 * std::sqrt(0.25 * s.lambda / pool);
        }
    }
    return s.eps0;
}

double schedule_derivative(const EpsilonSchedule& s, double t) {
    if (s.kind != ScheduleKind::dissipative) return 0.0;
    // eps'/eps = (sigma/2) V0 e^{-sigma t} / (4Cg/lambda + V0 e^{-sigma t})
    const double decay = s.V0 * std::exp(-s.sigma * t);
    const double pool = 4.0 * s.C_g / s.lambda + decay;
    return eval_schedule(s, t) * 0.5 * s.sigma * decay / pool;
}

ScheduleReport verify_schedule(const EpsilonSchedule& s, double t_max, int n) {
    ScheduleReport rep;
    if (s.kind == ScheduleKind::dissipative)
        rep.eps_limit_ratio = std::sqrt((4.0 * s.C_g / s.lambda + s.V0) / (4.0 * s.C_g / s.lambda));
    for (int i = 0; i < n; ++i) {
        const double t = t_max * i / (n - 1);
        const double eps = eval_schedule(s, t);
        if (!(eps > 0.0)) {
            std::ostringstream os;
            os << "verify_schedule: eps(t) <= 0 at t = " << t;
            throw ScheduleError(os.str());
        }
        if (s.kind != ScheduleKind::dissipative) continue;
        const double ratio = 5.0 * std::abs(schedule_derivative(s, t)) / eps;
        rep.max_log_derivative_ratio = std::max(rep.max_log_derivative_ratio, ratio);
        if (ratio > 0.5 * s.lambda + 1e-12) {
            std::ostringstream os;
            os << "verify_schedule: 5|eps'|/eps = " << ratio << " > lambda/2 at t = " << t;
            throw ScheduleError(os.str());
        }
        const double small = eps * eps * (4.0 * s.C_g / s.lambda + s.V0 * std::exp(-s.sigma * t));
        rep.max_smallness = std::max(rep.max_smallness, small);
        if (small > 0.25 * s.lambda + 1e-12) {
            std::ostringstream os;
            os << "verify_schedule: eps^2 pool = " << small << " > lambda/4 at t = " << t;
            throw ScheduleError(os.str());
        }
    }
    rep.ok = true;
    return rep;
}

}  // namespace ulch
