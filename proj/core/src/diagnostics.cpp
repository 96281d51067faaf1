#include "ulch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ulch/rng.hpp"

namespace ulch {

namespace {

// Smallest constant on the log lattice 2^(j/4) dominating c.
double lattice_ceil(double c) {
    if (!(c > 0.0)) return 0.0;
    const double j = std::ceil(4.0 * std::log2(c) - 1e-12);
    return std::pow(2.0, j / 4.0);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

// Envelope fit val(t) <= A + B e^(-sigma t): A from the tail, sigma from a
// log regression on the transient excess, B chosen so the envelope holds at
// every sample.
struct DecayFit {
    double A_raw = 0.0, A = 0.0, B = 0.0, sigma = 0.0, margin = 0.0;
    bool pass = false;
    std::string note;
};
DecayFit envelope_decay_fit(const std::vector<double>& ts, const std::vector<double>& vals) {
    DecayFit fit;
    if (ts.size() < 4) {
        fit.note = "too few records";
        return fit;
    }
    const double t0 = ts.front(), t1 = ts.back();
    const double t_tail = t0 + 0.75 * (t1 - t0);
    double vmax = 0.0;
    for (double v : vals) vmax = std::max(vmax, v);
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] >= t_tail) fit.A_raw = std::max(fit.A_raw, vals[i]);
    fit.A = 1.05 * fit.A_raw;

    const double floor = std::max(0.25 * fit.A_raw, 1e-6 * vmax);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double d = vals[i] - fit.A;
        if (ts[i] < t_tail && d > floor) {
            xs.push_back(ts[i]);
            ys.push_back(std::log(d));
        }
    }
    if (xs.size() >= 3) {
        fit.sigma = std::max(0.0, -ls_slope(xs, ys));
        if (fit.sigma <= 1e-3)
            fit.note = "not dissipative at this scale (sigma ~ 0)";
    } else {
        // No transient ever rises above the long-time level: the fit is
        // degenerate (sigma unconstrained) and only the level matters.
        fit.sigma = 0.0;
        fit.note = "degenerate fit: no transient above the long-time level";
        for (double v : vals) fit.A = std::max(fit.A, v);
    }
    double B = 0.0;
    if (fit.sigma > 0.0)
        for (std::size_t i = 0; i < ts.size(); ++i)
            B = std::max(B, (vals[i] - fit.A) * std::exp(fit.sigma * ts[i]));
    fit.B = std::max(0.0, B);
    fit.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ts.size(); ++i)
        fit.margin = std::min(fit.margin,
                              fit.A + fit.B * std::exp(-fit.sigma * ts[i]) - vals[i]);
    fit.pass = fit.sigma > 1e-3 && fit.margin >= -1e-9 * std::max(vmax, 1.0);
    return fit;
}

std::vector<double> abs_F_values(const Field& u, const PotentialSpec& p) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::abs(eval_F(p, u[i]));
    return out;
}

}  // namespace

double DiagnosticsConfig::resolve_gamma(const PotentialSpec& p) const {
    if (gamma > 0.0) return gamma;
    if (p.kind == PotentialKind::singular_power)
        return 3.0 + 2.0 / (2.0 * p.kappa() - 1.0);
    return 5.0;
}

double BoundFit::constant(const std::string& name, double fallback) const {
    for (const auto& kv : constants)
        if (kv.first == name) return kv.second;
    return fallback;
}

Recorder::Recorder(const SimConfig& sim, DiagnosticsConfig diag)
    : sim_(sim), diag_(std::move(diag)) {
    diag_.gamma = diag_.resolve_gamma(sim.potential);
    diag_.stride = resolve_stride(sim.grid, diag_.stride);
    series_.g_l6b = lp_uniformly_local(sim.g, 6.0, diag_.R, diag_.stride).value;
    series_.g_l2b = lp_uniformly_local(sim.g, 2.0, diag_.R, diag_.stride).value;
    series_.lambda = sim.lambda;
    series_.kappa =
        sim.potential.kind == PotentialKind::singular_power ? sim.potential.kappa() : 0.0;
    series_.n_centers = diag_.centers.size();
    cum_.assign(sim.grid.point_count(), 0.0);
}

void Recorder::operator()(const SimState& state) {
    const GridSpec& g = sim_.grid;
    const double cell = std::pow(g.spacing(), g.dim);
    DiagnosticsRecord rec;
    rec.t = state.t;

    const Field gsq_u = gradient_sq(state.u);
    rec.w12b_u = w12b(state.u, diag_.R, diag_.stride).value;

    const std::vector<double> Fabs = abs_F_values(state.u, sim_.potential);
    {
        Field Ff(g, Fabs);
        rec.l1b_F = lp_uniformly_local(Ff, 1.0, diag_.R, diag_.stride).value;
    }
    rec.phib = rec.w12b_u * rec.w12b_u + rec.l1b_F;

    const Field& mu = state_mu(state, sim_);
    const Field gsq_mu = gradient_sq(mu);
    const std::vector<double> A = [&] {
        auto w = box_window_sum(g, gsq_mu.values, diag_.R);
        for (auto& v : w) v *= cell;
        return w;
    }();

    // Cumulative [0,t] and trailing-window integrals (trapezoid in t).
    if (have_prev_) {
        const double dt2 = 0.5 * (rec.t - prev_t_);
        for (std::size_t i = 0; i < cum_.size(); ++i) cum_[i] += dt2 * (prev_A_[i] + A[i]);
    }
    ring_.emplace_back(rec.t, A);
    while (ring_.size() >= 2 && ring_.front().first < rec.t - diag_.window - 1e-12)
        ring_.pop_front();
    {
        std::vector<double> win(cum_.size(), 0.0);
        for (std::size_t r = 1; r < ring_.size(); ++r) {
            const double dt2 = 0.5 * (ring_[r].first - ring_[r - 1].first);
            for (std::size_t i = 0; i < win.size(); ++i)
                win[i] += dt2 * (ring_[r - 1].second[i] + ring_[r].second[i]);
        }
        double best_win = 0.0, best_cum = 0.0;
        const auto e = g.extents();
        const std::size_t st = static_cast<std::size_t>(diag_.stride);
        for (std::size_t i0 = 0; i0 < e[0]; i0 += (g.dim >= 3 ? st : 1))
            for (std::size_t i1 = 0; i1 < e[1]; i1 += (g.dim >= 2 ? st : 1))
                for (std::size_t i2 = 0; i2 < e[2]; i2 += st) {
                    const std::size_t idx = (i0 * e[1] + i1) * e[2] + i2;
                    best_win = std::max(best_win, win[idx]);
                    best_cum = std::max(best_cum, cum_[idx]);
                }
        rec.stl2b_grad_mu = std::sqrt(best_win);
        rec.stl2b_grad_mu_cum = std::sqrt(best_cum);
    }
    prev_A_ = A;
    prev_t_ = rec.t;
    have_prev_ = true;

    // Weighted energies and weighted grad-mu quadratures per center.
    rec.eps_t = eval_schedule(diag_.schedule, rec.t);
    const double additive =
        std::pow(rec.eps_t, -3.0) * (series_.g_l2b * series_.g_l2b + 1.0);
    for (const auto& c : diag_.centers) {
        WeightFn w{diag_.weight_kind, diag_.gamma, rec.eps_t, c};
        const Field phi = weight_field(w, g);
        double e_sum = 0.0, w_sum = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            e_sum += phi[i] * (eval_F(sim_.potential, state.u[i]) + 0.5 * gsq_u[i]);
            w_sum += phi[i] * gsq_mu[i];
        }
        rec.E_phi.push_back(e_sum * cell + additive);
        rec.grad_mu_l2phi2.push_back(w_sum * cell);
    }

    // dt u = Lap mu - lambda u, evaluated exactly from the state.
    {
        Field dtu = laplacian(mu);
        if (sim_.lambda != 0.0)
            for (std::size_t i = 0; i < dtu.size(); ++i)
                dtu.values[i] -= sim_.lambda * state.u[i];
        rec.wm12b_dtu = wm12b(dtu, diag_.R, diag_.stride).value;
    }

    rec.mean_u = mean(state.u);
    rec.max_abs_u = max_abs(state.u);
    rec.separation = 1.0 - rec.max_abs_u;
    {
        double e_sum = 0.0;
        for (std::size_t i = 0; i < state.u.size(); ++i)
            e_sum += eval_F(sim_.potential, state.u[i]) + 0.5 * gsq_u[i] +
                     sim_.g[i] * state.u[i];
        rec.energy_box = e_sum * cell;
    }
    rec.dt = state.dt_current;
    rec.s = state.s_current;

    if (series_.records.empty()) series_.u0_phib = rec.phib;
    series_.records.push_back(std::move(rec));
}

RunOutput run_with_diagnostics(const SimConfig& sim, const DiagnosticsConfig& diag,
                               bool energy_every_step) {
    Recorder recorder(sim, diag);
    std::vector<std::pair<double, double>> energy;
    RunProbes probes;
    probes.cadence = std::max(1, diag.cadence);
    probes.on_record = [&recorder](const SimState& st) { recorder(st); };
    probes.track_energy = energy_every_step;
    probes.energy_log = &energy;
    SimState final_state = run(sim, probes);
    return RunOutput{std::move(final_state), std::move(recorder.series()), std::move(energy)};
}

namespace {

// LHS of the growth/dissipative bounds per record: Phib plus the grad-mu
// term, cumulative for the CH bounds and forward-window for the Oono ones.
std::vector<std::pair<double, double>> bound_lhs(const DiagnosticsSeries& s, bool forward) {
    std::vector<std::pair<double, double>> out;
    const auto& r = s.records;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!forward) {
            out.emplace_back(r[i].t, r[i].phib + r[i].stl2b_grad_mu_cum * r[i].stl2b_grad_mu_cum);
            continue;
        }
        const double target = r[i].t + 1.0;
        if (target > r.back().t + 1e-9) break;
        std::size_t best = i;
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = i; j < r.size(); ++j) {
            const double d = std::abs(r[j].t - target);
            if (d < gap) {
                gap = d;
                best = j;
            }
        }
        out.emplace_back(r[i].t,
                         r[i].phib + r[best].stl2b_grad_mu * r[best].stl2b_grad_mu);
    }
    return out;
}

double envelope_slope(const std::vector<std::pair<double, double>>& lhs) {
    // Log-log slope of the running max against 1 + t over the second half.
    std::vector<double> xs, ys;
    double run_max = 0.0;
    const double t_mid = lhs.empty() ? 0.0 : 0.5 * lhs.back().first;
    for (const auto& [t, v] : lhs) {
        run_max = std::max(run_max, v);
        if (t >= t_mid && run_max > 0.0) {
            xs.push_back(std::log(1.0 + t));
            ys.push_back(std::log(run_max));
        }
    }
    return ls_slope(xs, ys);
}

BoundFit polynomial_growth_fit(const DiagnosticsSeries& s, const std::string& id,
                               double t_exp, double data_exp) {
    if (s.records.size() < 2) throw FitError(id + ": need at least two records");
    const auto lhs = bound_lhs(s, false);
    const double data = 1.0 + s.g_l6b * s.g_l6b + s.u0_phib;
    double c_raw = 0.0;
    for (const auto& [t, v] : lhs) {
        if (!std::isfinite(v)) throw FitError(id + ": non-finite LHS");
        c_raw = std::max(c_raw, v / ((1.0 + std::pow(t, t_exp)) * std::pow(data, data_exp)));
    }
    BoundFit fit;
    fit.bound_id = id;
    const double C = lattice_ceil(c_raw);
    fit.constants = {{"C", C}, {"C_raw", c_raw}, {"data", data}};
    fit.margin = std::numeric_limits<double>::infinity();
    for (const auto& [t, v] : lhs)
        fit.margin = std::min(fit.margin, C * (1.0 + std::pow(t, t_exp)) *
                                                  std::pow(data, data_exp) -
                                              v);
    fit.slope = envelope_slope(lhs);
    fit.pass = fit.margin >= 0.0 && fit.slope <= t_exp + 0.5;
    return fit;
}

}  // namespace

BoundFit fit_growth_bound(const DiagnosticsSeries& s) {
    return polynomial_growth_fit(s, "0.4", 4.0, 2.5);
}

BoundFit fit_dissipative_single(const DiagnosticsSeries& s, const std::string& bound_id) {
    const auto lhs = bound_lhs(s, true);
    if (lhs.size() < 4) throw FitError(bound_id + ": too few aligned records (need T > 1)");
    std::vector<double> ts, vals;
    for (const auto& [t, v] : lhs) {
        if (!std::isfinite(v)) throw FitError(bound_id + ": non-finite LHS");
        ts.push_back(t);
        vals.push_back(v);
    }
    const DecayFit d = envelope_decay_fit(ts, vals);
    BoundFit fit;
    fit.bound_id = bound_id;
    fit.constants = {{"A", d.A}, {"A_raw", d.A_raw}, {"B", d.B}, {"sigma", d.sigma}};
    fit.margin = d.margin;
    fit.pass = d.pass;
    fit.note = d.note;
    return fit;
}

BoundFit fit_dissipative_bound(const std::vector<const DiagnosticsSeries*>& runs) {
    if (runs.size() < 2)
        throw FitError("fit_dissipative_bound: need at least two runs for the "
                       "level-independence check");
    BoundFit fit;
    fit.bound_id = "thd.1";
    fit.pass = true;
    double a_min = std::numeric_limits<double>::infinity(), a_max = 0.0;
    double u0_min = std::numeric_limits<double>::infinity(), u0_max = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < runs.size(); ++r) {
        BoundFit single = fit_dissipative_single(*runs[r], "thd.1");
        const double floor = 1e-6 * (1.0 + runs[r]->g_l6b * runs[r]->g_l6b);
        const double a = single.constant("A_raw") + floor;
        a_min = std::min(a_min, a);
        a_max = std::max(a_max, a);
        u0_min = std::min(u0_min, runs[r]->u0_phib);
        u0_max = std::max(u0_max, runs[r]->u0_phib);
        margin = std::min(margin, single.margin);
        fit.pass = fit.pass && single.pass;
        std::ostringstream key;
        key << "sigma[" << r << "]";
        fit.constants.emplace_back(key.str(), single.constant("sigma"));
        key.str("");
        key << "A_raw[" << r << "]";
        fit.constants.emplace_back(key.str(), single.constant("A_raw"));
    }
    const double level_factor = a_max / a_min;
    fit.constants.emplace_back("level_factor", level_factor);
    // Q(z) = A z^q + B reporting: exponent from the initial-data spread.
    if (u0_max > u0_min && u0_min > 0.0) {
        const double q = std::log(a_max / a_min) / std::log(u0_max / u0_min);
        fit.constants.emplace_back("q_est", std::min(q, 8.0));
    }
    fit.margin = margin;
    fit.pass = fit.pass && level_factor <= 2.0;
    if (level_factor > 2.0) fit.note = "long-time level depends on the initial data";
    return fit;
}

BoundFit fit_singular_bound(const DiagnosticsSeries& s, bool oono) {
    if (!(s.kappa > 1.0))
        throw FitError("fit_singular_bound: series lacks kappa (regular potential input)");
    if (oono) return fit_dissipative_single(s, "0.bbsing");
    BoundFit fit = polynomial_growth_fit(s, "0.bsing", 3.0 * s.kappa + 1.0,
                                         3.0 * s.kappa - 0.5);
    fit.constants.emplace_back("kappa", s.kappa);
    return fit;
}

BoundFit fit_energy_inequality(const DiagnosticsSeries& s) {
    const bool oono = s.lambda > 0.0;
    const std::string id = oono ? "energy-inequality-oono" : "energy-inequality";
    const auto& r = s.records;
    if (r.size() < 3) throw FitError(id + ": need at least three records");
    const double p_exp = (s.kappa > 1.0) ? 6.0 * s.kappa - 1.0 : 5.0;
    const double q_exp = (s.kappa > 1.0) ? 2.0 * s.kappa : 2.0;
    const double beta = 0.25;
    const double g_term = s.g_l6b * s.g_l6b + 1.0;
    double c_raw = 0.0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double dEdt =
            (r[i + 1].E_phi[0] - r[i - 1].E_phi[0]) / (r[i + 1].t - r[i - 1].t);
        const double E = r[i].E_phi[0];
        const double eps = r[i].eps_t;
        double lhs = dEdt + beta * r[i].grad_mu_l2phi2[0];
        if (oono) lhs += 0.5 * s.lambda * E;
        const double rhs_base = eps * eps * E + std::pow(eps, p_exp) * std::pow(E, q_exp) +
                                std::pow(eps, -3.0) * g_term;
        c_raw = std::max(c_raw, lhs / rhs_base);
    }
    BoundFit fit;
    fit.bound_id = id;
    const double C = lattice_ceil(std::max(c_raw, 1e-6));
    fit.constants = {{"C", C}, {"C_raw", c_raw}, {"beta", beta}};
    fit.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double dEdt =
            (r[i + 1].E_phi[0] - r[i - 1].E_phi[0]) / (r[i + 1].t - r[i - 1].t);
        const double E = r[i].E_phi[0];
        const double eps = r[i].eps_t;
        double lhs = dEdt + beta * r[i].grad_mu_l2phi2[0];
        if (oono) lhs += 0.5 * s.lambda * E;
        const double rhs = C * (eps * eps * E + std::pow(eps, p_exp) * std::pow(E, q_exp) +
                                std::pow(eps, -3.0) * g_term);
        fit.margin = std::min(fit.margin, rhs - lhs);
    }
    fit.pass = std::isfinite(fit.margin) && fit.margin >= 0.0;
    return fit;
}

InequalityReport inequality_residuals(const SimState& state, const SimConfig& cfg,
                                      const WeightFn& w) {
    const GridSpec& g = cfg.grid;
    const double cell = std::pow(g.spacing(), g.dim);
    InequalityReport rep;
    const Field phi = weight_field(w, g);
    const Field phi3 = weight_field_pow(w, g, 3.0);
    const Field& mu = state_mu(state, cfg);

    // (phi^3, |f(u)|^6)
    for (std::size_t i = 0; i < phi3.size(); ++i)
        rep.lhs_f6 += phi3[i] * std::pow(eval_f(cfg.potential, state.u[i]), 6.0);
    rep.lhs_f6 *= cell;

    // ||grad(phi^(1/2) mu)||^2 via the product rule with the analytic grad(phi).
    {
        std::vector<double> sqrt_phi(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) sqrt_phi[i] = std::sqrt(phi[i]);
        double acc = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const Field dmu = gradient(mu, a);
            const Field dphi = weight_field_grad(w, g, a);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                const double term =
                    0.5 * dphi[i] / sqrt_phi[i] * mu[i] + sqrt_phi[i] * dmu[i];
                acc += term * term;
            }
        }
        rep.grad_phimu_sq = acc * cell;
    }
    const double g6 = lp_uniformly_local(cfg.g, 6.0, 1.0, 0).value;
    rep.rhs_f6 = std::pow(rep.grad_phimu_sq, 3.0) +
                 std::pow(w.eps, -3.0) * (1.0 + std::pow(g6, 6.0));
    rep.ratio_f6 = rep.lhs_f6 / rep.rhs_f6;

    // (phi, |D^2 u|^2) vs (phi, |grad mu|^2 + |grad u|^2 + |g|^2)
    {
        std::vector<Field> first;
        for (int a = 0; a < g.dim; ++a) first.push_back(gradient(state.u, a));
        double lhs = 0.0;
        for (int a = 0; a < g.dim; ++a)
            for (int b = a; b < g.dim; ++b) {
                const Field dab = gradient(first[a], b);
                const double mult = (a == b) ? 1.0 : 2.0;
                for (std::size_t i = 0; i < phi.size(); ++i)
                    lhs += mult * phi[i] * dab[i] * dab[i];
            }
        rep.lhs_h2 = lhs * cell;
        const Field gsq_mu = gradient_sq(mu);
        const Field gsq_u = gradient_sq(state.u);
        double rhs = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i)
            rhs += phi[i] * (gsq_mu[i] + gsq_u[i] + cfg.g[i] * cfg.g[i]);
        rep.rhs_h2 = rhs * cell;
        rep.ratio_h2 = rep.lhs_h2 / std::max(rep.rhs_h2, 1e-300);
    }
    return rep;
}

StabilityResult stability_experiment(const SimConfig& cfg, const DiagnosticsConfig& diag,
                                     double delta0, std::uint64_t perturbation_seed) {
    // Uniqueness hypotheses first.
    if (cfg.potential.kind == PotentialKind::regular_polynomial) {
        try {
            validate_regular(cfg.potential);
        } catch (const ValidationError& e) {
            throw AssumptionError(std::string("stability_experiment: ") + e.what());
        }
    } else {
        AssumptionReport rep = validate_singular(cfg.potential);
        if (!rep.uniqueness_ok)
            throw AssumptionError(
                "stability_experiment: singular uniqueness condition kappa1 < 8/5 fails "
                "(needs l > 5/3)");
    }

    const int stride = resolve_stride(cfg.grid, diag.stride);
    Field u1 = build_initial_condition(cfg);
    Field u2 = u1;
    {
        Rng rng(mix_seed(perturbation_seed, 0xD1FF));
        for (auto& v : u2.values) v += delta0 * rng.symmetric(1.0);
    }

    // Freeze the stabilization shift so both solutions see the same scheme.
    SimConfig run_cfg = cfg;
    if (run_cfg.stabilization < 0.0) {
        double peak = 2.0;
        for (double v : u1.values) peak = std::max(peak, eval_fprime(cfg.potential, v));
        run_cfg.stabilization = peak + 1.0;
    }

    // 8-point Gauss-Legendre on [0, 1].
    static const double gx[8] = {0.5 - 0.4801449282487682, 0.5 - 0.3983332387068134,
                                 0.5 - 0.2627662049581645, 0.5 - 0.0917173212478249,
                                 0.5 + 0.0917173212478249, 0.5 + 0.2627662049581645,
                                 0.5 + 0.3983332387068134, 0.5 + 0.4801449282487682};
    static const double gw[8] = {0.1012285362903763 / 2, 0.2223810344533745 / 2,
                                 0.3137066458778873 / 2, 0.3626837833783620 / 2,
                                 0.3626837833783620 / 2, 0.3137066458778873 / 2,
                                 0.2223810344533745 / 2, 0.1012285362903763 / 2};

    StabilityResult result;
    SimState s1(0.0, std::move(u1));
    SimState s2(0.0, std::move(u2));
    s1.dt_current = s2.dt_current = run_cfg.dt;

    auto record = [&](const SimState& a, const SimState& b) {
        StabilityRecord rec;
        rec.t = a.t;
        Field v(cfg.grid);
        for (std::size_t i = 0; i < v.size(); ++i) v.values[i] = a.u[i] - b.u[i];
        rec.v_wm12b = wm12b(v, diag.R, stride).value;
        rec.mean_v = mean(v);
        Field l(cfg.grid);
        for (std::size_t i = 0; i < l.size(); ++i) {
            double acc = 0.0;
            for (int q = 0; q < 8; ++q)
                acc += gw[q] *
                       eval_fprime(cfg.potential, gx[q] * a.u[i] + (1.0 - gx[q]) * b.u[i]);
            l.values[i] = acc;
        }
        rec.l_l1b = lp_uniformly_local(l, 1.0, diag.R, stride).value;
        Field F1(cfg.grid, abs_F_values(a.u, cfg.potential));
        Field F2(cfg.grid, abs_F_values(b.u, cfg.potential));
        rec.F1_l1b = lp_uniformly_local(F1, 1.0, diag.R, stride).value;
        rec.F2_l1b = lp_uniformly_local(F2, 1.0, diag.R, stride).value;
        result.records.push_back(rec);
    };

    record(s1, s2);
    const double t_stop = run_cfg.t_end * (1.0 - 1e-12);
    long long since = 0;
    const int cadence = std::max(1, diag.cadence);
    while (s1.t < t_stop) {
        s1 = step(std::move(s1), run_cfg);
        s2 = step(std::move(s2), run_cfg);
        if (std::abs(s1.t - s2.t) > 1e-12)
            throw StepError("stability_experiment: safeguard desynchronized the pair");
        if (++since >= cadence || s1.t >= t_stop) {
            since = 0;
            record(s1, s2);
        }
    }

    result.v_initial = result.records.front().v_wm12b;
    result.v_final = result.records.back().v_wm12b;

    // Lipschitz bound: ||v(t)|| <= C_T ||v(0)||.
    {
        BoundFit fit;
        fit.bound_id = "1.2";
        if (result.v_initial > 0.0) {
            double c_raw = 0.0;
            for (const auto& rec : result.records)
                c_raw = std::max(c_raw, rec.v_wm12b / result.v_initial);
            const double C = lattice_ceil(c_raw);
            fit.constants = {{"C_T", C}, {"C_T_raw", c_raw}};
            fit.margin = std::numeric_limits<double>::infinity();
            for (const auto& rec : result.records)
                fit.margin = std::min(fit.margin, C * result.v_initial - rec.v_wm12b);
            fit.pass = fit.margin >= 0.0;
        } else {
            fit.constants = {{"C_T", 1.0}};
            fit.margin = 0.0;
            fit.pass = true;
            fit.note = "zero perturbation: v stays identically zero";
        }
        result.lipschitz = fit;
    }

    // Coefficient bound: ||l|| <= C(||F(u1)|| + ||F(u2)|| + 1).
    {
        double c_raw = 0.0;
        for (const auto& rec : result.records)
            c_raw = std::max(c_raw, rec.l_l1b / (rec.F1_l1b + rec.F2_l1b + 1.0));
        BoundFit fit;
        fit.bound_id = "l-coefficient";
        const double C = lattice_ceil(c_raw);
        fit.constants = {{"C", C}, {"C_raw", c_raw}};
        fit.margin = std::numeric_limits<double>::infinity();
        for (const auto& rec : result.records)
            fit.margin =
                std::min(fit.margin, C * (rec.F1_l1b + rec.F2_l1b + 1.0) - rec.l_l1b);
        fit.pass = fit.margin >= 0.0;
        result.l_bound = fit;
    }

    // Gronwall rate from the recorded coefficient series.
    if (result.v_initial > 0.0) {
        double integral = 0.0, c_best = 0.0;
        for (std::size_t i = 1; i < result.records.size(); ++i) {
            const auto& a = result.records[i - 1];
            const auto& b = result.records[i];
            integral += 0.5 * (b.t - a.t) * ((a.l_l1b + 1.0) + (b.l_l1b + 1.0));
            if (integral > 0.0 && b.v_wm12b > 0.0)
                c_best = std::max(
                    c_best, std::log(b.v_wm12b * b.v_wm12b /
                                     (result.v_initial * result.v_initial)) /
                                integral);
        }
        result.gronwall_c = c_best;
    }
    return result;
}

SmoothingResult smoothing_experiment(const SimConfig& cfg, const DiagnosticsConfig& diag,
                                     double t_min) {
    if (!(cfg.lambda > 0.0))
        throw ValidationError("smoothing_experiment: requires lambda > 0 (Oono term)");
    const int stride = resolve_stride(cfg.grid, diag.stride);
    SmoothingResult result;

    RunProbes probes;
    probes.cadence = std::max(1, diag.cadence);
    auto measure = [&](const SimState& st) {
        const Field& mu = state_mu(st, cfg);
        Field dtu = laplacian(mu);
        for (std::size_t i = 0; i < dtu.size(); ++i)
            dtu.values[i] -= cfg.lambda * st.u[i];
        result.records.emplace_back(st.t, wm12b(dtu, diag.R, stride).value);
    };
    // Dense sampling on (0, 1], cadence afterwards.
    probes.on_step = [&](const SimState& st) {
        if (st.t <= 1.0 + 1e-12) measure(st);
    };
    probes.on_record = [&](const SimState& st) {
        if (st.t > 1.0 + 1e-12) measure(st);
    };
    run(cfg, probes);

    // Early log-log slope on a window hugging t -> 0+, where a t^{-1/2}
    // blow-up reads -1/2 but plain exponential relaxation reads ~0.
    {
        const double t_hi = std::min(0.5, 20.0 * t_min);
        std::vector<double> xs, ys;
        for (const auto& [t, v] : result.records)
            if (t >= t_min && t <= t_hi && v > 0.0) {
                xs.push_back(std::log(t));
                ys.push_back(std::log(v));
            }
        result.slope_early = ls_slope(xs, ys);
    }

    // 3.dtsm envelope C t^{-1/2} on (t_min, 1].
    {
        double c_raw = 0.0;
        int used = 0;
        for (const auto& [t, v] : result.records)
            if (t >= t_min && t <= 1.0 + 1e-12) {
                c_raw = std::max(c_raw, v * std::sqrt(t));
                ++used;
            }
        BoundFit fit;
        fit.bound_id = "3.dtsm";
        const double C = lattice_ceil(c_raw);
        fit.constants = {{"C", C}, {"C_raw", c_raw}};
        fit.margin = std::numeric_limits<double>::infinity();
        for (const auto& [t, v] : result.records)
            if (t >= t_min && t <= 1.0 + 1e-12)
                fit.margin = std::min(fit.margin, C / std::sqrt(t) - v);
        fit.slope = result.slope_early;
        fit.pass = used >= 3 && std::isfinite(fit.margin) && fit.margin >= 0.0;
        result.envelope = fit;
    }

    // dtdis-shaped envelope for t >= 1.
    {
        std::vector<double> ts, vals;
        for (const auto& [t, v] : result.records)
            if (t >= 1.0 - 1e-12) {
                ts.push_back(t);
                vals.push_back(v);
            }
        BoundFit fit;
        fit.bound_id = "dtdis";
        if (ts.size() >= 4) {
            const DecayFit d = envelope_decay_fit(ts, vals);
            fit.constants = {{"A", d.A}, {"A_raw", d.A_raw}, {"B", d.B}, {"gamma", d.sigma}};
            fit.margin = d.margin;
            fit.pass = d.margin >= -1e-12;
            fit.note = d.note;
            double level = 0.0;
            for (std::size_t i = ts.size() - std::max<std::size_t>(1, ts.size() / 4);
                 i < ts.size(); ++i)
                level = std::max(level, vals[i]);
            result.level_late = level;
        } else {
            fit.note = "run too short for the late-time fit";
        }
        result.late = fit;
    }
    return result;
}

}  // namespace ulch
