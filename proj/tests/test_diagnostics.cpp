#include <doctest.h>

#include <cmath>

#include "ulch/diagnostics.hpp"
#include "ulch/oracle.hpp"

using namespace ulch;

namespace {

SimConfig cubic_config(int dim, int n, double L) {
    SimConfig cfg;
    cfg.grid = GridSpec(dim, n, L);
    cfg.potential = PotentialSpec::regular({0.0, -1.0, 0.0, 1.0}, std::make_pair(2.0, 1.0));
    cfg.g = Field(cfg.grid, 0.0);
    return cfg;
}

DiagnosticsConfig basic_diag(double eps = 0.25) {
    DiagnosticsConfig diag;
    diag.schedule = EpsilonSchedule::constant_eps(eps);
    diag.cadence = 10;
    return diag;
}

// Hand-built series for exercising the fit logic in isolation.
DiagnosticsSeries synthetic_series(double level, double transient, double rate, double T,
                                   double dt) {
    DiagnosticsSeries s;
    s.g_l6b = 0.5;
    for (double t = 0.0; t <= T + 1e-9; t += dt) {
        DiagnosticsRecord r;
        r.t = t;
        const double lhs = level + transient * std::exp(-rate * t);
        r.w12b_u = std::sqrt(lhs);  // phib = w12b^2 with no F term
        r.phib = lhs;
        r.stl2b_grad_mu = 0.0;
        r.stl2b_grad_mu_cum = 0.0;
        r.E_phi = {lhs};
        r.grad_mu_l2phi2 = {0.0};
        r.eps_t = 0.25;
        s.records.push_back(r);
    }
    s.u0_phib = s.records.front().phib;
    s.n_centers = 1;
    return s;
}

}  // namespace

TEST_CASE("record of the zero state") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    DiagnosticsConfig diag = basic_diag();
    Recorder rec(cfg, diag);
    SimState st(0.0, Field(cfg.grid, 0.0));
    rec(st);
    const DiagnosticsRecord& r = rec.series().records.front();
    CHECK(r.w12b_u == 0.0);
    CHECK(r.l1b_F == 0.0);
    CHECK(r.phib == 0.0);
    CHECK(r.mean_u == 0.0);
    CHECK(r.max_abs_u == 0.0);
    CHECK(r.wm12b_dtu <= 1e-12);
    // Weighted energy reduces to the additive constant eps^-3 (g2^2 + 1).
    CHECK(r.E_phi[0] == doctest::Approx(std::pow(0.25, -3.0)).epsilon(1e-12));
}

TEST_CASE("record of a constant state matches closed forms") {
    SimConfig cfg = cubic_config(1, 128, 8.0);  // h = 1/8, R/h = 8
    DiagnosticsConfig diag = basic_diag();
    const double c = 0.3;
    Recorder rec(cfg, diag);
    SimState st(0.0, Field(cfg.grid, c));
    rec(st);
    const DiagnosticsRecord& r = rec.series().records.front();
    const double vol = 2.0;  // (2R)^d, R = 1, d = 1
    CHECK(r.w12b_u * r.w12b_u == doctest::Approx(c * c * vol).epsilon(1e-12));
    CHECK(r.l1b_F ==
          doctest::Approx(std::abs(eval_F(cfg.potential, c)) * vol).epsilon(1e-12));
    CHECK(r.separation == doctest::Approx(1.0 - c).epsilon(1e-14));
    // Signed weighted energy: E - additive = F(c) * ||phi||_1 quadrature.
    WeightFn w{diag.weight_kind, 5.0, 0.25, {0.0, 0.0, 0.0}};
    const double additive = std::pow(0.25, -3.0) *
                            (rec.series().g_l2b * rec.series().g_l2b + 1.0);
    CHECK(r.E_phi[0] - additive ==
          doctest::Approx(eval_F(cfg.potential, c) * weight_l1(w, cfg.grid)).epsilon(1e-10));
}

TEST_CASE("recorder reproduces records from identical snapshots") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.dt = 5e-3;
    cfg.t_end = 0.2;
    cfg.seed = 17;
    DiagnosticsConfig diag = basic_diag();
    RunOutput a = run_with_diagnostics(cfg, diag);
    RunOutput b = run_with_diagnostics(cfg, diag);
    REQUIRE(a.series.records.size() == b.series.records.size());
    for (std::size_t i = 0; i < a.series.records.size(); ++i) {
        CHECK(a.series.records[i].phib == b.series.records[i].phib);
        CHECK(a.series.records[i].E_phi[0] == b.series.records[i].E_phi[0]);
        CHECK(a.series.records[i].stl2b_grad_mu == b.series.records[i].stl2b_grad_mu);
        CHECK(a.series.records[i].wm12b_dtu == b.series.records[i].wm12b_dtu);
    }
}

TEST_CASE("growth fit on a stationary solution") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.ic.kind = ICKind::bump;
    cfg.ic.amplitude = 0.0;  // u identically zero is stationary
    cfg.dt = 1e-2;
    cfg.t_end = 2.0;
    RunOutput out = run_with_diagnostics(cfg, basic_diag());
    BoundFit fit = fit_growth_bound(out.series);
    CHECK(fit.pass);
    CHECK(fit.margin >= 0.0);
    CHECK(std::abs(fit.slope) <= 0.5);
}

TEST_CASE("growth fit on a short spinodal run") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    cfg.dt = 2e-3;
    cfg.t_end = 5.0;
    cfg.seed = 4;
    RunOutput out = run_with_diagnostics(cfg, basic_diag());
    BoundFit fit = fit_growth_bound(out.series);
    CHECK(fit.pass);
    CHECK(fit.slope <= 4.5);
    CHECK(fit.constant("C") > 0.0);
    // Re-checkable from the stored records alone.
    const double data = 1.0 + out.series.g_l6b * out.series.g_l6b + out.series.u0_phib;
    for (const auto& r : out.series.records) {
        const double lhs = r.phib + r.stl2b_grad_mu_cum * r.stl2b_grad_mu_cum;
        CHECK(lhs <= fit.constant("C") * (1.0 + std::pow(r.t, 4.0)) * std::pow(data, 2.5) +
                         1e-9);
    }
}

TEST_CASE("doubling the initial amplitude leaves the fitted growth constant stable") {
    auto fit_for = [](double amplitude) {
        SimConfig cfg = cubic_config(1, 128, 8.0);
        cfg.dt = 2e-3;
        cfg.t_end = 3.0;
        cfg.seed = 44;
        cfg.ic.amplitude = amplitude;
        RunOutput out = run_with_diagnostics(cfg, basic_diag());
        return fit_growth_bound(out.series).constant("C_raw");
    };
    const double c1 = fit_for(0.25);
    const double c2 = fit_for(0.5);
    // The (1 + g^2 + u0)^{5/2} data factor absorbs the doubled amplitude, so
    // the fitted constant must not grow with it (over-absorbing is fine).
    CHECK(c2 <= 2.0 * c1);
}

TEST_CASE("smoothing level decreases monotonically in lambda") {
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.5, 1.0, 2.0}) {
        SimConfig cfg = cubic_config(1, 128, 8.0);
        cfg.lambda = lambda;
        cfg.dt = 1e-3;
        cfg.t_end = 4.0;  // long enough that the lambda-set decay rate shows
        cfg.seed = 23;
        cfg.ic.kind = ICKind::rough_spectral;
        SmoothingResult res = smoothing_experiment(cfg, basic_diag(), 5.0 * cfg.dt);
        CHECK(res.level_late < prev);
        prev = res.level_late;
    }
}

TEST_CASE("dissipative fit recovers the zero-mode decay rate") {
    SimConfig cfg;
    cfg.grid = GridSpec(1, 64, 8.0);
    cfg.potential = PotentialSpec::regular({0.0, 1.0});  // linear f
    cfg.g = Field(cfg.grid, 0.0);
    cfg.lambda = 2.0;
    cfg.dt = 5e-3;
    cfg.t_end = 4.0;
    cfg.ic.kind = ICKind::bump;
    cfg.ic.amplitude = 0.0;
    // Constant initial state: u(t) = c (1 + dt lambda)^{-n} exactly.
    SimConfig state_cfg = cfg;
    state_cfg.ic.kind = ICKind::random_uniform;
    state_cfg.ic.amplitude = 0.0;
    DiagnosticsConfig diag = basic_diag();
    diag.cadence = 5;

    Recorder rec(cfg, diag);
    SimState st(0.0, Field(cfg.grid, 0.25));
    st.dt_current = cfg.dt;
    rec(st);
    const long long n = llround(cfg.t_end / cfg.dt);
    for (long long i = 1; i <= n; ++i) {
        st = step(std::move(st), cfg);
        if (i % diag.cadence == 0) rec(st);
    }
    BoundFit fit = fit_dissipative_single(rec.series(), "thd.1");
    CHECK(fit.pass);
    const double lambda_hat = std::log(1.0 + cfg.dt * cfg.lambda) / cfg.dt;
    CHECK(fit.constant("sigma") >= 0.5 * cfg.lambda);
    CHECK(fit.constant("sigma") == doctest::Approx(2.0 * lambda_hat).epsilon(0.15));
}

TEST_CASE("dissipative fit flags initial-data-dependent levels") {
    DiagnosticsSeries a = synthetic_series(1.0, 5.0, 2.0, 8.0, 0.1);
    DiagnosticsSeries b = synthetic_series(5.0, 5.0, 2.0, 8.0, 0.1);
    std::vector<const DiagnosticsSeries*> runs = {&a, &b};
    BoundFit fit = fit_dissipative_bound(runs);
    CHECK_FALSE(fit.pass);
    CHECK(fit.constant("level_factor") > 2.0);

    DiagnosticsSeries c = synthetic_series(1.1, 8.0, 2.0, 8.0, 0.1);
    std::vector<const DiagnosticsSeries*> ok_runs = {&a, &c};
    BoundFit ok = fit_dissipative_bound(ok_runs);
    CHECK(ok.pass);
    CHECK(ok.constant("level_factor") <= 2.0);

    std::vector<const DiagnosticsSeries*> single = {&a};
    CHECK_THROWS_AS(fit_dissipative_bound(single), FitError);
}

TEST_CASE("degenerate fits are reported when nothing decays") {
    // LHS grows toward its plateau: no decaying transient anywhere, the fit
    // reports sigma = 0 (not dissipative in the thd.1 sense).
    DiagnosticsSeries s;
    s.n_centers = 1;
    for (double t = 0.0; t <= 20.0 + 1e-9; t += 0.1) {
        DiagnosticsRecord r;
        r.t = t;
        r.phib = 2.0 - std::exp(-t);
        r.E_phi = {r.phib};
        r.grad_mu_l2phi2 = {0.0};
        r.eps_t = 0.25;
        s.records.push_back(r);
    }
    s.u0_phib = s.records.front().phib;
    BoundFit fit = fit_dissipative_single(s, "thd.1");
    CHECK_FALSE(fit.pass);
    CHECK(fit.constant("sigma") == 0.0);
    CHECK(fit.note.find("degenerate") != std::string::npos);
    CHECK(fit.margin >= 0.0);  // the constant envelope still covers the data
}

TEST_CASE("singular fit requires kappa and reports the right exponents") {
    DiagnosticsSeries reg = synthetic_series(1.0, 1.0, 1.0, 4.0, 0.1);
    CHECK_THROWS_AS(fit_singular_bound(reg, false), FitError);

    DiagnosticsSeries sing = synthetic_series(1.0, 1.0, 1.0, 6.0, 0.1);
    sing.kappa = 2.0;
    BoundFit fit = fit_singular_bound(sing, false);
    CHECK(fit.bound_id == "0.bsing");
    CHECK(fit.pass);
    CHECK(fit.constant("kappa") == 2.0);
    CHECK(fit.slope <= 3.0 * 2.0 + 1.0 + 0.5);

    BoundFit oono = fit_singular_bound(sing, true);
    CHECK(oono.bound_id == "0.bbsing");
    CHECK(oono.pass);
}

TEST_CASE("energy inequality residual on a CHO run") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    cfg.lambda = 1.0;
    cfg.dt = 2e-3;
    cfg.t_end = 2.0;
    cfg.seed = 21;
    DiagnosticsConfig diag = basic_diag(0.2);
    RunOutput out = run_with_diagnostics(cfg, diag);
    BoundFit fit = fit_energy_inequality(out.series);
    CHECK(fit.bound_id == "energy-inequality-oono");
    CHECK(fit.pass);
    CHECK(fit.margin >= 0.0);
    CHECK(fit.constant("C") > 0.0);
}

TEST_CASE("pointwise inequality residuals") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    WeightFn w{WeightKind::polynomial, 5.0, 0.25, {0.0, 0.0, 0.0}};

    SimState zero(0.0, Field(cfg.grid, 0.0));
    InequalityReport rep0 = inequality_residuals(zero, cfg, w);
    CHECK(rep0.lhs_f6 == 0.0);
    CHECK(rep0.rhs_f6 > 0.0);

    // Smooth bump: the second-derivative ratio stays grid-independent.
    auto bump_ratio = [&](int n) {
        SimConfig c2 = cubic_config(1, n, 8.0);
        Field u = Field::sample(c2.grid, [](const std::array<double, 3>& x) {
            return 0.5 * std::exp(-x[2] * x[2]);
        });
        SimState st(0.0, u);
        return inequality_residuals(st, c2, w).ratio_h2;
    };
    const double r32 = bump_ratio(32);
    const double r64 = bump_ratio(64);
    const double r128 = bump_ratio(128);
    CHECK(r64 == doctest::Approx(r128).epsilon(0.05));
    CHECK(r32 <= 2.0 * r128);
    CHECK(r128 > 0.0);
}

TEST_CASE("stability experiment with zero perturbation") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.dt = 5e-3;
    cfg.t_end = 0.3;
    cfg.seed = 8;
    StabilityResult res = stability_experiment(cfg, basic_diag(), 0.0, 99);
    CHECK(res.v_initial == 0.0);
    CHECK(res.v_final == 0.0);
    CHECK(res.lipschitz.pass);
    CHECK(res.lipschitz.constant("C_T") == 1.0);
    for (const auto& r : res.records) CHECK(r.v_wm12b == 0.0);
}

TEST_CASE("stability experiment scales linearly in the perturbation") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.dt = 2e-3;
    cfg.t_end = 1.0;
    cfg.seed = 10;
    DiagnosticsConfig diag = basic_diag();
    StabilityResult big = stability_experiment(cfg, diag, 1e-4, 55);
    StabilityResult small = stability_experiment(cfg, diag, 5e-5, 55);
    CHECK(big.v_final > 0.0);
    const double ratio = big.v_final / small.v_final;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.10));
    CHECK(big.lipschitz.pass);
    CHECK(big.l_bound.pass);
    CHECK(big.l_bound.margin >= 0.0);
    CHECK(std::isfinite(big.gronwall_c));
    // lambda = 0: the perturbation mean is conserved.
    CHECK(std::abs(big.records.back().mean_v - big.records.front().mean_v) <= 1e-12);
}

TEST_CASE("stability perturbation mean decays through the scheme for lambda > 0") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.lambda = 0.8;
    cfg.dt = 5e-3;
    cfg.t_end = 0.5;
    cfg.seed = 19;
    DiagnosticsConfig diag = basic_diag();
    diag.cadence = 10;
    StabilityResult res = stability_experiment(cfg, diag, 1e-3, 77);
    const double m0 = res.records.front().mean_v;
    CHECK(std::abs(m0) > 0.0);
    for (std::size_t i = 1; i < res.records.size(); ++i) {
        const long long n = llround(res.records[i].t / cfg.dt);
        const double expect = m0 * std::pow(1.0 + cfg.dt * cfg.lambda, -double(n));
        CHECK(std::abs(res.records[i].mean_v - expect) <= 1e-12);
    }
}

TEST_CASE("weighted energies stay nonnegative along a run") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    cfg.lambda = 1.0;
    cfg.dt = 2e-3;
    cfg.t_end = 1.0;
    cfg.seed = 29;
    RunOutput out = run_with_diagnostics(cfg, basic_diag(0.2));
    for (const auto& r : out.series.records)
        for (double e : r.E_phi) CHECK(e >= 0.0);
}

TEST_CASE("stability experiment enforces the uniqueness hypotheses") {
    SimConfig cfg;
    cfg.grid = GridSpec(1, 64, 8.0);
    cfg.potential = PotentialSpec::singular(1.5);  // l <= 5/3: kappa1 >= 8/5
    cfg.g = Field(cfg.grid, 0.0);
    CHECK_THROWS_AS(stability_experiment(cfg, basic_diag(), 1e-4, 1), AssumptionError);
}

TEST_CASE("smoothing experiment requires the Oono term") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    CHECK_THROWS_AS(smoothing_experiment(cfg, basic_diag(), 1e-2), ValidationError);
}

TEST_CASE("smoothing experiment: rough data blows up no worse than t^-1/2") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    cfg.lambda = 1.0;
    cfg.dt = 1e-3;
    cfg.t_end = 1.5;
    cfg.seed = 23;
    cfg.ic.kind = ICKind::rough_spectral;
    cfg.ic.rough_exponent = 2.0;
    DiagnosticsConfig diag = basic_diag();
    const double t_min = 5.0 * cfg.dt;
    SmoothingResult rough = smoothing_experiment(cfg, diag, t_min);
    CHECK(rough.envelope.pass);
    CHECK(rough.slope_early <= -0.05);   // genuine blow-up toward t -> 0+
    CHECK(rough.slope_early >= -0.75);   // no worse than the t^-1/2 envelope allows

    SimConfig smooth = cfg;
    smooth.ic.kind = ICKind::bump;
    smooth.ic.amplitude = 0.4;
    smooth.ic.width = 3.0;  // slow control: relaxation far below the window scale
    SmoothingResult control = smoothing_experiment(smooth, diag, t_min);
    // No blow-up for smooth data (a positive slope just tracks the cubic
    // instability, which is fine; divergence toward t -> 0+ is not).
    CHECK(control.slope_early >= -0.25);
    // Rough data starts with a much larger time derivative than the control.
    CHECK(rough.records.front().second > 3.0 * control.records.front().second);
}
