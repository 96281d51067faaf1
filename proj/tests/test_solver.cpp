#include <doctest.h>

#include <cmath>
#include <complex>

#include "ulch/norms.hpp"
#include "ulch/solver.hpp"

using namespace ulch;

namespace {
constexpr double kPi = 3.14159265358979323846;

SimConfig cubic_config(int dim, int n, double L) {
    SimConfig cfg;
    cfg.grid = GridSpec(dim, n, L);
    cfg.potential = PotentialSpec::regular({0.0, -1.0, 0.0, 1.0}, std::make_pair(2.0, 1.0));
    cfg.g = Field(cfg.grid, 0.0);
    return cfg;
}
}  // namespace

TEST_CASE("compute_mu examples") {
    SimConfig cfg = cubic_config(1, 64, kPi);
    Field zero(cfg.grid, 0.0);
    CHECK(max_abs(compute_mu(zero, cfg)) <= 1e-14);

    Field c(cfg.grid, 0.4);
    Field mu = compute_mu(c, cfg);
    const double expect = eval_f(cfg.potential, 0.4);
    for (std::size_t i = 0; i < mu.size(); ++i)
        CHECK(mu[i] == doctest::Approx(expect).epsilon(1e-13));

    // u = sin(x): mu = sin + sin^3 - sin = sin^3 pointwise.
    Field s = Field::sample(cfg.grid,
                            [](const std::array<double, 3>& x) { return std::sin(x[2]); });
    Field mus = compute_mu(s, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        const double sv = s[i];
        err = std::max(err, std::abs(mus[i] - sv * sv * sv));
    }
    CHECK(err <= 1e-10);
}

TEST_CASE("compute_mu rejects singular range violations") {
    SimConfig cfg;
    cfg.grid = GridSpec(1, 32, 4.0);
    cfg.potential = PotentialSpec::singular(2.0);
    cfg.g = Field(cfg.grid, 0.0);
    Field u(cfg.grid, 0.5);
    CHECK_NOTHROW(compute_mu(u, cfg));
    Field bad(cfg.grid, 1.0);
    CHECK_THROWS_AS(compute_mu(bad, cfg), DomainError);
}

TEST_CASE("constant states are fixed points of plain CH") {
    SimConfig cfg = cubic_config(1, 64, kPi);
    cfg.dt = 0.01;
    SimState st(0.0, Field(cfg.grid, 0.3));
    st.dt_current = cfg.dt;
    for (int i = 0; i < 50; ++i) st = step(std::move(st), cfg);
    for (std::size_t i = 0; i < st.u.size(); ++i)
        CHECK(st.u[i] == doctest::Approx(0.3).epsilon(1e-13));
}

TEST_CASE("zero mode decays exactly through the scheme for lambda > 0") {
    SimConfig cfg = cubic_config(1, 64, kPi);
    cfg.lambda = 0.7;
    cfg.dt = 0.02;
    const double c0 = 0.25;
    SimState st(0.0, Field(cfg.grid, c0));
    st.dt_current = cfg.dt;
    const int n = 200;
    for (int i = 0; i < n; ++i) st = step(std::move(st), cfg);
    const double expect = c0 * std::pow(1.0 + cfg.dt * cfg.lambda, -n);
    CHECK(std::abs(mean(st.u) - expect) <= 1e-12);
}

TEST_CASE("mass is conserved to round-off for lambda = 0") {
    SimConfig cfg = cubic_config(2, 32, 4.0);
    cfg.dt = 5e-3;
    cfg.seed = 33;
    SimState st(0.0, build_initial_condition(cfg));
    st.dt_current = cfg.dt;
    const double m0 = mean(st.u);
    for (int i = 0; i < 400; ++i) st = step(std::move(st), cfg);
    CHECK(std::abs(mean(st.u) - m0) <= 1e-12);
}

TEST_CASE("mass conservation holds with nonzero-mean forcing") {
    SimConfig cfg = cubic_config(1, 64, kPi);
    cfg.dt = 1e-3;
    cfg.g = Field(cfg.grid, 0.8);  // constant forcing: absorbed into mu
    SimState st(0.0, Field(cfg.grid, 0.1));
    st.dt_current = cfg.dt;
    const double m0 = mean(st.u);
    for (int i = 0; i < 100; ++i) st = step(std::move(st), cfg);
    CHECK(std::abs(mean(st.u) - m0) <= 1e-12);
}

TEST_CASE("linearized scheme tracks the exact mode decay to first order") {
    // f(u) = u, s = 0: per mode u' = u (1 - dt k^2) / (1 + dt(k^4 + lambda)).
    SimConfig cfg;
    cfg.grid = GridSpec(1, 32, kPi);
    cfg.potential = PotentialSpec::regular({0.0, 1.0});
    cfg.g = Field(cfg.grid, 0.0);
    cfg.lambda = 0.5;
    cfg.stabilization = 0.0;
    const double dt = 1e-3;
    cfg.dt = dt;
    Field u0 = Field::sample(cfg.grid, [](const std::array<double, 3>& x) {
        return std::sin(x[2]) + 0.3 * std::cos(2 * x[2]) + 0.1 * std::sin(3 * x[2]);
    });
    SimState st(0.0, u0);
    st.dt_current = dt;
    const int n = 200;
    for (int i = 0; i < n; ++i) st = step(std::move(st), cfg);
    auto c = spectrum(st.u);
    auto c0 = spectrum(u0);
    for (int mode : {1, 2, 3}) {
        const double k2 = std::pow(kPi * mode / cfg.grid.half_length, 2.0);
        // Exact symbol of du/dt = -(k^4 + k^2 + lambda) u (f(u) = u explicit).
        const double exact = std::exp(-(k2 * k2 + k2 + cfg.lambda) * n * dt);
        const double numeric = std::abs(c[mode]) / std::abs(c0[mode]);
        // First-order scheme: O(dt) relative error over the horizon.
        CHECK(numeric == doctest::Approx(exact).epsilon(50 * dt));
    }
}

TEST_CASE("box energy is non-increasing along CH steps") {
    SimConfig cfg = cubic_config(1, 128, 8.0);
    cfg.dt = 2e-3;
    cfg.seed = 7;
    SimState st(0.0, build_initial_condition(cfg));
    st.dt_current = cfg.dt;
    double prev = box_energy(st.u, cfg);
    for (int i = 0; i < 500; ++i) {
        st = step(std::move(st), cfg);
        const double cur = box_energy(st.u, cfg);
        CHECK(cur <= prev + 1e-8 * std::abs(prev));
        prev = cur;
    }
}

TEST_CASE("dt refinement converges at first order") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.stabilization = 2.5;  // fixed so both runs use the same scheme
    cfg.seed = 12;
    Field u0 = build_initial_condition(cfg);
    auto advance = [&](double dt) {
        SimState st(0.0, u0);
        st.dt_current = dt;
        SimConfig c = cfg;
        c.dt = dt;
        const long long n = llround(1.0 / dt);
        for (long long i = 0; i < n; ++i) st = step(std::move(st), c);
        return st.u;
    };
    Field a = advance(4e-3);
    Field b = advance(2e-3);
    Field c = advance(1e-3);
    double d_ab = 0.0, d_bc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d_ab = std::max(d_ab, std::abs(a[i] - b[i]));
        d_bc = std::max(d_bc, std::abs(b[i] - c[i]));
    }
    CHECK(d_ab > 0.0);
    const double rate = d_ab / d_bc;
    CHECK(rate >= 1.5);
    CHECK(rate <= 3.0);
}

TEST_CASE("singular safeguard rejects steps and halves dt") {
    SimConfig cfg;
    cfg.grid = GridSpec(1, 64, 4.0);
    cfg.potential = PotentialSpec::singular(2.0);
    // Strong constant forcing pushes the state toward the obstacle.
    cfg.g = Field(cfg.grid, 0.0);
    for (std::size_t i = 0; i < cfg.g.size(); ++i)
        cfg.g.values[i] = 40.0 * std::sin(2 * kPi * i / cfg.g.size());
    cfg.dt = 0.05;
    cfg.delta_min = 0.2;
    cfg.ic.amplitude = 0.75;
    cfg.seed = 3;
    SimState st(0.0, build_initial_condition(cfg));
    st.dt_current = cfg.dt;
    bool halved = false;
    for (int i = 0; i < 40 && !halved; ++i) {
        st = step(std::move(st), cfg);
        halved = st.dt_current < cfg.dt;
        CHECK(max_abs(st.u) <= 1.0 - cfg.delta_min + 1e-12);
    }
    CHECK(halved);

    // With dt_min close to dt the same setup must fail loudly.
    SimConfig hard = cfg;
    hard.dt_min = cfg.dt * 0.6;
    SimState st2(0.0, build_initial_condition(hard));
    st2.dt_current = hard.dt;
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 40; ++i) st2 = step(std::move(st2), hard);
        }(),
        SafeguardError);
}

TEST_CASE("run is deterministic for a fixed seed") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.dt = 1e-2;
    cfg.t_end = 0.5;
    cfg.seed = 90210;
    SimState a = run(cfg);
    SimState b = run(cfg);
    REQUIRE(a.u.size() == b.u.size());
    for (std::size_t i = 0; i < a.u.size(); ++i) CHECK(a.u[i] == b.u[i]);
    CHECK(a.t == b.t);
}

TEST_CASE("run with t_end = 0 only reports the initial state") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.t_end = 0.0;
    int records = 0;
    RunProbes probes;
    probes.on_record = [&](const SimState&) { ++records; };
    SimState st = run(cfg, probes);
    CHECK(records == 1);
    CHECK(st.step_count == 0);
}

TEST_CASE("run validates the potential before stepping") {
    SimConfig cfg = cubic_config(1, 64, 8.0);
    cfg.potential = PotentialSpec::regular({0.0, 0.0, 1.0});  // u^2: invalid
    CHECK_THROWS_AS(run(cfg), ValidationError);
}

TEST_CASE("initial condition amplitude defaults") {
    SimConfig reg = cubic_config(1, 64, 8.0);
    CHECK(reg.ic_amplitude() == doctest::Approx(0.5));
    SimConfig sing;
    sing.grid = GridSpec(1, 64, 8.0);
    sing.potential = PotentialSpec::singular(2.0);
    sing.delta_min = 0.05;
    CHECK(sing.ic_amplitude() == doctest::Approx(0.9 * 0.95));
    sing.g = Field(sing.grid, 0.0);
    Field u0 = build_initial_condition(sing);
    CHECK(max_abs(u0) <= 1.0 - sing.delta_min);
}

TEST_CASE("rough initial data has the requested spectral decay") {
    SimConfig cfg = cubic_config(1, 256, 8.0);
    cfg.ic.kind = ICKind::rough_spectral;
    cfg.ic.rough_exponent = 2.0;
    cfg.ic.amplitude = 0.4;
    cfg.seed = 5;
    Field u0 = build_initial_condition(cfg);
    CHECK(max_abs(u0) == doctest::Approx(0.4).epsilon(1e-12));
    auto c = spectrum(u0);
    // Amplitude envelope ~ (1+k^2)^{-1}: high modes are much weaker.
    const auto klo = spectral_wavevector(u0.grid, 4);
    const auto khi = spectral_wavevector(u0.grid, 100);
    const double rlo = std::abs(c[4]) * (1.0 + klo[2] * klo[2]);
    const double rhi = std::abs(c[100]) * (1.0 + khi[2] * khi[2]);
    CHECK(rlo == doctest::Approx(rhi).epsilon(1e-6));
}

TEST_CASE("dealias policy") {
    SimConfig cubic = cubic_config(1, 64, 8.0);
    CHECK_FALSE(cubic.dealias_enabled());  // degree 3
    cubic.dealias = 1;
    CHECK(cubic.dealias_enabled());
    SimConfig quintic = cubic;
    quintic.dealias = -1;
    quintic.potential = PotentialSpec::regular({0.0, -1.0, 0.0, 0.0, 0.0, 1.0});
    CHECK(quintic.dealias_enabled());  // degree 5
    SimConfig sing;
    sing.grid = GridSpec(1, 64, 8.0);
    sing.potential = PotentialSpec::singular(2.0);
    CHECK(sing.dealias_enabled());
    sing.dealias = 0;
    CHECK_FALSE(sing.dealias_enabled());
}
