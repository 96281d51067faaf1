#include <doctest.h>

#include <cmath>

#include "ulch/norms.hpp"
#include "ulch/oracle.hpp"
#include "ulch/solver.hpp"

using namespace ulch;

namespace {
constexpr double kPi = 3.14159265358979323846;

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-30});
}
}  // namespace

TEST_CASE("naive transforms agree with the spectral operators") {
    for (int d = 1; d <= 3; ++d) {
        GridSpec g(d, d == 1 ? 32 : 16, 2.0);
        Field f = random_field(g, 10 + d);
        for (int a = 0; a < d; ++a) {
            Field ga = gradient(f, a);
            Field gb = oracle::brute_gradient(f, a);
            double err = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i)
                err = std::max(err, std::abs(ga[i] - gb[i]));
            CHECK(err <= 1e-10 * std::max(1.0, max_abs(ga)));
        }
        Field ha = helmholtz_inverse(f);
        Field hb = oracle::brute_helmholtz_inverse(f);
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            err = std::max(err, std::abs(ha[i] - hb[i]));
        CHECK(err <= 1e-11);
    }
}

TEST_CASE("brute norms: zero field and guards") {
    GridSpec g(1, 32, 4.0);
    Field zero(g, 0.0);
    WeightFn w{WeightKind::polynomial, 5.0, 0.5, {0.0, 0.0, 0.0}};
    CHECK(oracle::brute_lp_weighted(zero, w, 2.0) == 0.0);
    CHECK(oracle::brute_lp_uniformly_local(zero, 2.0, 1.0, 1) == 0.0);
    GridSpec big(1, 64, 4.0);
    Field bf(big, 1.0);
    CHECK_THROWS_AS(oracle::brute_lp_weighted(bf, w, 2.0), SizeError);
}

TEST_CASE("norm oracle equivalence on random fields") {
    for (int d = 1; d <= 3; ++d) {
        GridSpec g(d, d == 1 ? 32 : 16, 2.0);
        WeightFn w{WeightKind::polynomial, 5.0, 0.4, {0.0, 0.0, 0.25}};
        for (int s = 0; s < 3; ++s) {
            Field f = random_field(g, 100 * d + s);
            CHECK(rel_diff(lp_weighted(f, w, 2.0).value,
                           oracle::brute_lp_weighted(f, w, 2.0)) <= 1e-10);
            CHECK(rel_diff(lp_weighted(f, w, 1.0).value,
                           oracle::brute_lp_weighted(f, w, 1.0)) <= 1e-10);
            CHECK(rel_diff(lp_uniformly_local(f, 2.0, 1.0, 1).value,
                           oracle::brute_lp_uniformly_local(f, 2.0, 1.0, 1)) <= 1e-10);
            CHECK(rel_diff(lp_uniformly_local(f, 6.0, 0.5, 1).value,
                           oracle::brute_lp_uniformly_local(f, 6.0, 0.5, 1)) <= 1e-10);
            CHECK(rel_diff(w12b(f, 1.0, 1).value, oracle::brute_w12b(f, 1.0, 1)) <= 1e-10);
            CHECK(rel_diff(wm12b(f, 1.0, 1).value, oracle::brute_wm12b(f, 1.0, 1)) <= 1e-10);
        }
        std::vector<Field> series;
        for (int s = 0; s < 4; ++s) series.push_back(random_field(g, 500 * d + s));
        CHECK(rel_diff(spacetime_ul(series, 0.5, 1.0, 1.0, 1).value,
                       oracle::brute_spacetime_ul(series, 0.5, 1.0, 1.0, 1)) <= 1e-10);
    }
}

TEST_CASE("fd_run keeps constants constant") {
    GridSpec g(1, 32, kPi);
    oracle::OracleConfig cfg;
    cfg.potential = PotentialSpec::regular({0.0, -1.0, 0.0, 1.0});
    Field u0(g, 0.37);
    Field zero(g, 0.0);
    Field out = oracle::fd_run(cfg, u0, zero, 0.01);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out[i] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("fd_run stability guard") {
    GridSpec g(1, 32, kPi);
    oracle::OracleConfig cfg;
    cfg.potential = PotentialSpec::regular({0.0, 1.0});
    cfg.dt_e = 1.0;  // far above 0.1 h^4
    Field u0(g, 0.1);
    Field zero(g, 0.0);
    CHECK_THROWS_AS(oracle::fd_run(cfg, u0, zero, 0.1), StabilityError);
    GridSpec big(2, 64, kPi);
    oracle::OracleConfig cfg2;
    cfg2.potential = cfg.potential;
    Field ub(big, 0.1);
    Field zb(big, 0.0);
    CHECK_THROWS_AS(oracle::fd_run(cfg2, ub, zb, 0.1), SizeError);
}

TEST_CASE("fd_run linear decay matches the mode-wise closed form") {
    // f = 0, g = 0, lambda > 0: each FD mode decays like exp(-(k_fd^4 + lambda) t)
    // with the discrete symbol k_fd^2 = (2 - 2 cos(k h)) / h^2.
    GridSpec g(1, 64, kPi);
    oracle::OracleConfig cfg;
    cfg.potential = PotentialSpec::regular({0.0, 0.0});  // f identically zero
    cfg.lambda = 2.0;
    const double T = 0.02;
    Field u0 = Field::sample(g, [](const std::array<double, 3>& x) {
        return std::sin(x[2]) + 0.5 * std::cos(2 * x[2]);
    });
    Field zero(g, 0.0);
    Field out = oracle::fd_run(cfg, u0, zero, T);
    const double h = g.spacing();
    auto decay = [&](int mode) {
        const double k2 = (2.0 - 2.0 * std::cos(mode * h)) / (h * h);
        return std::exp(-(k2 * k2 + cfg.lambda) * T);
    };
    Field expect = Field::sample(g, [&](const std::array<double, 3>& x) {
        return decay(1) * std::sin(x[2]) + 0.5 * decay(2) * std::cos(2 * x[2]);
    });
    double err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        err = std::max(err, std::abs(out[i] - expect[i]));
    CHECK(err <= 1e-5);  // O(dt_e) time-stepping error
}

TEST_CASE("fd oracle vs spectral solver on smooth data") {
    // d=1, N=64, cubic potential, T = 0.1; both discretizations approximate
    // the same PDE, agreement limited by the h^2 stencil error.
    GridSpec g(1, 64, kPi);
    PotentialSpec pot = PotentialSpec::regular({0.0, -1.0, 0.0, 1.0});
    Field u0 = Field::sample(g, [](const std::array<double, 3>& x) {
        return 0.2 * std::sin(x[2]) + 0.1 * std::cos(2 * x[2]);
    });

    SimConfig sim;
    sim.grid = g;
    sim.potential = pot;
    sim.g = Field(g, 0.0);
    sim.dt = 1e-5;
    sim.t_end = 0.1;
    sim.stabilization = 0.0;  // pure explicit nonlinearity, small dt
    SimState st(0.0, u0);
    st.dt_current = sim.dt;
    const long long n = llround(sim.t_end / sim.dt);
    for (long long i = 0; i < n; ++i) st = step(std::move(st), sim);

    oracle::OracleConfig ocfg;
    ocfg.potential = pot;
    Field zero(g, 0.0);
    Field fd = oracle::fd_run(ocfg, u0, zero, 0.1);

    double err = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i)
        err = std::max(err, std::abs(fd[i] - st.u[i]));
    CHECK(err <= 1e-3);
}
