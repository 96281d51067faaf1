#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "ulch/grid.hpp"
#include "ulch/norms.hpp"

using namespace ulch;

namespace {
constexpr double kPi = 3.14159265358979323846;

double max_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}
}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(GridSpec(0, 16, 1.0), ValidationError);
    CHECK_THROWS_AS(GridSpec(4, 16, 1.0), ValidationError);
    CHECK_THROWS_AS(GridSpec(1, 15, 1.0), ValidationError);
    CHECK_THROWS_AS(GridSpec(1, 4, 1.0), ValidationError);
    CHECK_THROWS_AS(GridSpec(1, 16, -1.0), ValidationError);
    GridSpec g(2, 16, 2.0);
    CHECK(g.point_count() == 256);
    CHECK(g.spacing() == doctest::Approx(0.25));
}

TEST_CASE("field rejects non-finite data") {
    GridSpec g(1, 8, 1.0);
    std::vector<double> vals(8, 0.0);
    vals[3] = std::nan("");
    CHECK_THROWS_AS(Field(g, vals), DomainError);
}

TEST_CASE("laplacian eigenfunction in 1d") {
    GridSpec g(1, 64, kPi);
    Field f = Field::sample(g, [](const std::array<double, 3>& x) { return std::sin(x[2]); });
    Field lap = laplacian(f);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(lap[i] + f[i]));
    CHECK(err <= 1e-10);
}

TEST_CASE("laplacian of constants is zero") {
    GridSpec g(2, 16, 1.5);
    Field f(g, 3.75);
    Field lap = laplacian(f);
    CHECK(max_abs(lap) <= 1e-12);
}

TEST_CASE("laplacian 2d against the symbolic derivative") {
    GridSpec g(2, 64, kPi);
    Field f = Field::sample(
        g, [](const std::array<double, 3>& x) { return std::sin(2 * x[1]) * std::cos(x[2]); });
    Field expect = Field::sample(g, [](const std::array<double, 3>& x) {
        return -5.0 * std::sin(2 * x[1]) * std::cos(x[2]);
    });
    CHECK(max_diff(laplacian(f), expect) <= 1e-10);
}

TEST_CASE("laplacian output has zero mean") {
    GridSpec g(3, 16, 2.0);
    Field f = random_field(g, 42);
    CHECK(std::abs(mean(laplacian(f))) <= 1e-12);
}

TEST_CASE("gradient_sq examples") {
    GridSpec g1(1, 64, kPi);
    Field f = Field::sample(g1, [](const std::array<double, 3>& x) { return std::sin(x[2]); });
    Field expect = Field::sample(
        g1, [](const std::array<double, 3>& x) { return std::cos(x[2]) * std::cos(x[2]); });
    CHECK(max_diff(gradient_sq(f), expect) <= 1e-10);

    Field c(g1, -2.0);
    CHECK(max_abs(gradient_sq(c)) <= 1e-14);

    GridSpec g2(2, 64, kPi);
    Field f2 = Field::sample(g2, [](const std::array<double, 3>& x) {
        return std::sin(x[1]) + std::cos(2 * x[2]);
    });
    Field expect2 = Field::sample(g2, [](const std::array<double, 3>& x) {
        const double cx = std::cos(x[1]);
        const double s2y = std::sin(2 * x[2]);
        return cx * cx + 4.0 * s2y * s2y;
    });
    CHECK(max_diff(gradient_sq(f2), expect2) <= 1e-10);
}

TEST_CASE("helmholtz inverse") {
    GridSpec g(1, 64, kPi);
    Field c(g, 4.2);
    CHECK(max_diff(helmholtz_inverse(c), c) <= 1e-12);

    Field f = Field::sample(g, [](const std::array<double, 3>& x) { return std::sin(x[2]); });
    Field w = helmholtz_inverse(f);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        err = std::max(err, std::abs(w[i] - 0.5 * f[i]));
    CHECK(err <= 1e-12);
}

TEST_CASE("helmholtz round trip on random fields in every dimension") {
    for (int d = 1; d <= 3; ++d) {
        GridSpec g(d, d == 3 ? 16 : 32, 2.0);
        Field f = random_field(g, 1000 + d);
        Field w = helmholtz_inverse(f);
        Field residual = laplacian(w);
        for (std::size_t i = 0; i < f.size(); ++i)
            residual.values[i] = -residual[i] + w[i] - f[i];
        CHECK(max_abs(residual) <= 1e-9 * std::max(1.0, max_abs(f)));
    }
}

TEST_CASE("operators are linear") {
    GridSpec g(2, 32, 1.0);
    Field f = random_field(g, 7);
    Field h = random_field(g, 8);
    const double a = 1.7, b = -0.3;
    Field combo(g);
    for (std::size_t i = 0; i < f.size(); ++i) combo.values[i] = a * f[i] + b * h[i];
    for (auto op : {laplacian, helmholtz_inverse}) {
        Field lhs = op(combo);
        Field fa = op(f), fb = op(h);
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            err = std::max(err, std::abs(lhs[i] - a * fa[i] - b * fb[i]));
        CHECK(err <= 1e-11);
    }
}

TEST_CASE("two-thirds dealiasing removes high modes") {
    GridSpec g(1, 32, kPi);
    const int keep = 5, kill = 14;  // cutoff at N/3 = 10
    Field f = Field::sample(g, [&](const std::array<double, 3>& x) {
        return std::sin(keep * x[2]) + std::sin(kill * x[2]);
    });
    Field filtered = dealias_two_thirds(f);
    Field expect = Field::sample(
        g, [&](const std::array<double, 3>& x) { return std::sin(keep * x[2]); });
    CHECK(max_diff(filtered, expect) <= 1e-12);
}

TEST_CASE("spectrum returns normalized coefficients") {
    GridSpec g(1, 32, kPi);
    Field f = Field::sample(g, [](const std::array<double, 3>& x) { return std::sin(x[2]); });
    auto c = spectrum(f);
    CHECK(std::abs(std::abs(c[1]) - 0.5) <= 1e-12);
    CHECK(std::abs(c[0]) <= 1e-14);
}

TEST_CASE("snapshot round trip is bit exact") {
    GridSpec g(2, 16, 2.5);
    Field f = random_field(g, 99);
    const std::string path = "test_snapshot.ulch";
    write_snapshot(path, f, 1.25);
    auto [back, t] = read_snapshot(path);
    std::remove(path.c_str());
    CHECK(t == 1.25);
    CHECK(back.grid == g);
    REQUIRE(back.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
}
