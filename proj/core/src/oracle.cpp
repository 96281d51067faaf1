#include "ulch/oracle.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace ulch {
namespace oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

void guard_small(const GridSpec& g, int limit, const char* what) {
    if (g.n > limit) {
        std::ostringstream os;
        os << what << ": N = " << g.n << " above the oracle guard " << limit << " for d = "
           << g.dim;
        throw SizeError(os.str());
    }
}

std::array<std::size_t, 3> ext(const GridSpec& g) { return g.extents(); }

std::size_t flat(const std::array<std::size_t, 3>& e, std::size_t i0, std::size_t i1,
                 std::size_t i2) {
    return (i0 * e[1] + i1) * e[2] + i2;
}

// Direct-summation DFT along one axis of a complex array.
void dft_axis(std::vector<std::complex<double>>& data, const std::array<std::size_t, 3>& e,
              int slot, int sign) {
    const std::size_t n = e[slot];
    std::vector<std::complex<double>> twiddle(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = sign * 2.0 * kPi * static_cast<double>(j * k % n) /
                               static_cast<double>(n);
            twiddle[j * n + k] = {std::cos(ang), std::sin(ang)};
        }
    std::vector<std::complex<double>> line(n);
    const std::size_t stride = (slot == 2) ? 1 : (slot == 1 ? e[2] : e[1] * e[2]);
    const std::size_t block = (slot == 2) ? e[2] : (slot == 1 ? e[1] * e[2] : e[0] * e[1] * e[2]);
    const std::size_t n_blocks = data.size() / block;
    for (std::size_t bk = 0; bk < n_blocks; ++bk)
        for (std::size_t inner = 0; inner < stride; ++inner) {
            const std::size_t base = bk * block + inner;
            for (std::size_t k = 0; k < n; ++k) {
                std::complex<double> s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += data[base + j * stride] * twiddle[j * n + k];
                line[k] = s;
            }
            for (std::size_t k = 0; k < n; ++k) data[base + k * stride] = line[k];
        }
}

std::vector<std::complex<double>> naive_forward(const Field& f) {
    std::vector<std::complex<double>> data(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) data[i] = f[i];
    const auto e = ext(f.grid);
    for (int slot = 2; slot >= 3 - f.grid.dim; --slot) dft_axis(data, e, slot, -1);
    const double scale = 1.0 / static_cast<double>(f.size());
    for (auto& c : data) c *= scale;
    return data;
}

Field naive_inverse(const GridSpec& g, std::vector<std::complex<double>> data) {
    const auto e = ext(g);
    for (int slot = 2; slot >= 3 - g.dim; --slot) dft_axis(data, e, slot, +1);
    Field out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = data[i].real();
    return out;
}

double axis_wavenumber(const GridSpec& g, std::size_t k) {
    const int m = (static_cast<int>(k) <= g.n / 2) ? static_cast<int>(k)
                                                   : static_cast<int>(k) - g.n;
    return kPi * m / g.half_length;
}

std::pair<int, int> window_offsets(double R, double h) {
    const double q = R / h;
    return {static_cast<int>(std::ceil(-q - 1e-9)),
            static_cast<int>(std::ceil(q - 1e-9)) - 1};
}

double naive_weight(const WeightFn& w, const GridSpec& g, std::size_t i) {
    const auto x = grid_point(g, i);
    const double period = 2.0 * g.half_length;
    double r2 = 0.0;
    for (int a = 3 - g.dim; a < 3; ++a) {
        double d = x[a] - w.center[a];
        while (d >= g.half_length) d -= period;
        while (d < -g.half_length) d += period;
        r2 += d * d;
    }
    const double s = w.eps * w.eps * r2;
    if (w.kind == WeightKind::polynomial) return std::pow(1.0 + s, -0.5 * w.gamma);
    return std::exp(-std::sqrt(s + 1.0));
}

// Window-summed density maximized over the stride lattice of centers.
double windowed_sup(const GridSpec& g, const std::vector<double>& dens, double R,
                    int stride) {
    const auto e = ext(g);
    const auto [o_min, o_max] = window_offsets(R, g.spacing());
    const int st = stride > 0 ? stride : 1;
    const int lo0 = (g.dim >= 3) ? o_min : 0, hi0 = (g.dim >= 3) ? o_max : 0;
    const int lo1 = (g.dim >= 2) ? o_min : 0, hi1 = (g.dim >= 2) ? o_max : 0;
    double best = 0.0;
    for (std::size_t c0 = 0; c0 < e[0]; c0 += (g.dim >= 3 ? st : 1))
        for (std::size_t c1 = 0; c1 < e[1]; c1 += (g.dim >= 2 ? st : 1))
            for (std::size_t c2 = 0; c2 < e[2]; c2 += st) {
                double s = 0.0;
                for (int o0 = lo0; o0 <= hi0; ++o0)
                    for (int o1 = lo1; o1 <= hi1; ++o1)
                        for (int o2 = o_min; o2 <= o_max; ++o2) {
                            const std::size_t i0 =
                                (c0 + e[0] + static_cast<std::size_t>(o0 + static_cast<int>(e[0]))) % e[0];
                            const std::size_t i1 =
                                (c1 + e[1] + static_cast<std::size_t>(o1 + static_cast<int>(e[1]))) % e[1];
                            const std::size_t i2 =
                                (c2 + e[2] + static_cast<std::size_t>(o2 + static_cast<int>(e[2]))) % e[2];
                            s += dens[flat(e, i0, i1, i2)];
                        }
                best = std::max(best, s);
            }
    return best;
}

}  // namespace

Field fd_laplacian(const Field& f) {
    const GridSpec& g = f.grid;
    const auto e = ext(g);
    const double h2 = g.spacing() * g.spacing();
    Field out(g);
    for (std::size_t i0 = 0; i0 < e[0]; ++i0)
        for (std::size_t i1 = 0; i1 < e[1]; ++i1)
            for (std::size_t i2 = 0; i2 < e[2]; ++i2) {
                const double c = f[flat(e, i0, i1, i2)];
                double acc = 0.0;
                acc += f[flat(e, i0, i1, (i2 + 1) % e[2])] +
                       f[flat(e, i0, i1, (i2 + e[2] - 1) % e[2])] - 2.0 * c;
                if (g.dim >= 2)
                    acc += f[flat(e, i0, (i1 + 1) % e[1], i2)] +
                           f[flat(e, i0, (i1 + e[1] - 1) % e[1], i2)] - 2.0 * c;
                if (g.dim >= 3)
                    acc += f[flat(e, (i0 + 1) % e[0], i1, i2)] +
                           f[flat(e, (i0 + e[0] - 1) % e[0], i1, i2)] - 2.0 * c;
                out.values[flat(e, i0, i1, i2)] = acc / h2;
            }
    return out;
}

Field fd_run(const OracleConfig& cfg, const Field& u0, const Field& g, double t_end) {
    const GridSpec& grid = u0.grid;
    const int limits[4] = {0, 128, 32, 16};
    guard_small(grid, limits[grid.dim], "fd_run");
    const double h = grid.spacing();
    const double h4 = h * h * h * h;
    double dt = cfg.dt_e > 0.0 ? cfg.dt_e : 0.05 * h4 / (grid.dim * grid.dim);
    if (dt > cfg.c_stab * h4) {
        std::ostringstream os;
        os << "fd_run: dt_e = " << dt << " violates the explicit biharmonic restriction "
           << cfg.c_stab << " * h^4 = " << cfg.c_stab * h4;
        throw StabilityError(os.str());
    }
    if (t_end <= 0.0) return u0;
    const long long n_steps = static_cast<long long>(std::ceil(t_end / dt - 1e-12));
    dt = t_end / static_cast<double>(n_steps);
    Field u = u0;
    for (long long s = 0; s < n_steps; ++s) {
        Field lap_u = fd_laplacian(u);
        Field mu(grid);
        for (std::size_t i = 0; i < u.size(); ++i)
            mu.values[i] = -lap_u[i] + eval_f(cfg.potential, u[i]) + g[i];
        Field lap_mu = fd_laplacian(mu);
        for (std::size_t i = 0; i < u.size(); ++i)
            u.values[i] += dt * (lap_mu[i] - cfg.lambda * u[i]);
    }
    u.check_finite();
    return u;
}

Field brute_gradient(const Field& f, int axis) {
    const GridSpec& g = f.grid;
    guard_small(g, 32, "brute_gradient");
    auto c = naive_forward(f);
    const auto e = ext(g);
    const int slot = 3 - g.dim + axis;
    for (std::size_t i0 = 0; i0 < e[0]; ++i0)
        for (std::size_t i1 = 0; i1 < e[1]; ++i1)
            for (std::size_t i2 = 0; i2 < e[2]; ++i2) {
                const std::size_t ks[3] = {i0, i1, i2};
                const std::size_t k = ks[slot];
                double kv = axis_wavenumber(g, k);
                if (static_cast<int>(k) == g.n / 2) kv = 0.0;  // Nyquist, odd derivative
                c[flat(e, i0, i1, i2)] *= std::complex<double>(0.0, kv);
            }
    return naive_inverse(g, std::move(c));
}

Field brute_helmholtz_inverse(const Field& f) {
    const GridSpec& g = f.grid;
    guard_small(g, 32, "brute_helmholtz_inverse");
    auto c = naive_forward(f);
    const auto e = ext(g);
    for (std::size_t i0 = 0; i0 < e[0]; ++i0)
        for (std::size_t i1 = 0; i1 < e[1]; ++i1)
            for (std::size_t i2 = 0; i2 < e[2]; ++i2) {
                double k2 = 0.0;
                if (g.dim >= 3) k2 += axis_wavenumber(g, i0) * axis_wavenumber(g, i0);
                if (g.dim >= 2) k2 += axis_wavenumber(g, i1) * axis_wavenumber(g, i1);
                k2 += axis_wavenumber(g, i2) * axis_wavenumber(g, i2);
                c[flat(e, i0, i1, i2)] /= (1.0 + k2);
            }
    return naive_inverse(g, std::move(c));
}

double brute_lp_weighted(const Field& f, const WeightFn& w, double p) {
    guard_small(f.grid, 32, "brute_lp_weighted");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        s += naive_weight(w, f.grid, i) * std::pow(std::abs(f[i]), p);
    return std::pow(s * std::pow(f.grid.spacing(), f.grid.dim), 1.0 / p);
}

double brute_lp_uniformly_local(const Field& f, double p, double R, int stride) {
    guard_small(f.grid, 32, "brute_lp_uniformly_local");
    std::vector<double> dens(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) dens[i] = std::pow(std::abs(f[i]), p);
    const double sup = windowed_sup(f.grid, dens, R, stride);
    return std::pow(sup * std::pow(f.grid.spacing(), f.grid.dim), 1.0 / p);
}

double brute_w12b(const Field& f, double R, int stride) {
    guard_small(f.grid, 32, "brute_w12b");
    std::vector<double> dens(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) dens[i] = f[i] * f[i];
    for (int a = 0; a < f.grid.dim; ++a) {
        const Field da = brute_gradient(f, a);
        for (std::size_t i = 0; i < f.size(); ++i) dens[i] += da[i] * da[i];
    }
    const double sup = windowed_sup(f.grid, dens, R, stride);
    return std::sqrt(sup * std::pow(f.grid.spacing(), f.grid.dim));
}

double brute_wm12b(const Field& f, double R, int stride) {
    return brute_w12b(brute_helmholtz_inverse(f), R, stride);
}

double brute_spacetime_ul(const std::vector<Field>& series, double dt_snap, double window,
                          double R, int stride) {
    if (series.empty()) throw WindowError("brute_spacetime_ul: empty series");
    const GridSpec& g = series.front().grid;
    guard_small(g, 32, "brute_spacetime_ul");
    const std::size_t m =
        static_cast<std::size_t>(std::max<long long>(1, std::llround(window / dt_snap)));
    if (series.size() < m) throw WindowError("brute_spacetime_ul: series shorter than window");
    double best = 0.0;
    for (std::size_t j = 0; j + m <= series.size(); ++j) {
        std::vector<double> dens(g.point_count(), 0.0);
        for (std::size_t i = j; i < j + m; ++i)
            for (std::size_t c = 0; c < dens.size(); ++c)
                dens[c] += series[i][c] * series[i][c];
        best = std::max(best, windowed_sup(g, dens, R, stride));
    }
    return std::sqrt(best * std::pow(g.spacing(), g.dim) * dt_snap);
}

}  // namespace oracle
}  // namespace ulch
