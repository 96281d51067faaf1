#include "ulch/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ulch/rng.hpp"

namespace ulch {

namespace {

// Offsets o with o*h in [-R, R); the 1e-9 guard keeps intended-integer R/h
// stable against rounding.
std::pair<int, int> window_offsets(double R, double h) {
    const double q = R / h;
    const int o_min = static_cast<int>(std::ceil(-q - 1e-9));
    const int o_max = static_cast<int>(std::ceil(q - 1e-9)) - 1;
    return {o_min, o_max};
}

// Circular convolution along one axis: out[j] = sum_{o=o_min}^{o_max} in[(j+o) mod n].
void accumulate_axis(std::vector<double>& data, std::size_t n_axis, std::size_t stride,
                     std::size_t block, int o_min, int o_max) {
    std::vector<double> line(n_axis), acc(n_axis);
    const std::size_t n_blocks = data.size() / block;
    for (std::size_t bk = 0; bk < n_blocks; ++bk) {
        const std::size_t base0 = bk * block;
        for (std::size_t inner = 0; inner < stride; ++inner) {
            const std::size_t base = base0 + inner;
            for (std::size_t j = 0; j < n_axis; ++j) line[j] = data[base + j * stride];
            for (std::size_t j = 0; j < n_axis; ++j) {
                double s = 0.0;
                for (int o = o_min; o <= o_max; ++o) {
                    std::size_t jj = (j + static_cast<std::size_t>(o + static_cast<int>(n_axis))) %
                                     n_axis;
                    s += line[jj];
                }
                acc[j] = s;
            }
            for (std::size_t j = 0; j < n_axis; ++j) data[base + j * stride] = acc[j];
        }
    }
}

double max_over_centers(const GridSpec& g, const std::vector<double>& ws, int stride) {
    const auto e = g.extents();
    const std::size_t st0 = (g.dim >= 3) ? static_cast<std::size_t>(stride) : 1;
    const std::size_t st1 = (g.dim >= 2) ? static_cast<std::size_t>(stride) : 1;
    const std::size_t st2 = static_cast<std::size_t>(stride);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i0 = 0; i0 < e[0]; i0 += st0)
        for (std::size_t i1 = 0; i1 < e[1]; i1 += st1)
            for (std::size_t i2 = 0; i2 < e[2]; i2 += st2)
                best = std::max(best, ws[(i0 * e[1] + i1) * e[2] + i2]);
    return best;
}

std::vector<double> pow_array(const std::vector<double>& v, double p) {
    std::vector<double> out(v.size());
    if (p == 1.0) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    } else if (p == 2.0) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * v[i];
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::pow(std::abs(v[i]), p);
    }
    return out;
}

}  // namespace

std::string NormDescriptor::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::lp_weighted: os << "Lp_phi(p=" << p << ")"; break;
        case Kind::lp_uniformly_local: os << "Lpb(p=" << p << ",R=" << R << ",s=" << stride; os << ")"; break;
        case Kind::w12b: os << "W12b(R=" << R << ",s=" << stride << ")"; break;
        case Kind::wm12b: os << "Wm12b(R=" << R << ",s=" << stride << ")"; break;
        case Kind::spacetime_l2b: os << "STL2b(w=" << window << ",R=" << R << ",s=" << stride << ")"; break;
    }
    return os.str();
}

int resolve_stride(const GridSpec& g, int stride) {
    if (stride > 0) return stride;
    return std::max(1, g.n / 64);
}

std::vector<double> box_window_sum(const GridSpec& g, const std::vector<double>& in,
                                   double R) {
    if (!(R > 0.0) || R > g.half_length + 1e-12)
        throw ValidationError("box_window_sum: need 0 < R <= L");
    const auto [o_min, o_max] = window_offsets(R, g.spacing());
    const auto e = g.extents();
    std::vector<double> data = in;
    // slot 2 is the fastest axis (stride 1), slot 0 the slowest.
    if (g.dim >= 1) accumulate_axis(data, e[2], 1, e[2], o_min, o_max);
    if (g.dim >= 2) accumulate_axis(data, e[1], e[2], e[1] * e[2], o_min, o_max);
    if (g.dim >= 3) accumulate_axis(data, e[0], e[1] * e[2], e[0] * e[1] * e[2], o_min, o_max);
    return data;
}

NormValue lp_weighted(const Field& f, const WeightFn& w, double p) {
    if (!(p >= 1.0)) throw ValidationError("lp_weighted: p must be >= 1");
    const Field phi = weight_field(w, f.grid);
    const double cell = std::pow(f.grid.spacing(), f.grid.dim);
    double sum = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < f.size(); ++i) sum += phi[i] * f[i] * f[i];
    } else {
        for (std::size_t i = 0; i < f.size(); ++i)
            sum += phi[i] * std::pow(std::abs(f[i]), p);
    }
    return {std::pow(sum * cell, 1.0 / p), {NormDescriptor::Kind::lp_weighted, p}};
}

NormValue lp_uniformly_local(const Field& f, double p, double R, int stride) {
    if (!(p >= 1.0)) throw ValidationError("lp_uniformly_local: p must be >= 1");
    const int st = resolve_stride(f.grid, stride);
    const auto ws = box_window_sum(f.grid, pow_array(f.values, p), R);
    const double cell = std::pow(f.grid.spacing(), f.grid.dim);
    const double best = max_over_centers(f.grid, ws, st);
    return {std::pow(best * cell, 1.0 / p),
            {NormDescriptor::Kind::lp_uniformly_local, p, R, st}};
}

NormValue w12b(const Field& f, double R, int stride) {
    const int st = resolve_stride(f.grid, stride);
    Field gsq = gradient_sq(f);
    std::vector<double> dens(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) dens[i] = f[i] * f[i] + gsq[i];
    const auto ws = box_window_sum(f.grid, dens, R);
    const double cell = std::pow(f.grid.spacing(), f.grid.dim);
    return {std::sqrt(max_over_centers(f.grid, ws, st) * cell),
            {NormDescriptor::Kind::w12b, 2.0, R, st}};
}

NormValue wm12b(const Field& v, double R, int stride) {
    NormValue h1 = w12b(helmholtz_inverse(v), R, stride);
    h1.desc.kind = NormDescriptor::Kind::wm12b;
    return h1;
}

NormValue spacetime_ul(const std::vector<Field>& series, double dt_snap, double window,
                       double R, int stride) {
    if (series.empty()) throw WindowError("spacetime_ul: empty series");
    if (!(dt_snap > 0.0)) throw ValidationError("spacetime_ul: dt must be positive");
    const GridSpec& g = series.front().grid;
    const std::size_t m =
        static_cast<std::size_t>(std::max<long long>(1, std::llround(window / dt_snap)));
    if (series.size() < m) {
        std::ostringstream os;
        os << "spacetime_ul: series of " << series.size() << " snapshots shorter than window ("
           << m << " needed)";
        throw WindowError(os.str());
    }
    const int st = resolve_stride(g, stride);
    std::vector<std::vector<double>> spatial;
    spatial.reserve(series.size());
    for (const auto& f : series) {
        if (!(f.grid == g)) throw ValidationError("spacetime_ul: mixed grids");
        spatial.push_back(box_window_sum(g, pow_array(f.values, 2.0), R));
    }
    const std::size_t count = g.point_count();
    std::vector<double> acc(count);
    double best = 0.0;
    for (std::size_t j = 0; j + m <= series.size(); ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = j; i < j + m; ++i)
            for (std::size_t c = 0; c < count; ++c) acc[c] += spatial[i][c];
        best = std::max(best, max_over_centers(g, acc, st));
    }
    const double cell = std::pow(g.spacing(), g.dim);
    return {std::sqrt(best * cell * dt_snap),
            {NormDescriptor::Kind::spacetime_l2b, 2.0, R, st, window}};
}

Field random_field(const GridSpec& g, std::uint64_t seed, double amplitude) {
    Rng rng(seed);
    Field out(g);
    for (auto& v : out.values) v = rng.symmetric(amplitude);
    return out;
}

EmbeddingReport verify_embedding(const GridSpec& g, WeightKind kind, double gamma, double p,
                                 const std::vector<double>& eps_values, int n_samples,
                                 std::uint64_t seed) {
    EmbeddingReport rep;
    rep.eps_values = eps_values;
    std::vector<Field> samples;
    samples.push_back(Field(g, 1.0));
    for (int s = 0; s < n_samples; ++s)
        samples.push_back(random_field(g, mix_seed(seed, s)));

    const int wun_stride = std::max(1, g.n / 8);
    const auto e = g.extents();
    const double cell = std::pow(g.spacing(), g.dim);
    for (double eps : eps_values) {
        WeightFn w{kind, gamma, eps, {0.0, 0.0, 0.0}};
        const double phi_l1 = weight_l1(w, g);
        double worst_unw = 0.0, worst_wun = 0.0;
        for (const auto& f : samples) {
            const double lwp = lp_weighted(f, w, p).value;
            const double lpb = lp_uniformly_local(f, p, 1.0, 0).value;
            if (lpb > 0.0)
                worst_unw = std::max(worst_unw, lwp / (std::pow(phi_l1, 1.0 / p) * lpb));

            // 2.w-un: sup over shifted weight centers of the weighted L^2 norm.
            const Field phi0 = weight_field(w, g);
            double sup_shift = 0.0;
            for (std::size_t c0 = 0; c0 < e[0]; c0 += (g.dim >= 3 ? wun_stride : 1))
                for (std::size_t c1 = 0; c1 < e[1]; c1 += (g.dim >= 2 ? wun_stride : 1))
                    for (std::size_t c2 = 0; c2 < e[2]; c2 += wun_stride) {
                        double s = 0.0;
                        for (std::size_t i0 = 0; i0 < e[0]; ++i0)
                            for (std::size_t i1 = 0; i1 < e[1]; ++i1)
                                for (std::size_t i2 = 0; i2 < e[2]; ++i2) {
                                    const std::size_t src =
                                        (i0 * e[1] + i1) * e[2] + i2;
                                    const std::size_t shifted =
                                        (((i0 + e[0] - c0) % e[0]) * e[1] +
                                         ((i1 + e[1] - c1) % e[1])) * e[2] +
                                        ((i2 + e[2] - c2) % e[2]);
                                    s += phi0[shifted] * f[src] * f[src];
                                }
                        sup_shift = std::max(sup_shift, s * cell);
                    }
            const double l2b = lp_uniformly_local(f, 2.0, 1.0, 0).value;
            if (sup_shift > 0.0)
                worst_wun = std::max(worst_wun, l2b / std::sqrt(sup_shift));
        }
        rep.max_ratio_unw.push_back(worst_unw);
        rep.max_ratio_wun.push_back(worst_wun);
    }

    if (g.dim == 3) {
        // Mean-zero Sobolev ratio ||v||_L6 / ||grad v||_L2 on the box.
        double worst = 0.0;
        for (const auto& f : samples) {
            Field v = f;
            const double mv = mean(v);
            for (auto& x : v.values) x -= mv;
            double l6 = 0.0, g2 = 0.0;
            const Field gsq = gradient_sq(v);
            for (std::size_t i = 0; i < v.size(); ++i) {
                l6 += std::pow(std::abs(v[i]), 6.0);
                g2 += gsq[i];
            }
            if (g2 > 0.0)
                worst = std::max(worst, std::pow(l6 * cell, 1.0 / 6.0) /
                                            std::sqrt(g2 * cell));
        }
        rep.sobolev_ratio = worst;
    }

    auto factor = [](const std::vector<double>& v) {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        return (*mn > 0.0) ? *mx / *mn : 1.0;
    };
    rep.uniformity_factor_unw = factor(rep.max_ratio_unw);
    rep.uniformity_factor_wun = factor(rep.max_ratio_wun);
    return rep;
}

InterpolationReport verify_interpolation(const GridSpec& g, double kappa, double eps,
                                         int n_samples, std::uint64_t seed) {
    if (!(kappa >= 1.0)) throw ValidationError("verify_interpolation: kappa must be >= 1");
    InterpolationReport rep;
    rep.kappa = kappa;
    rep.gamma = 3.0 + 2.0 / (2.0 * kappa - 1.0);
    WeightFn w{WeightKind::polynomial, rep.gamma, eps, {0.0, 0.0, 0.0}};
    const Field phi1 = weight_field_pow(w, g, 1.0);
    const Field phi_mid = weight_field_pow(w, g, 1.0 + 2.0 / rep.gamma);
    const Field phi3 = weight_field_pow(w, g, 3.0);
    const double cell = std::pow(g.spacing(), g.dim);
    const double a = 4.0 * kappa / (6.0 * kappa - 1.0);
    const double b = (2.0 * kappa - 1.0) / (6.0 * kappa - 1.0);

    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= n_samples; ++s) {
        Field f = (s == 0) ? Field(g, 1.0) : random_field(g, mix_seed(seed, 7000 + s));
        double lhs = 0.0, A = 0.0, B = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double av = std::abs(f[i]);
            lhs += phi_mid[i] * av * av;
            A += phi1[i] * std::pow(av, 1.0 / kappa);
            B += phi3[i] * std::pow(av, 6.0);
        }
        lhs *= cell;
        A *= cell;
        B *= cell;
        const double rhs = std::pow(A, a) * std::pow(B, b);
        const double margin = rhs - lhs;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -1e-12 * std::max(rhs, 1e-300)) ++rep.violations;
        ++rep.samples;
    }

    // kappa on the exact lattice {1, 3/2, 2, 5/2, ...}: verify the identity in
    // rational arithmetic when kappa is a half-integer.
    const double twice = 2.0 * kappa;
    if (std::abs(twice - std::llround(twice)) < 1e-12)
        rep.exponent_identity_exact = interpolation_exponent_identity_exact(Rational(std::llround(twice), 2));
    return rep;
}

namespace {
long long gcd_ll(long long a, long long b) {
    while (b != 0) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a < 0 ? -a : a;
}
}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw ValidationError("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = gcd_ll(num == 0 ? 1 : num, den);
    num /= g;
    den /= g;
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num * o.den + o.num * den, den * o.den);
}
Rational Rational::operator-(const Rational& o) const {
    return Rational(num * o.den - o.num * den, den * o.den);
}
Rational Rational::operator*(const Rational& o) const {
    return Rational(num * o.num, den * o.den);
}
Rational Rational::operator/(const Rational& o) const {
    if (o.num == 0) throw ValidationError("Rational: division by zero");
    return Rational(num * o.den, den * o.num);
}

bool interpolation_exponent_identity_exact(const Rational& kappa) {
    const Rational one(1, 1), two(2, 1), three(3, 1), four(4, 1), six(6, 1);
    const Rational gamma = three + two / (two * kappa - one);
    const Rational lhs = one + two / gamma;
    const Rational denom = six * kappa - one;
    const Rational rhs = (four * kappa) / denom + three * ((two * kappa - one) / denom);
    return lhs == rhs;
}

}  // namespace ulch
