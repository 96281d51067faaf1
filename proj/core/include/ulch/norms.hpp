#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ulch/grid.hpp"
#include "ulch/weights.hpp"

namespace ulch {

// Identifies a norm computation completely (space, exponent, weight or
// window, Sobolev order in {-1, 0, 1}).
struct NormDescriptor {
    enum class Kind { lp_weighted, lp_uniformly_local, w12b, wm12b, spacetime_l2b } kind;
    double p = 2.0;
    double R = 1.0;       // cube half-side for uniformly local kinds
    int stride = 1;       // center stride (1 = exhaustive)
    double window = 1.0;  // time window for the space-time kind
    std::string str() const;
};

struct NormValue {
    double value = 0.0;
    NormDescriptor desc;
};

// Uniformly-local windows are periodic cubes of half-side R: per axis the
// offsets o with o*h in [-R, R). Centers are grid points visited with the
// given stride (stride <= 0 picks max(1, N/64)).
int resolve_stride(const GridSpec& g, int stride);

// Windowed sums over the periodic cube, for every center simultaneously:
// out[c] = sum_{offsets} in[c + o]. Separable per-axis accumulation.
std::vector<double> box_window_sum(const GridSpec& g, const std::vector<double>& in,
                                   double R);

NormValue lp_weighted(const Field& f, const WeightFn& w, double p);
NormValue lp_uniformly_local(const Field& f, double p, double R, int stride = 0);
NormValue w12b(const Field& f, double R = 1.0, int stride = 0);
// W^{-1,2}_b of v via w = (-Lap+1)^{-1} v and the local H^1 norm of w.
NormValue wm12b(const Field& v, double R = 1.0, int stride = 0);
// sup over (window start, center) of the L^2-in-time local L^2 norm; series
// snapshots are spaced dt_snap apart, the window covers `window` time units.
NormValue spacetime_ul(const std::vector<Field>& series, double dt_snap, double window,
                       double R = 1.0, int stride = 0);

// Embedding checks: per sample the ratios of
//   ||f||_{L^p_phi}             vs ||phi||_1^{1/p} ||f||_{L^p_b}      (2.un-w)
//   ||f||_{L^2_b}               vs sup_x0 ||f||_{L^2_phi(.-x0)}       (2.w-un)
// and the mean-zero Sobolev ratio ||v||_{L^6} / ||grad v||_{L^2} in d = 3.
struct EmbeddingReport {
    std::vector<double> eps_values;
    std::vector<double> max_ratio_unw;   // per eps
    std::vector<double> max_ratio_wun;   // per eps
    double sobolev_ratio = 0.0;          // 0 when disabled (d != 3)
    double uniformity_factor_unw = 1.0;
    double uniformity_factor_wun = 1.0;
};
EmbeddingReport verify_embedding(const GridSpec& g, WeightKind kind, double gamma, double p,
                                 const std::vector<double>& eps_values, int n_samples,
                                 std::uint64_t seed);

// Interpolation checks for the weighted Hoelder split
//   (phi^{1+2/gamma}, |v|^2) <= (phi, |v|^{1/kappa})^{4k/(6k-1)} (phi^3, |v|^6)^{(2k-1)/(6k-1)}
// with gamma = 3 + 2/(2 kappa - 1); kappa = 1 recovers the 4/5, 1/5 split.
struct InterpolationReport {
    double kappa = 1.0;
    double gamma = 5.0;
    int violations = 0;
    int samples = 0;
    double worst_margin = 0.0;  // min over samples of rhs - lhs (>= -tol on pass)
    bool exponent_identity_exact = false;
};
InterpolationReport verify_interpolation(const GridSpec& g, double kappa, double eps,
                                         int n_samples, std::uint64_t seed);

// Exact rational arithmetic for the exponent identity
//   1 + 2/gamma == 4k/(6k-1) + 3(2k-1)/(6k-1), gamma = 3 + 2/(2k-1).
struct Rational {
    long long num = 0;
    long long den = 1;
    Rational() = default;
    Rational(long long n, long long d);
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};
bool interpolation_exponent_identity_exact(const Rational& kappa);

// Seeded band-limited random field with unit-scale values (test fodder for
// the verifiers above).
Field random_field(const GridSpec& g, std::uint64_t seed, double amplitude = 1.0);

}  // namespace ulch
