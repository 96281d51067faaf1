#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ulch/errors.hpp"

namespace ulch {

// Periodic grid on the box [-L, L)^d, N points per axis, spacing h = 2L/N.
// Axis j of the lattice carries wavenumbers k_m = pi*m/L, m in [-N/2, N/2).
struct GridSpec {
    GridSpec(int dim, int points_per_axis, double half_length);

    int dim;            // d in {1,2,3}
    int n;              // points per axis, even, >= 8
    double half_length; // L

    double spacing() const { return 2.0 * half_length / n; }
    std::size_t point_count() const;
    double coord(int index) const { return -half_length + index * spacing(); }

    // Signed mode index for FFT storage slot j in [0, n).
    int signed_mode(int j) const { return j <= n / 2 ? j : j - n; }
    double wavenumber(int j) const;

    // Real-space extents, leading axes padded with 1 for d < 3:
    // {1,1,n} (d=1), {1,n,n} (d=2), {n,n,n} (d=3).
    std::array<std::size_t, 3> extents() const;

    bool operator==(const GridSpec& other) const {
        return dim == other.dim && n == other.n && half_length == other.half_length;
    }
};

// Real scalar field sampled on a GridSpec, row-major in axis order.
// All values are finite; NaN/Inf are rejected at construction.
struct Field {
    explicit Field(const GridSpec& g, double fill = 0.0);
    Field(const GridSpec& g, std::vector<double> vals);

    GridSpec grid;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    void check_finite() const;  // throws DomainError

    // Sample fn(x) over the grid; x is padded with zeros for d < 3 and the
    // active coordinates occupy the trailing entries (x[2] is the fastest axis).
    static Field sample(const GridSpec& g,
                        const std::function<double(const std::array<double, 3>&)>& fn);
};

// Coordinates of flat index i (same layout convention as Field::sample).
std::array<double, 3> grid_point(const GridSpec& g, std::size_t flat_index);

double mean(const Field& f);
double max_abs(const Field& f);

// Spectral operators (exact on the grid, periodic boundary).
Field laplacian(const Field& f);
Field gradient(const Field& f, int axis);      // axis in [0, dim)
Field gradient_sq(const Field& f);             // pointwise |grad f|^2
Field helmholtz_inverse(const Field& f);       // (-Lap + 1)^{-1} f
Field dealias_two_thirds(const Field& f);      // zero modes with |m| > N/3

// Half-spectrum (r2c layout) access for tests and mode-wise diagnostics.
// Coefficients are normalized: field(x) = sum c_k exp(i k.x) with Hermitian
// symmetry over the omitted half.
std::size_t spectral_size(const GridSpec& g);
std::array<std::size_t, 3> spectral_extents(const GridSpec& g);  // {n0,n1,n/2+1}
std::vector<std::complex<double>> spectrum(const Field& f);
std::array<double, 3> spectral_wavevector(const GridSpec& g, std::size_t flat_index);
double spectral_multiplicity(const GridSpec& g, std::size_t flat_index);  // 1 or 2

// Snapshot format: one text header line "ULCH1 d N L t" followed by N^d
// little-endian IEEE-754 doubles, row-major.
void write_snapshot(const std::string& path, const Field& f, double time);
std::pair<Field, double> read_snapshot(const std::string& path);

}  // namespace ulch
