#include "ulch/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace ulch {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW's planner is not thread-safe; execution of a private plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Per-(dim, n) transform workspace. Instances are thread_local so concurrent
// callers never share buffers, and plans are built under the planner mutex.
// FFTW_ESTIMATE keeps plan selection deterministic across processes.
class Spectral {
  public:
    Spectral(int dim, int n) : dim_(dim), n_(n) {
        nreal_ = 1;
        for (int a = 0; a < dim; ++a) nreal_ *= static_cast<std::size_t>(n);
        ncplx_ = nreal_ / static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) / 2 + 1);
        rbuf_ = fftw_alloc_real(nreal_);
        cbuf_ = fftw_alloc_complex(ncplx_);
        int dims[3] = {n, n, n};
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft_r2c(dim, dims, rbuf_, cbuf_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r(dim, dims, cbuf_, rbuf_, FFTW_ESTIMATE);
    }
    ~Spectral() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    std::size_t nreal() const { return nreal_; }
    std::size_t ncplx() const { return ncplx_; }

    // Unnormalized forward transform into the internal complex buffer.
    void forward(const double* in) {
        std::memcpy(rbuf_, in, nreal_ * sizeof(double));
        fftw_execute(fwd_);
    }
    // Inverse transform of the internal buffer, normalized by 1/N^d.
    void backward(double* out) {
        fftw_execute(bwd_);
        const double scale = 1.0 / static_cast<double>(nreal_);
        for (std::size_t i = 0; i < nreal_; ++i) out[i] = rbuf_[i] * scale;
    }
    std::complex<double>* modes() { return reinterpret_cast<std::complex<double>*>(cbuf_); }

    static Spectral& get(const GridSpec& g) {
        thread_local std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
        auto key = std::make_pair(g.dim, g.n);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, std::make_unique<Spectral>(g.dim, g.n)).first;
        return *it->second;
    }

  private:
    int dim_, n_;
    std::size_t nreal_, ncplx_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_, bwd_;
};

// Decode flat half-spectrum index into per-axis storage slots {j0,j1,j2};
// j2 runs over the halved last axis [0, n/2].
inline std::array<int, 3> decode_spectral(const GridSpec& g, std::size_t idx) {
    const int nc = g.n / 2 + 1;
    int j2 = static_cast<int>(idx % nc);
    std::size_t rest = idx / nc;
    int j1 = 0, j0 = 0;
    if (g.dim >= 2) j1 = static_cast<int>(rest % g.n);
    if (g.dim >= 3) j0 = static_cast<int>(rest / g.n);
    return {j0, j1, j2};
}

template <class SymbolFn>
Field apply_real_symbol(const Field& f, SymbolFn&& symbol) {
    auto& sp = Spectral::get(f.grid);
    sp.forward(f.values.data());
    auto* c = sp.modes();
    const std::size_t nc = sp.ncplx();
    for (std::size_t i = 0; i < nc; ++i) c[i] *= symbol(i);
    Field out(f.grid);
    sp.backward(out.values.data());
    return out;
}

}  // namespace

GridSpec::GridSpec(int dim_, int points_per_axis, double half_length_)
    : dim(dim_), n(points_per_axis), half_length(half_length_) {
    if (dim < 1 || dim > 3)
        throw ValidationError("GridSpec: dimension must be 1, 2 or 3");
    if (n < 8 || n % 2 != 0)
        throw ValidationError("GridSpec: points per axis must be even and >= 8");
    if (!(half_length > 0.0) || !std::isfinite(half_length))
        throw ValidationError("GridSpec: half-length must be positive and finite");
}

std::size_t GridSpec::point_count() const {
    std::size_t c = 1;
    for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n);
    return c;
}

double GridSpec::wavenumber(int j) const {
    return kPi * signed_mode(j) / half_length;
}

std::array<std::size_t, 3> GridSpec::extents() const {
    std::array<std::size_t, 3> e = {1, 1, 1};
    for (int a = 0; a < dim; ++a) e[2 - a] = static_cast<std::size_t>(n);
    return e;
}

Field::Field(const GridSpec& g, double fill) : grid(g), values(g.point_count(), fill) {}

Field::Field(const GridSpec& g, std::vector<double> vals) : grid(g), values(std::move(vals)) {
    if (values.size() != g.point_count())
        throw ValidationError("Field: value count does not match grid");
    check_finite();
}

void Field::check_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("Field: non-finite value");
}

std::array<double, 3> grid_point(const GridSpec& g, std::size_t flat_index) {
    const auto e = g.extents();
    std::array<double, 3> x = {0.0, 0.0, 0.0};
    std::size_t rest = flat_index;
    int i2 = static_cast<int>(rest % e[2]);
    rest /= e[2];
    int i1 = static_cast<int>(rest % e[1]);
    int i0 = static_cast<int>(rest / e[1]);
    x[2] = g.coord(i2);
    if (g.dim >= 2) x[1] = g.coord(i1);
    if (g.dim >= 3) x[0] = g.coord(i0);
    return x;
}

Field Field::sample(const GridSpec& g,
                    const std::function<double(const std::array<double, 3>&)>& fn) {
    Field out(g);
    const std::size_t count = g.point_count();
    for (std::size_t i = 0; i < count; ++i) out.values[i] = fn(grid_point(g, i));
    out.check_finite();
    return out;
}

double mean(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s / static_cast<double>(f.values.size());
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

std::size_t spectral_size(const GridSpec& g) {
    return g.point_count() / static_cast<std::size_t>(g.n) *
           (static_cast<std::size_t>(g.n) / 2 + 1);
}

std::array<std::size_t, 3> spectral_extents(const GridSpec& g) {
    std::array<std::size_t, 3> e = {1, 1, static_cast<std::size_t>(g.n / 2 + 1)};
    if (g.dim >= 2) e[1] = static_cast<std::size_t>(g.n);
    if (g.dim >= 3) e[0] = static_cast<std::size_t>(g.n);
    return e;
}

std::array<double, 3> spectral_wavevector(const GridSpec& g, std::size_t flat_index) {
    const auto j = decode_spectral(g, flat_index);
    std::array<double, 3> k = {0.0, 0.0, 0.0};
    k[2] = kPi * j[2] / g.half_length;  // last axis stores m in [0, n/2] directly
    if (g.dim >= 2) k[1] = g.wavenumber(j[1]);
    if (g.dim >= 3) k[0] = g.wavenumber(j[0]);
    return k;
}

double spectral_multiplicity(const GridSpec& g, std::size_t flat_index) {
    const auto j = decode_spectral(g, flat_index);
    return (j[2] == 0 || j[2] == g.n / 2) ? 1.0 : 2.0;
}

std::vector<std::complex<double>> spectrum(const Field& f) {
    auto& sp = Spectral::get(f.grid);
    sp.forward(f.values.data());
    const double scale = 1.0 / static_cast<double>(f.grid.point_count());
    std::vector<std::complex<double>> out(sp.ncplx());
    const auto* c = sp.modes();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i] * scale;
    return out;
}

Field laplacian(const Field& f) {
    const GridSpec& g = f.grid;
    return apply_real_symbol(f, [&](std::size_t idx) {
        const auto k = spectral_wavevector(g, idx);
        return -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    });
}

Field helmholtz_inverse(const Field& f) {
    const GridSpec& g = f.grid;
    return apply_real_symbol(f, [&](std::size_t idx) {
        const auto k = spectral_wavevector(g, idx);
        return 1.0 / (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    });
}

Field gradient(const Field& f, int axis) {
    const GridSpec& g = f.grid;
    if (axis < 0 || axis >= g.dim) throw ValidationError("gradient: axis out of range");
    // Map axis (0 = slowest real axis) onto the padded decode slots.
    const int slot = 3 - g.dim + axis;
    const int half = g.n / 2;
    auto& sp = Spectral::get(g);
    sp.forward(f.values.data());
    auto* c = sp.modes();
    const std::size_t nc = sp.ncplx();
    for (std::size_t i = 0; i < nc; ++i) {
        const auto j = decode_spectral(g, i);
        const int m = (slot == 2) ? j[2] : g.signed_mode(j[slot]);
        // Nyquist mode carries no usable sign information for odd derivatives.
        const double k = (std::abs(m) == half) ? 0.0 : kPi * m / g.half_length;
        c[i] *= std::complex<double>(0.0, k);
    }
    Field out(g);
    sp.backward(out.values.data());
    return out;
}

Field gradient_sq(const Field& f) {
    const GridSpec& g = f.grid;
    Field out(g);
    for (int a = 0; a < g.dim; ++a) {
        Field da = gradient(f, a);
        for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += da.values[i] * da.values[i];
    }
    return out;
}

Field dealias_two_thirds(const Field& f) {
    const GridSpec& g = f.grid;
    const int cutoff = g.n / 3;
    return apply_real_symbol(f, [&](std::size_t idx) {
        const auto j = decode_spectral(g, idx);
        int mmax = j[2];  // last axis is already the absolute mode index
        if (g.dim >= 2) mmax = std::max(mmax, std::abs(g.signed_mode(j[1])));
        if (g.dim >= 3) mmax = std::max(mmax, std::abs(g.signed_mode(j[0])));
        return mmax > cutoff ? 0.0 : 1.0;
    });
}

void write_snapshot(const std::string& path, const Field& f, double time) {
    static_assert(std::endian::native == std::endian::little,
                  "snapshot writer assumes a little-endian host");
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("write_snapshot: cannot open " + path);
    std::fprintf(fp, "ULCH1 %d %d %.17g %.17g\n", f.grid.dim, f.grid.n, f.grid.half_length,
                 time);
    const std::size_t written =
        std::fwrite(f.values.data(), sizeof(double), f.values.size(), fp);
    std::fclose(fp);
    if (written != f.values.size()) throw IoError("write_snapshot: short write to " + path);
}

std::pair<Field, double> read_snapshot(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("read_snapshot: cannot open " + path);
    char magic[8] = {0};
    int d = 0, n = 0;
    double L = 0.0, t = 0.0;
    if (std::fscanf(fp, "%7s %d %d %lg %lg", magic, &d, &n, &L, &t) != 5 ||
        std::string(magic) != "ULCH1") {
        std::fclose(fp);
        throw IoError("read_snapshot: bad header in " + path);
    }
    std::fgetc(fp);  // trailing newline
    GridSpec g(d, n, L);
    std::vector<double> vals(g.point_count());
    const std::size_t got = std::fread(vals.data(), sizeof(double), vals.size(), fp);
    std::fclose(fp);
    if (got != vals.size()) throw IoError("read_snapshot: truncated payload in " + path);
    return {Field(g, std::move(vals)), t};
}

}  // namespace ulch
