#include "ulch/solver.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "ulch/rng.hpp"

namespace ulch {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Dedicated transform workspace for the stepper; plans are thread_local per
// grid so concurrent simulations never share buffers.
class StepWorkspace {
  public:
    explicit StepWorkspace(const GridSpec& g) : grid_(g) {
        nreal_ = g.point_count();
        ncplx_ = spectral_size(g);
        rbuf_ = fftw_alloc_real(nreal_);
        cbuf_u_ = fftw_alloc_complex(ncplx_);
        cbuf_n_ = fftw_alloc_complex(ncplx_);
        int dims[3] = {g.n, g.n, g.n};
        static std::mutex planner;
        std::lock_guard<std::mutex> lock(planner);
        fwd_u_ = fftw_plan_dft_r2c(g.dim, dims, rbuf_, cbuf_u_, FFTW_ESTIMATE);
        fwd_n_ = fftw_plan_dft_r2c(g.dim, dims, rbuf_, cbuf_n_, FFTW_ESTIMATE);
        bwd_u_ = fftw_plan_dft_c2r(g.dim, dims, cbuf_u_, rbuf_, FFTW_ESTIMATE);
        k2_.resize(ncplx_);
        k_alias_max_.resize(ncplx_);
        for (std::size_t i = 0; i < ncplx_; ++i) {
            const auto k = spectral_wavevector(g, i);
            k2_[i] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            // Largest absolute mode index across axes; used by the dealias mask.
            const double unit = kPi / g.half_length;
            double mmax = 0.0;
            for (double kc : k) mmax = std::max(mmax, std::abs(kc) / unit);
            k_alias_max_[i] = mmax;
        }
    }
    ~StepWorkspace() {
        fftw_destroy_plan(fwd_u_);
        fftw_destroy_plan(fwd_n_);
        fftw_destroy_plan(bwd_u_);
        fftw_free(rbuf_);
        fftw_free(cbuf_u_);
        fftw_free(cbuf_n_);
    }
    StepWorkspace(const StepWorkspace&) = delete;
    StepWorkspace& operator=(const StepWorkspace&) = delete;

    static StepWorkspace& get(const GridSpec& g) {
        thread_local std::map<std::pair<int, int>, std::unique_ptr<StepWorkspace>> cache;
        auto key = std::make_pair(g.dim, g.n);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, std::make_unique<StepWorkspace>(g)).first;
        // Recreate if the half-length differs (k arrays depend on L).
        if (!(it->second->grid_ == g)) it->second = std::make_unique<StepWorkspace>(g);
        return *it->second;
    }

    GridSpec grid_;
    std::size_t nreal_, ncplx_;
    double* rbuf_;
    fftw_complex* cbuf_u_;
    fftw_complex* cbuf_n_;
    fftw_plan fwd_u_, fwd_n_, bwd_u_;
    std::vector<double> k2_;
    std::vector<double> k_alias_max_;
};

double max_fprime(const PotentialSpec& p, const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, eval_fprime(p, v));
    return m;
}

}  // namespace

bool SimConfig::dealias_enabled() const {
    if (dealias == 0) return false;
    if (dealias == 1) return true;
    if (potential.kind == PotentialKind::singular_power) return true;
    return potential.degree() > 3;
}

double SimConfig::ic_amplitude() const {
    if (ic.amplitude >= 0.0) return ic.amplitude;
    if (potential.kind == PotentialKind::singular_power) return 0.9 * (1.0 - delta_min);
    return 0.5;
}

Field compute_mu(const Field& u, const SimConfig& cfg) {
    if (cfg.potential.kind == PotentialKind::singular_power && !(max_abs(u) < 1.0))
        throw DomainError("compute_mu: singular potential requires max|u| < 1");
    Field mu = laplacian(u);
    for (std::size_t i = 0; i < u.size(); ++i)
        mu.values[i] = -mu.values[i] + eval_f(cfg.potential, u[i]) + cfg.g[i];
    return mu;
}

const Field& state_mu(const SimState& state, const SimConfig& cfg) {
    if (!state.mu_cache || state.mu_step != state.step_count) {
        state.mu_cache = compute_mu(state.u, cfg);
        state.mu_step = state.step_count;
    }
    return *state.mu_cache;
}

Field build_initial_condition(const SimConfig& cfg) {
    const double amp = cfg.ic_amplitude();
    auto offset = [&cfg](Field u) {
        if (cfg.ic.mean != 0.0)
            for (auto& v : u.values) v += cfg.ic.mean;
        return u;
    };
    switch (cfg.ic.kind) {
        case ICKind::random_uniform: {
            Rng rng(mix_seed(cfg.seed, 0xA11CE));
            Field u(cfg.grid);
            for (auto& v : u.values) v = rng.symmetric(amp);
            return offset(std::move(u));
        }
        case ICKind::bump: {
            const double w2 = cfg.ic.width * cfg.ic.width;
            return offset(Field::sample(cfg.grid, [&](const std::array<double, 3>& x) {
                const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                return amp * std::exp(-r2 / w2);
            }));
        }
        case ICKind::rough_spectral: {
            // Hermitian-symmetric random phases with power-law amplitudes,
            // synthesized through the real transform.
            const GridSpec& g = cfg.grid;
            Rng rng(mix_seed(cfg.seed, 0xB00F));
            const std::size_t nc = spectral_size(g);
            std::vector<std::complex<double>> modes(nc);
            for (std::size_t i = 0; i < nc; ++i) {
                const auto k = spectral_wavevector(g, i);
                const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                const double mag = std::pow(1.0 + k2, -0.5 * cfg.ic.rough_exponent);
                const double phase = 2.0 * kPi * rng.uniform();
                modes[i] = std::polar(mag, phase);
                if (spectral_multiplicity(g, i) == 1.0) modes[i] = std::abs(modes[i]);
            }
            modes[0] = 0.0;  // zero mode enters through the explicit mean offset
            // Inverse transform through the step workspace.
            auto& ws = StepWorkspace::get(g);
            auto* c = reinterpret_cast<std::complex<double>*>(ws.cbuf_u_);
            std::memcpy(c, modes.data(), nc * sizeof(std::complex<double>));
            fftw_execute(ws.bwd_u_);
            Field u(g);
            for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = ws.rbuf_[i];
            const double peak = max_abs(u);
            if (peak > 0.0)
                for (auto& v : u.values) v *= amp / peak;
            return offset(std::move(u));
        }
        case ICKind::file: {
            auto [u, t0] = read_snapshot(cfg.ic.path);
            (void)t0;
            if (!(u.grid == cfg.grid))
                throw ConfigError("initial condition snapshot grid does not match config");
            return u;
        }
    }
    throw ConfigError("unknown initial condition kind");
}

SimState step(SimState state, const SimConfig& cfg) {
    const GridSpec& g = cfg.grid;
    auto& ws = StepWorkspace::get(g);
    const bool singular = cfg.potential.kind == PotentialKind::singular_power;
    const bool dealias = cfg.dealias_enabled();
    const int alias_cut = g.n / 3;

    // Stabilization shift: fixed if configured, else max(2, trajectory peak f').
    if (cfg.stabilization >= 0.0) {
        state.s_current = cfg.stabilization;
    } else {
        state.fprime_peak = std::max(state.fprime_peak, max_fprime(cfg.potential, state.u));
        state.s_current = std::max(2.0, state.fprime_peak);
    }
    const double s = state.s_current;
    if (state.dt_current <= 0.0) state.dt_current = cfg.dt;

    for (;;) {
        const double dt = state.dt_current;
        // Explicit part f(u) - s u + g.
        for (std::size_t i = 0; i < state.u.size(); ++i)
            ws.rbuf_[i] = eval_f(cfg.potential, state.u[i]) - s * state.u[i] + cfg.g[i];
        fftw_execute(ws.fwd_n_);
        std::memcpy(ws.rbuf_, state.u.values.data(), state.u.size() * sizeof(double));
        fftw_execute(ws.fwd_u_);

        auto* cu = reinterpret_cast<std::complex<double>*>(ws.cbuf_u_);
        auto* cn = reinterpret_cast<std::complex<double>*>(ws.cbuf_n_);
        for (std::size_t i = 0; i < ws.ncplx_; ++i) {
            const double k2 = ws.k2_[i];
            std::complex<double> nl = cn[i];
            if (dealias && ws.k_alias_max_[i] > alias_cut + 0.5) nl = 0.0;
            const double denom = 1.0 + dt * (k2 * k2 + s * k2 + cfg.lambda);
            cu[i] = (cu[i] - dt * k2 * nl) / denom;
        }
        fftw_execute(ws.bwd_u_);
        const double scale = 1.0 / static_cast<double>(ws.nreal_);

        Field next(g);
        bool finite = true;
        double peak = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            const double v = ws.rbuf_[i] * scale;
            next.values[i] = v;
            if (!std::isfinite(v)) finite = false;
            peak = std::max(peak, std::abs(v));
        }
        if (!finite) {
            std::ostringstream os;
            os << "step: non-finite state at t = " << state.t << " (dt = " << dt << ")";
            throw StepError(os.str());
        }
        if (singular && peak > 1.0 - cfg.delta_min) {
            state.dt_current = dt / 2.0;
            if (state.dt_current < cfg.dt_min) {
                std::ostringstream os;
                os << "step: singular safeguard drove dt below dt_min at t = " << state.t
                   << " (max|u| = " << peak << ")";
                throw SafeguardError(os.str());
            }
            continue;  // reject and retry with the halved step
        }
        state.u = std::move(next);
        state.t += dt;
        state.step_count += 1;
        state.mu_cache.reset();
        state.mu_step = -1;
        return state;
    }
}

double box_energy(const Field& u, const SimConfig& cfg) {
    const Field gsq = gradient_sq(u);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += eval_F(cfg.potential, u[i]) + 0.5 * gsq[i] + cfg.g[i] * u[i];
    return s * std::pow(u.grid.spacing(), u.grid.dim);
}

SimState run(const SimConfig& cfg, const RunProbes& probes) {
    if (!(cfg.dt > 0.0) || !(cfg.t_end >= 0.0))
        throw ValidationError("run: dt must be positive and t_end nonnegative");
    if (!(cfg.g.grid == cfg.grid))
        throw ValidationError("run: forcing grid does not match simulation grid");
    // Certify the potential assumptions before any stepping.
    if (cfg.potential.kind == PotentialKind::regular_polynomial)
        validate_regular(cfg.potential);
    else
        validate_singular(cfg.potential);

    SimState state(0.0, build_initial_condition(cfg));
    state.dt_current = cfg.dt;
    if (cfg.potential.kind == PotentialKind::singular_power &&
        !(max_abs(state.u) <= 1.0 - cfg.delta_min))
        throw ValidationError("run: initial data violates max|u0| <= 1 - delta_min");

    auto emit_energy = [&](const SimState& st) {
        if (probes.track_energy && probes.energy_log)
            probes.energy_log->emplace_back(st.t, box_energy(st.u, cfg));
    };
    emit_energy(state);
    if (probes.on_record) probes.on_record(state);

    const double t_stop = cfg.t_end * (1.0 - 1e-12);
    long long steps_since_record = 0;
    while (state.t < t_stop) {
        state = step(std::move(state), cfg);
        emit_energy(state);
        if (probes.on_step) probes.on_step(state);
        if (++steps_since_record >= probes.cadence || state.t >= t_stop) {
            steps_since_record = 0;
            if (probes.on_record) probes.on_record(state);
        }
    }
    return state;
}

}  // namespace ulch
