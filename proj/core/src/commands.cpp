#include "ulch/commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ulch/config.hpp"
#include "ulch/diagnostics.hpp"
#include "ulch/norms.hpp"
#include "ulch/oracle.hpp"
#include "ulch/rng.hpp"

namespace ulch {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// RFC-4180-style quoting; our column names never need it but values from
// configs might.
std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

ordered_json fit_to_json(const BoundFit& fit) {
    ordered_json j;
    j["bound"] = fit.bound_id;
    j["pass"] = fit.pass;
    j["margin"] = fit.margin;
    j["slope"] = fit.slope;
    ordered_json c;
    for (const auto& [k, v] : fit.constants) c[k] = v;
    j["constants"] = c;
    if (!fit.note.empty()) j["note"] = fit.note;
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

struct RunArtifacts {
    ResolvedConfig rc;
    DiagnosticsSeries series;
    std::vector<std::pair<double, double>> energy;
    std::vector<BoundFit> fits;
    bool fits_pass = true;
};

ResolvedConfig load_config(const RunInvocation& inv) {
    RunConfigFile file = inv.config_path.empty() ? RunConfigFile::parse_string(inv.config_text)
                                                 : RunConfigFile::parse_file(inv.config_path);
    for (const auto& ov : inv.overrides) file.apply_override(ov);
    if (inv.seed) file.set("solver.seed", std::to_string(*inv.seed));
    if (!inv.out_dir.empty()) file.set("output.dir", inv.out_dir);
    return resolve_config(file);
}

std::string csv_header(const DiagnosticsSeries& s) {
    std::vector<std::string> cols = {"t",
                                     "W12b(u)",
                                     "L1b(F(u))",
                                     "Phib(u)",
                                     "STL2b(grad_mu)",
                                     "STL2bCum(grad_mu)"};
    for (std::size_t c = 0; c < s.n_centers; ++c) {
        cols.push_back("E_phi[" + std::to_string(c) + "]");
        cols.push_back("L2phi2(grad_mu)[" + std::to_string(c) + "]");
    }
    for (const char* name :
         {"Wm12b(dt_u)", "mean(u)", "maxabs(u)", "sep(u)", "eps(t)", "E_box", "dt", "s"})
        cols.push_back(name);
    std::string h;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) h += ",";
        h += csv_quote(cols[i]);
    }
    return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
    std::string row = fmt17(r.t);
    auto add = [&row](double v) { row += "," + fmt17(v); };
    add(r.w12b_u);
    add(r.l1b_F);
    add(r.phib);
    add(r.stl2b_grad_mu);
    add(r.stl2b_grad_mu_cum);
    for (std::size_t c = 0; c < r.E_phi.size(); ++c) {
        add(r.E_phi[c]);
        add(r.grad_mu_l2phi2[c]);
    }
    add(r.wm12b_dtu);
    add(r.mean_u);
    add(r.max_abs_u);
    add(r.separation);
    add(r.eps_t);
    add(r.energy_box);
    add(r.dt);
    add(r.s);
    return row;
}

// Executes one configured run, writing diag.csv, snapshots, fits and the
// resolved configuration into rc.out_dir.
RunArtifacts execute_run(ResolvedConfig rc) {
    rc.sim.g = build_forcing(rc.forcing, rc.sim.grid);

    // Realized data norms feed the schedule.
    const int stride = resolve_stride(rc.sim.grid, rc.diag.stride);
    const double g_l6b = lp_uniformly_local(rc.sim.g, 6.0, rc.diag.R, stride).value;
    const Field u0 = build_initial_condition(rc.sim);
    double u0_phib = 0.0;
    {
        const double w = w12b(u0, rc.diag.R, stride).value;
        std::vector<double> Fa(u0.size());
        for (std::size_t i = 0; i < u0.size(); ++i)
            Fa[i] = std::abs(eval_F(rc.sim.potential, u0[i]));
        u0_phib =
            w * w + lp_uniformly_local(Field(rc.sim.grid, Fa), 1.0, rc.diag.R, stride).value;
    }
    rc.diag.schedule = finalize_schedule(rc, g_l6b, u0_phib);

    const fs::path out(rc.out_dir);
    fs::create_directories(out);
    fs::create_directories(out / "fits");
    fs::create_directories(out / "snapshots");

    // Resolved configuration next to the outputs.
    {
        ordered_json j;
        for (const auto& [k, v] : rc.resolved_entries) j[k] = v;
        ordered_json derived;
        derived["g_l6b"] = g_l6b;
        derived["u0_phib"] = u0_phib;
        derived["seed"] = rc.sim.seed;
        derived["eps0"] = eval_schedule(rc.diag.schedule, 0.0);
        derived["gamma"] = rc.diag.resolve_gamma(rc.sim.potential);
        derived["stride"] = stride;
        j["derived"] = derived;
        write_text(out / "resolved.json", j.dump(2) + "\n");
    }

    Recorder recorder(rc.sim, rc.diag);
    std::vector<std::pair<double, double>> energy;
    std::ofstream csv(out / "diag.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write diag.csv in " + rc.out_dir);

    long long snap_index = 0;
    long long steps_since_snap = 0;
    RunProbes probes;
    probes.cadence = std::max(1, rc.diag.cadence);
    probes.track_energy = rc.energy_tracking();
    probes.energy_log = &energy;
    probes.on_record = [&](const SimState& st) {
        recorder(st);
        csv << csv_row(recorder.series().records.back()) << "\n";
    };
    if (rc.snapshot_every > 0) {
        probes.on_step = [&](const SimState& st) {
            if (++steps_since_snap >= rc.snapshot_every) {
                steps_since_snap = 0;
                char name[32];
                std::snprintf(name, sizeof name, "snap_%06lld.ulch", snap_index++);
                write_snapshot((out / "snapshots" / name).string(), st.u, st.t);
            }
        };
    }

    csv << csv_header(recorder.series()) << "\n";
    SimState final_state = run(rc.sim, probes);
    csv.close();

    write_snapshot((out / "snapshots" / "final.ulch").string(), final_state.u,
                   final_state.t);

    RunArtifacts art{std::move(rc), recorder.series(), std::move(energy), {}, true};

    // Envelope fits for the configured regime.
    const bool singular =
        art.rc.sim.potential.kind == PotentialKind::singular_power;
    const bool oono = art.rc.sim.lambda > 0.0;
    int fit_errors = 0;
    auto attempt = [&art, &fit_errors](auto&& make) {
        try {
            art.fits.push_back(make());
        } catch (const FitError& e) {
            BoundFit failed;
            failed.bound_id = "fit-error-" + std::to_string(++fit_errors);
            failed.note = e.what();
            art.fits.push_back(failed);
        }
    };
    attempt([&] {
        if (singular) return fit_singular_bound(art.series, oono);
        if (oono) return fit_dissipative_single(art.series, "thd.1");
        return fit_growth_bound(art.series);
    });
    attempt([&] { return fit_energy_inequality(art.series); });
    for (const auto& fit : art.fits) {
        art.fits_pass = art.fits_pass && fit.pass;
        write_text(out / "fits" / (fit.bound_id + ".json"), fit_to_json(fit).dump(2) + "\n");
    }

    // Per-step energy log for the monotonicity check.
    if (!art.energy.empty()) {
        std::string txt = "t,E_box\n";
        for (const auto& [t, e] : art.energy) txt += fmt17(t) + "," + fmt17(e) + "\n";
        write_text(out / "energy.csv", txt);
    }
    return art;
}

int classify_exception(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const AssumptionError*>(&e) || dynamic_cast<const ScheduleError*>(&e))
        return 3;
    return 2;
}

struct Check {
    std::string name;
    bool pass = false;
    ordered_json detail;
};

ordered_json checks_to_json(const std::vector<Check>& checks, bool all_pass,
                            std::uint64_t seed) {
    ordered_json j;
    j["seed"] = seed;
    j["pass"] = all_pass;
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["detail"] = c.detail;
        arr.push_back(e);
    }
    j["checks"] = arr;
    return j;
}

void verify_weights_suite(std::vector<Check>& checks, std::uint64_t seed, double gamma) {
    const std::vector<double> eps = {0.2, 0.1, 0.05};
    for (WeightKind kind : {WeightKind::polynomial, WeightKind::exponential}) {
        const char* kn = kind == WeightKind::polynomial ? "polynomial" : "exponential";
        {
            Check c;
            c.name = std::string("growth-axiom-") + kn;
            auto rep = verify_weight_axiom(kind, gamma, 1.0, eps, 3, 100000, 20.0, seed);
            c.pass = rep.uniformity_factor <= 2.0 && rep.lower_bound_ok;
            c.detail["C_per_eps"] = rep.C_upper;
            c.detail["uniformity_factor"] = rep.uniformity_factor;
            c.detail["lower_bound_ok"] = rep.lower_bound_ok;
            checks.push_back(std::move(c));
        }
        for (int order : {1, 2}) {
            Check c;
            c.name = std::string("derivative-bound-N") + std::to_string(order) + "-" + kn;
            auto rep = verify_derivative_bound(kind, gamma, order, eps, 3, 20000, 20.0, seed);
            c.pass = rep.uniformity_factor <= 2.0;
            if (order == 1) {
                const double cap =
                    (kind == WeightKind::polynomial ? gamma : 1.0) + 1e-6;
                for (double r : rep.ratio_max) c.pass = c.pass && r <= cap;
                c.detail["analytic_cap"] = cap;
            }
            c.detail["ratio_per_eps"] = rep.ratio_max;
            c.detail["uniformity_factor"] = rep.uniformity_factor;
            checks.push_back(std::move(c));
        }
        for (int d = 1; d <= 3; ++d) {
            Check c;
            c.name = std::string("l1-scaling-d") + std::to_string(d) + "-" + kn;
            try {
                const int n = d == 3 ? 96 : 256;
                const double slope = l1_scaling_exponent(kind, gamma, d, eps, 10.0, n);
                c.pass = std::abs(slope + d) <= 0.1;
                c.detail["slope"] = slope;
                c.detail["expected"] = -d;
            } catch (const ValidationError& e) {
                c.pass = false;
                c.detail["witness"] = e.what();
            }
            checks.push_back(std::move(c));
        }
    }
    {
        Check c;
        c.name = "schedule-fixed-horizon";
        EpsilonSchedule s = EpsilonSchedule::fixed_horizon(1.0, 1.0, 0.0, 0.0);
        c.pass = std::abs(eval_schedule(s, 0.0) - 0.25) < 1e-15;
        c.detail["eps"] = eval_schedule(s, 0.0);
        checks.push_back(std::move(c));
    }
    {
        Check c;
        c.name = "schedule-dissipative";
        const double lambda = 1.0;
        EpsilonSchedule s =
            EpsilonSchedule::dissipative_eps(0.5, lambda, 1.0, 3.0, lambda / 5.0);
        try {
            auto rep = verify_schedule(s);
            c.pass = rep.ok && rep.max_log_derivative_ratio <= 0.5 * lambda + 1e-12;
            c.detail["max_5deps_over_eps"] = rep.max_log_derivative_ratio;
            c.detail["eps_limit_ratio"] = rep.eps_limit_ratio;
        } catch (const ScheduleError& e) {
            c.pass = false;
            c.detail["witness"] = e.what();
        }
        checks.push_back(std::move(c));
    }
}

void verify_norms_suite(std::vector<Check>& checks, std::uint64_t seed) {
    struct Case {
        int dim, n;
        double L;
    };
    const Case cases[] = {{1, 32, 4.0}, {2, 16, 2.0}, {3, 16, 2.0}};
    for (const auto& cs : cases) {
        GridSpec g(cs.dim, cs.n, cs.L);
        const Field f = random_field(g, mix_seed(seed, cs.dim));
        WeightFn w{WeightKind::polynomial, 5.0, 0.5, {0.0, 0.0, 0.0}};
        auto close = [](double a, double b) {
            return std::abs(a - b) <= 1e-10 * std::max({std::abs(a), std::abs(b), 1.0});
        };
        Check c;
        c.name = "oracle-equivalence-d" + std::to_string(cs.dim);
        const double R = 1.0;
        const double lw = lp_weighted(f, w, 2.0).value;
        const double lw_o = oracle::brute_lp_weighted(f, w, 2.0);
        const double ul = lp_uniformly_local(f, 2.0, R, 1).value;
        const double ul_o = oracle::brute_lp_uniformly_local(f, 2.0, R, 1);
        const double w12 = w12b(f, R, 1).value;
        const double w12_o = oracle::brute_w12b(f, R, 1);
        const double wm = wm12b(f, R, 1).value;
        const double wm_o = oracle::brute_wm12b(f, R, 1);
        std::vector<Field> series = {f, random_field(g, mix_seed(seed, 50 + cs.dim))};
        const double st = spacetime_ul(series, 0.5, 1.0, R, 1).value;
        const double st_o = oracle::brute_spacetime_ul(series, 0.5, 1.0, R, 1);
        c.pass = close(lw, lw_o) && close(ul, ul_o) && close(w12, w12_o) && close(wm, wm_o) &&
                 close(st, st_o);
        c.detail["Lp_phi"] = {lw, lw_o};
        c.detail["Lpb"] = {ul, ul_o};
        c.detail["W12b"] = {w12, w12_o};
        c.detail["Wm12b"] = {wm, wm_o};
        c.detail["STL2b"] = {st, st_o};
        checks.push_back(std::move(c));
    }
    {
        Check c;
        c.name = "norm-properties";
        GridSpec g(2, 16, 2.0);
        bool ok = true;
        for (int s = 0; s < 10; ++s) {
            const Field f = random_field(g, mix_seed(seed, 100 + s));
            const Field h = random_field(g, mix_seed(seed, 200 + s));
            Field cf(g), sum(g);
            for (std::size_t i = 0; i < f.size(); ++i) {
                cf.values[i] = -2.5 * f[i];
                sum.values[i] = f[i] + h[i];
            }
            const double nf = lp_uniformly_local(f, 2.0, 1.0, 1).value;
            const double nh = lp_uniformly_local(h, 2.0, 1.0, 1).value;
            const double ncf = lp_uniformly_local(cf, 2.0, 1.0, 1).value;
            const double nsum = lp_uniformly_local(sum, 2.0, 1.0, 1).value;
            ok = ok && std::abs(ncf - 2.5 * nf) <= 1e-12 * std::max(1.0, ncf);
            ok = ok && nsum <= nf + nh + 1e-10;
        }
        c.pass = ok;
        checks.push_back(std::move(c));
    }
    {
        Check c;
        c.name = "embedding-ratios";
        GridSpec g(3, 16, 4.0);
        auto rep = verify_embedding(g, WeightKind::polynomial, 5.0, 2.0, {0.2, 0.1}, 8, seed);
        c.pass = rep.uniformity_factor_unw <= 2.0 && rep.uniformity_factor_wun <= 2.0;
        c.detail["max_ratio_unw"] = rep.max_ratio_unw;
        c.detail["max_ratio_wun"] = rep.max_ratio_wun;
        c.detail["sobolev_ratio_meanzero"] = rep.sobolev_ratio;
        checks.push_back(std::move(c));
    }
}

void verify_inequalities_suite(std::vector<Check>& checks, std::uint64_t seed) {
    const double kappas[] = {1.0, 1.5, 2.0, 2.5};
    for (double kappa : kappas) {
        Check c;
        char buf[48];
        std::snprintf(buf, sizeof buf, "interpolation-kappa-%g", kappa);
        c.name = buf;
        GridSpec g(2, 16, 4.0);
        auto rep = verify_interpolation(g, kappa, 0.2, 250, seed);
        c.pass = rep.violations == 0 && rep.exponent_identity_exact;
        c.detail["violations"] = rep.violations;
        c.detail["samples"] = rep.samples;
        c.detail["worst_margin"] = rep.worst_margin;
        c.detail["gamma"] = rep.gamma;
        c.detail["identity_exact"] = rep.exponent_identity_exact;
        checks.push_back(std::move(c));
    }
}

}  // namespace

int cmd_run(const RunInvocation& inv) {
    try {
        RunArtifacts art = execute_run(load_config(inv));
        (void)art;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "run: " << e.what() << "\n";
        return classify_exception(e);
    }
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path,
               double weight_gamma) {
    std::vector<Check> checks;
    try {
        if (suite == "weights")
            verify_weights_suite(checks, seed, weight_gamma);
        else if (suite == "norms")
            verify_norms_suite(checks, seed);
        else if (suite == "inequalities")
            verify_inequalities_suite(checks, seed);
        else {
            std::cerr << "verify: unknown suite '" << suite << "'\n";
            return 3;
        }
    } catch (const std::exception& e) {
        Check c;
        c.name = "suite-error";
        c.pass = false;
        c.detail["witness"] = e.what();
        checks.push_back(std::move(c));
    }
    bool all = true;
    for (const auto& c : checks) all = all && c.pass;
    const ordered_json j = checks_to_json(checks, all, seed);
    if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return all ? 0 : 1;
}

int cmd_sweep(const RunInvocation& base, const std::vector<std::string>& axes, int jobs) {
    try {
        // Expand the cartesian product of axis values.
        struct Axis {
            std::string key;
            std::vector<std::string> values;
        };
        std::vector<Axis> parsed;
        for (const auto& spec : axes) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw ConfigError("sweep axis must look like key=v1,v2,...: '" + spec + "'");
            Axis ax;
            ax.key = spec.substr(0, eq);
            std::string rest = spec.substr(eq + 1);
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                const auto comma = rest.find(',', pos);
                ax.values.push_back(rest.substr(pos, comma - pos));
                pos = comma == std::string::npos ? comma : comma + 1;
            }
            if (ax.values.empty()) throw ConfigError("sweep axis without values: " + spec);
            parsed.push_back(std::move(ax));
        }
        std::vector<std::vector<std::pair<std::string, std::string>>> combos = {{}};
        for (const auto& ax : parsed) {
            std::vector<std::vector<std::pair<std::string, std::string>>> next;
            for (const auto& combo : combos)
                for (const auto& v : ax.values) {
                    auto c = combo;
                    c.emplace_back(ax.key, v);
                    next.push_back(std::move(c));
                }
            combos = std::move(next);
        }

        const ResolvedConfig base_rc = load_config(base);
        const fs::path out(base_rc.out_dir);
        fs::create_directories(out);

        struct SweepEntry {
            std::string dir;
            std::vector<std::pair<std::string, std::string>> overrides;
            int status = -1;
            bool fits_pass = false;
            DiagnosticsSeries series;
            double lambda = 0.0;
        };
        std::vector<SweepEntry> entries(combos.size());
        for (std::size_t i = 0; i < combos.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", i);
            entries[i].dir = (out / name).string();
            entries[i].overrides = combos[i];
        }

        std::atomic<std::size_t> next_index{0};
        std::mutex err_mutex;
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next_index.fetch_add(1);
                if (i >= entries.size()) return;
                try {
                    RunInvocation inv = base;
                    for (const auto& [k, v] : entries[i].overrides)
                        inv.overrides.push_back(k + "=" + v);
                    inv.out_dir = entries[i].dir;
                    RunArtifacts art = execute_run(load_config(inv));
                    entries[i].status = 0;
                    entries[i].fits_pass = art.fits_pass;
                    entries[i].series = std::move(art.series);
                    entries[i].lambda = art.rc.sim.lambda;
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    std::cerr << "sweep[" << i << "]: " << e.what() << "\n";
                    entries[i].status = 2;
                }
            }
        };
        const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(entries.size())));
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        bool all_ok = true;
        ordered_json manifest;
        ordered_json runs = ordered_json::array();
        for (const auto& e : entries) {
            ordered_json r;
            r["dir"] = e.dir;
            ordered_json ov;
            for (const auto& [k, v] : e.overrides) ov[k] = v;
            r["overrides"] = ov;
            r["status"] = e.status;
            r["fits_pass"] = e.fits_pass;
            runs.push_back(r);
            all_ok = all_ok && e.status == 0 && e.fits_pass;
        }
        manifest["runs"] = runs;

        // Aggregate dissipative fit across the sweep when it applies.
        bool all_oono = !entries.empty();
        for (const auto& e : entries) all_oono = all_oono && e.status == 0 && e.lambda > 0.0;
        if (all_oono && entries.size() >= 2) {
            std::vector<const DiagnosticsSeries*> runs_ptr;
            for (const auto& e : entries) runs_ptr.push_back(&e.series);
            const BoundFit agg = fit_dissipative_bound(runs_ptr);
            manifest["aggregate"] = fit_to_json(agg);
            all_ok = all_ok && agg.pass;
        }
        manifest["pass"] = all_ok;
        write_text(out / "manifest.json", manifest.dump(2) + "\n");
        return all_ok ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "sweep: " << e.what() << "\n";
        return classify_exception(e);
    }
}

int cmd_stability(const RunInvocation& base, const std::vector<double>& deltas) {
    try {
        ResolvedConfig rc = load_config(base);
        rc.sim.g = build_forcing(rc.forcing, rc.sim.grid);
        const fs::path out(rc.out_dir);
        fs::create_directories(out);

        ordered_json summary;
        ordered_json runs = ordered_json::array();
        std::vector<StabilityResult> results;
        for (double delta : deltas) {
            StabilityResult res =
                stability_experiment(rc.sim, rc.diag, delta, mix_seed(rc.sim.seed, 0x57AB));
            ordered_json r;
            r["delta0"] = delta;
            r["v_initial"] = res.v_initial;
            r["v_final"] = res.v_final;
            r["lipschitz"] = fit_to_json(res.lipschitz);
            r["l_bound"] = fit_to_json(res.l_bound);
            r["gronwall_c"] = res.gronwall_c;
            runs.push_back(r);
            // Per-run record CSV.
            std::string csv = "t,Wm12b(v),L1b(l),L1b(F(u1)),L1b(F(u2)),mean(v)\n";
            for (const auto& rec : res.records)
                csv += fmt17(rec.t) + "," + fmt17(rec.v_wm12b) + "," + fmt17(rec.l_l1b) + "," +
                       fmt17(rec.F1_l1b) + "," + fmt17(rec.F2_l1b) + "," + fmt17(rec.mean_v) +
                       "\n";
            char name[48];
            std::snprintf(name, sizeof name, "stability_%g.csv", delta);
            write_text(out / name, csv);
            results.push_back(std::move(res));
        }
        summary["runs"] = runs;

        bool pass = true;
        for (const auto& r : results) pass = pass && r.lipschitz.pass && r.l_bound.pass;
        if (results.size() == 2 && results[0].v_final > 0.0 && results[1].v_final > 0.0) {
            const double expected = deltas[0] / deltas[1];
            const double measured = results[0].v_final / results[1].v_final;
            const double rel = std::abs(measured / expected - 1.0);
            summary["linearity"] = {{"expected_ratio", expected},
                                    {"measured_ratio", measured},
                                    {"relative_error", rel},
                                    {"pass", rel <= 0.10}};
            pass = pass && rel <= 0.10;
            const double c0 = results[0].l_bound.constant("C_raw");
            const double c1 = results[1].l_bound.constant("C_raw");
            const double factor = std::max(c0, c1) / std::max(1e-300, std::min(c0, c1));
            summary["l_bound_constant_factor"] = factor;
            pass = pass && factor <= 2.0;
        }
        summary["pass"] = pass;
        write_text(out / "stability.json", summary.dump(2) + "\n");
        std::cout << summary.dump(2) << "\n";
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "stability: " << e.what() << "\n";
        return classify_exception(e);
    }
}

int cmd_smoothing(const RunInvocation& base) {
    try {
        ResolvedConfig rc = load_config(base);
        rc.sim.g = build_forcing(rc.forcing, rc.sim.grid);
        const fs::path out(rc.out_dir);
        fs::create_directories(out);
        const double t_min = 5.0 * rc.sim.dt;

        SimConfig rough = rc.sim;
        rough.ic.kind = ICKind::rough_spectral;
        SimConfig smooth = rc.sim;
        smooth.ic.kind = ICKind::bump;
        // Wide bump: its own relaxation is much slower than the fit window,
        // so the early slope isolates blow-up rather than plain decay.
        smooth.ic.width = std::max(smooth.ic.width, rc.sim.grid.half_length / 3.0);

        const SmoothingResult r_rough = smoothing_experiment(rough, rc.diag, t_min);
        const SmoothingResult r_smooth = smoothing_experiment(smooth, rc.diag, t_min);

        auto dump = [&](const SmoothingResult& r, const std::string& tag) {
            std::string csv = "t,Wm12b(dt_u)\n";
            for (const auto& [t, v] : r.records) csv += fmt17(t) + "," + fmt17(v) + "\n";
            write_text(out / ("smoothing_" + tag + ".csv"), csv);
            ordered_json j;
            j["slope_early"] = r.slope_early;
            j["envelope"] = fit_to_json(r.envelope);
            j["late"] = fit_to_json(r.late);
            j["level_late"] = r.level_late;
            return j;
        };
        ordered_json summary;
        summary["t_min"] = t_min;
        summary["rough"] = dump(r_rough, "rough");
        summary["control"] = dump(r_smooth, "control");
        const bool control_flat = r_smooth.slope_early >= -0.25;
        const bool pass = r_rough.envelope.pass && r_rough.slope_early >= -0.75 &&
                          control_flat;
        summary["pass"] = pass;
        write_text(out / "smoothing.json", summary.dump(2) + "\n");
        std::cout << summary.dump(2) << "\n";
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "smoothing: " << e.what() << "\n";
        return classify_exception(e);
    }
}

}  // namespace ulch
