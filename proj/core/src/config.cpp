#include "ulch/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ulch {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "grid.dim", "grid.n", "grid.L",
        "potential.kind", "potential.coeffs", "potential.psi_a", "potential.psi_b",
        "potential.l", "potential.alpha",
        "solver.lambda", "solver.dt", "solver.t_end", "solver.stabilization",
        "solver.delta_min", "solver.dt_min", "solver.dealias", "solver.seed",
        "ic.kind", "ic.amplitude", "ic.width", "ic.rough_exponent", "ic.mean", "ic.path",
        "forcing.kind", "forcing.amplitude", "forcing.mode", "forcing.width", "forcing.path",
        "weight.kind", "weight.gamma",
        "schedule.kind", "schedule.eps0", "schedule.C", "schedule.sigma",
        "diagnostics.cadence", "diagnostics.R", "diagnostics.stride",
        "diagnostics.centers", "diagnostics.window", "diagnostics.energy_every_step",
        "output.dir", "output.snapshot_every",
    };
    return keys;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string tok;
    std::istringstream is(v);
    std::string cleaned = v;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream is2(cleaned);
    while (is2 >> tok) out.push_back(parse_double(key, tok));
    return out;
}

}  // namespace

RunConfigFile RunConfigFile::parse_string(const std::string& text) {
    RunConfigFile f;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key at line " + std::to_string(lineno));
        if (!section.empty()) key = section + "." + key;
        f.set(key, value);
    }
    return f;
}

RunConfigFile RunConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

std::optional<std::string> RunConfigFile::get(const std::string& key) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
        if (it->first == key) return it->second;
    return std::nullopt;
}

void RunConfigFile::set(const std::string& key, const std::string& value) {
    for (auto& kv : entries)
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    entries.emplace_back(key, value);
}

void RunConfigFile::apply_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: '" + assignment + "'");
    std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
        // Bare key: resolve against the known table when unambiguous.
        std::vector<std::string> hits;
        for (const auto& k : known_keys())
            if (k.size() > key.size() && k.compare(k.size() - key.size(), key.size(), key) == 0 &&
                k[k.size() - key.size() - 1] == '.')
                hits.push_back(k);
        if (hits.size() != 1)
            throw ConfigError("override key '" + key + "' is " +
                              (hits.empty() ? "unknown" : "ambiguous"));
        key = hits.front();
    }
    set(key, value);
}

Field build_forcing(const ForcingSpec& spec, const GridSpec& g) {
    switch (spec.kind) {
        case ForcingKind::zero:
            return Field(g, 0.0);
        case ForcingKind::sine: {
            const double k = kPi * spec.mode / g.half_length;
            return Field::sample(g, [&](const std::array<double, 3>& x) {
                double v = 1.0;
                for (int a = 3 - g.dim; a < 3; ++a) v *= std::sin(k * x[a]);
                return spec.amplitude * v;
            });
        }
        case ForcingKind::bump: {
            const double w2 = spec.width * spec.width;
            return Field::sample(g, [&](const std::array<double, 3>& x) {
                const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                return spec.amplitude * std::exp(-r2 / w2);
            });
        }
        case ForcingKind::file: {
            auto [f, t] = read_snapshot(spec.path);
            (void)t;
            if (!(f.grid == g)) throw ConfigError("forcing snapshot grid mismatch");
            return f;
        }
    }
    throw ConfigError("unknown forcing kind");
}

ResolvedConfig resolve_config(const RunConfigFile& file) {
    for (const auto& [key, value] : file.entries) {
        (void)value;
        if (known_keys().count(key) == 0)
            throw ConfigError("config: unknown key '" + key + "'");
    }
    auto str = [&](const char* key, const std::string& dflt) {
        auto v = file.get(key);
        return v ? *v : dflt;
    };
    auto num = [&](const char* key, double dflt) {
        auto v = file.get(key);
        return v ? parse_double(key, *v) : dflt;
    };
    auto integer = [&](const char* key, long long dflt) {
        auto v = file.get(key);
        return v ? parse_int(key, *v) : dflt;
    };

    ResolvedConfig rc;

    // Grid first: everything else hangs off it.
    const int dim = static_cast<int>(integer("grid.dim", 1));
    const int n = static_cast<int>(integer("grid.n", 256));
    const double L = num("grid.L", 16.0);
    GridSpec grid(dim, n, L);

    // Potential is mandatory.
    auto pkind = file.get("potential.kind");
    if (!pkind) throw ConfigError("config: missing potential section (potential.kind)");
    PotentialSpec pot;
    if (*pkind == "regular-polynomial") {
        auto coeffs_str = file.get("potential.coeffs");
        if (!coeffs_str) throw ConfigError("config: regular potential needs potential.coeffs");
        std::optional<std::pair<double, double>> psi;
        if (file.get("potential.psi_a") || file.get("potential.psi_b"))
            psi = std::make_pair(num("potential.psi_a", 2.0), num("potential.psi_b", 1.0));
        pot = PotentialSpec::regular(parse_double_list("potential.coeffs", *coeffs_str), psi);
    } else if (*pkind == "singular-power") {
        pot = PotentialSpec::singular(num("potential.l", 2.0), num("potential.alpha", 0.0));
    } else {
        throw ConfigError("config: potential.kind must be regular-polynomial or singular-power");
    }

    rc.sim.grid = grid;
    rc.sim.potential = pot;
    rc.sim.lambda = num("solver.lambda", 0.0);
    if (rc.sim.lambda < 0.0) throw ValidationError("config: lambda must be >= 0");
    rc.sim.dt = num("solver.dt", 1e-3);
    rc.sim.t_end = num("solver.t_end", 1.0);
    const std::string stab = str("solver.stabilization", "auto");
    rc.sim.stabilization = (stab == "auto") ? -1.0 : parse_double("solver.stabilization", stab);
    rc.sim.delta_min = num("solver.delta_min", 0.05);
    if (!(rc.sim.delta_min > 0.0 && rc.sim.delta_min < 1.0))
        throw ValidationError("config: delta_min must lie in (0,1)");
    rc.sim.dt_min = num("solver.dt_min", 1e-9);
    rc.sim.seed = static_cast<std::uint64_t>(integer("solver.seed", 1));
    const std::string dealias = str("solver.dealias", "auto");
    if (dealias == "auto")
        rc.sim.dealias = -1;
    else if (dealias == "on")
        rc.sim.dealias = 1;
    else if (dealias == "off")
        rc.sim.dealias = 0;
    else
        throw ConfigError("config: solver.dealias must be auto|on|off");

    const std::string ick = str("ic.kind", "random-uniform");
    if (ick == "random-uniform")
        rc.sim.ic.kind = ICKind::random_uniform;
    else if (ick == "bump")
        rc.sim.ic.kind = ICKind::bump;
    else if (ick == "rough")
        rc.sim.ic.kind = ICKind::rough_spectral;
    else if (ick == "file")
        rc.sim.ic.kind = ICKind::file;
    else
        throw ConfigError("config: ic.kind must be random-uniform|bump|rough|file");
    rc.sim.ic.amplitude = num("ic.amplitude", -1.0);
    rc.sim.ic.width = num("ic.width", 1.0);
    rc.sim.ic.rough_exponent = num("ic.rough_exponent", 2.0);
    rc.sim.ic.mean = num("ic.mean", 0.0);
    rc.sim.ic.path = str("ic.path", "");

    const std::string fk = str("forcing.kind", "zero");
    if (fk == "zero")
        rc.forcing.kind = ForcingKind::zero;
    else if (fk == "sine")
        rc.forcing.kind = ForcingKind::sine;
    else if (fk == "bump")
        rc.forcing.kind = ForcingKind::bump;
    else if (fk == "file")
        rc.forcing.kind = ForcingKind::file;
    else
        throw ConfigError("config: forcing.kind must be zero|sine|bump|file");
    rc.forcing.amplitude = num("forcing.amplitude", 0.0);
    rc.forcing.mode = static_cast<int>(integer("forcing.mode", 1));
    rc.forcing.width = num("forcing.width", 1.0);
    rc.forcing.path = str("forcing.path", "");

    const std::string wk = str("weight.kind", "polynomial");
    if (wk == "polynomial")
        rc.diag.weight_kind = WeightKind::polynomial;
    else if (wk == "exponential")
        rc.diag.weight_kind = WeightKind::exponential;
    else
        throw ConfigError("config: weight.kind must be polynomial|exponential");
    const std::string gam = str("weight.gamma", "auto");
    rc.diag.gamma = (gam == "auto") ? 0.0 : parse_double("weight.gamma", gam);

    rc.schedule_kind = str("schedule.kind", "auto");
    rc.schedule_eps0 = num("schedule.eps0", 0.25);
    rc.schedule_C = num("schedule.C", 1.0);
    rc.schedule_sigma = num("schedule.sigma", -1.0);

    rc.diag.cadence = static_cast<int>(integer("diagnostics.cadence", 10));
    rc.diag.R = num("diagnostics.R", 1.0);
    if (!(rc.diag.R > 0.0 && rc.diag.R <= grid.half_length))
        throw ValidationError("config: diagnostics.R must lie in (0, L]");
    const std::string stride = str("diagnostics.stride", "auto");
    rc.diag.stride = (stride == "auto")
                         ? 0
                         : static_cast<int>(parse_int("diagnostics.stride", stride));
    rc.diag.window = num("diagnostics.window", 1.0);
    const std::string ees = str("diagnostics.energy_every_step", "auto");
    if (ees == "auto")
        rc.energy_every_step = -1;
    else if (ees == "on")
        rc.energy_every_step = 1;
    else if (ees == "off")
        rc.energy_every_step = 0;
    else
        throw ConfigError("config: diagnostics.energy_every_step must be auto|on|off");

    if (auto centers = file.get("diagnostics.centers")) {
        rc.diag.centers.clear();
        std::istringstream is(*centers);
        std::string group;
        while (std::getline(is, group, ';')) {
            const auto coords = parse_double_list("diagnostics.centers", group);
            if (coords.empty() || coords.size() > 3u ||
                static_cast<int>(coords.size()) != grid.dim)
                throw ConfigError("config: each center needs exactly grid.dim coordinates");
            std::array<double, 3> c = {0.0, 0.0, 0.0};
            for (std::size_t a = 0; a < coords.size(); ++a)
                c[3 - coords.size() + a] = coords[a];
            rc.diag.centers.push_back(c);
        }
        if (rc.diag.centers.empty())
            throw ConfigError("config: diagnostics.centers must not be empty");
    }

    rc.out_dir = str("output.dir", "out");
    rc.snapshot_every = static_cast<int>(integer("output.snapshot_every", 0));

    rc.resolved_entries = file.entries;
    return rc;
}

EpsilonSchedule finalize_schedule(const ResolvedConfig& rc, double g_l6b, double u0_phib) {
    const std::string& kind = rc.schedule_kind;
    const double lambda = rc.sim.lambda;
    const bool singular = rc.sim.potential.kind == PotentialKind::singular_power;
    if (kind == "constant") return EpsilonSchedule::constant_eps(rc.schedule_eps0);
    if (kind == "fixed-horizon-regular")
        return EpsilonSchedule::fixed_horizon(rc.sim.t_end, rc.schedule_C, g_l6b, u0_phib);
    if (kind == "fixed-horizon-singular")
        return EpsilonSchedule::fixed_horizon_sing(rc.sim.t_end, rc.schedule_C, g_l6b,
                                                   u0_phib, rc.sim.potential.kappa());
    if (kind == "dissipative" || (kind == "auto" && lambda > 0.0)) {
        const double C_g = rc.schedule_C * (1.0 + g_l6b * g_l6b);
        const double V0 = rc.schedule_C * (1.0 + g_l6b * g_l6b + u0_phib);
        const double sigma = rc.schedule_sigma > 0.0 ? rc.schedule_sigma : lambda / 5.0;
        return EpsilonSchedule::dissipative_eps(rc.schedule_eps0, lambda, C_g, V0, sigma);
    }
    if (kind == "auto") {
        if (singular)
            return EpsilonSchedule::fixed_horizon_sing(rc.sim.t_end, rc.schedule_C, g_l6b,
                                                       u0_phib, rc.sim.potential.kappa());
        return EpsilonSchedule::fixed_horizon(rc.sim.t_end, rc.schedule_C, g_l6b, u0_phib);
    }
    throw ConfigError("config: schedule.kind must be auto|constant|fixed-horizon-regular|"
                      "fixed-horizon-singular|dissipative");
}

}  // namespace ulch
