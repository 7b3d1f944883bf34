#include "spraylab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "spraylab/biot_savart.hpp"
#include "spraylab/errors.hpp"

namespace spray {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KvMap {
    std::map<std::string, std::string> kv; // "section.key" -> value
    std::map<std::string, bool> used;

    bool has(const std::string& k) const { return kv.count(k) > 0; }

    std::string take(const std::string& k) {
        used[k] = true;
        return kv.at(k);
    }

    double number(const std::string& k, double fallback) {
        if (!has(k)) return fallback;
        const std::string v = take(k);
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("bad number for " + k + ": '" + v + "'");
        }
    }

    std::uint64_t unsigned_number(const std::string& k, std::uint64_t fallback) {
        if (!has(k)) return fallback;
        const std::string v = take(k);
        try {
            std::size_t pos = 0;
            const std::uint64_t x = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("bad unsigned integer for " + k + ": '" + v + "'");
        }
    }

    std::string word(const std::string& k, const std::string& fallback) {
        if (!has(k)) return fallback;
        return take(k);
    }
};

ProfileSpec parse_profile(KvMap& m, const std::string& sec) {
    ProfileSpec p;
    p.kind = m.word(sec + ".kind", "zero");
    if (p.kind != "zero" && p.kind != "disk" && p.kind != "bump" && p.kind != "annulus" &&
        p.kind != "plateau" && p.kind != "ring")
        throw ConfigError(sec + ".kind must be zero|disk|bump|annulus|plateau|ring, got '" +
                          p.kind + "'");
    p.center_x = m.number(sec + ".center_x", 0.0);
    p.center_y = m.number(sec + ".center_y", 0.0);
    p.radius = m.number(sec + ".radius", 1.0);
    p.r0 = m.number(sec + ".r0", 0.7);
    p.width = m.number(sec + ".width", 0.3);
    p.amplitude = m.number(sec + ".amplitude", 1.0);
    if (m.has(sec + ".mass")) {
        p.has_mass = true;
        p.mass = m.number(sec + ".mass", 0.0);
    }
    if (p.radius <= 0.0 || p.width <= 0.0 || p.r0 < 0.0)
        throw ConfigError(sec + " geometry parameters must be positive");
    return p;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    KvMap m;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key=value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
        const std::string full = section.empty() ? key : section + "." + key;
        if (m.kv.count(full))
            throw ConfigError("duplicate key " + full + " at line " + std::to_string(lineno));
        m.kv[full] = val;
        m.used[full] = false;
    }

    ExperimentConfig c;
    c.raw_text = text;
    c.half_width = m.number("domain.half_width", c.half_width);
    c.n = static_cast<int>(m.number("domain.n", c.n));
    c.dt = m.number("time.dt", c.dt);
    c.t_final = m.number("time.t_final", c.t_final);
    c.cfl = m.number("time.cfl", c.cfl);
    c.blob_eps_factor = m.number("micro.blob_eps_factor", c.blob_eps_factor);
    c.collision_floor_factor = m.number("micro.collision_floor_factor", c.collision_floor_factor);
    c.omega0 = parse_profile(m, "omega0");
    c.rho0 = parse_profile(m, "rho0");
    c.v0.kind = m.word("v0.kind", "zero");
    c.v0.cx = m.number("v0.cx", 0.0);
    c.v0.cy = m.number("v0.cy", 0.0);
    if (c.v0.kind != "zero" && c.v0.kind != "constant" && c.v0.kind != "matched")
        throw ConfigError("v0.kind must be zero|constant|matched, got '" + c.v0.kind + "'");

    if (m.has("particles.n_list")) {
        c.n_list.clear();
        std::stringstream ss(m.take("particles.n_list"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                c.n_list.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw ConfigError("bad entry in particles.n_list: '" + item + "'");
            }
        }
    }
    c.scheme = m.word("particles.scheme", c.scheme);
    if (c.scheme != "iid" && c.scheme != "lattice" && c.scheme != "halton")
        throw ConfigError("particles.scheme must be iid|lattice|halton, got '" + c.scheme + "'");
    c.seed = m.unsigned_number("particles.seed", c.seed);
    c.omega_perturb = m.number("particles.omega_perturb", 0.0);

    c.c0 = m.number("energy.c0", c.c0);
    c.dict_k = static_cast<int>(m.number("energy.dict_k", c.dict_k));
    c.cadence = static_cast<int>(m.number("energy.cadence", c.cadence));
    c.snapshots = m.number("output.snapshots", 0.0) != 0.0;
    c.snapshot_cadence = static_cast<int>(m.number("output.snapshot_cadence", c.snapshot_cadence));

    for (const auto& [k, was_used] : m.used)
        if (!was_used) throw ConfigError("unknown config key: " + k);

    // structural validation; Grid's constructor re-checks n
    Grid probe(c.half_width, c.n);
    (void)probe;
    if (!(c.dt > 0.0)) throw ConfigError("time.dt must be positive");
    if (!(c.t_final >= 0.0)) throw ConfigError("time.t_final must be nonnegative");
    if (!(c.cfl > 0.0 && c.cfl <= 2.0)) throw ConfigError("time.cfl must lie in (0, 2]");
    if (c.n_list.empty()) throw ConfigError("particles.n_list must not be empty");
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        if (c.n_list[i] < 1) throw ConfigError("particles.n_list entries must be >= 1");
        if (i > 0 && c.n_list[i] <= c.n_list[i - 1])
            throw ConfigError("particles.n_list must be strictly increasing");
    }
    if (c.cadence < 1) throw ConfigError("energy.cadence must be >= 1");
    if (c.snapshot_cadence < 1) throw ConfigError("output.snapshot_cadence must be >= 1");
    if (c.dict_k < 0 || c.dict_k > 8) throw ConfigError("energy.dict_k must lie in [0, 8]");
    if (c.blob_eps_factor <= 0.0) throw ConfigError("micro.blob_eps_factor must be positive");
    return c;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

GridField build_profile(const ProfileSpec& spec, const Grid& grid) {
    GridField f = GridField::scalar(grid);
    auto shape = [&](double r) -> double {
        if (spec.kind == "disk") return r < spec.radius ? 1.0 : 0.0;
        if (spec.kind == "bump") {
            const double s = r / spec.radius;
            return s < 1.0 ? std::exp(-s * s / (1.0 - s * s)) : 0.0;
        }
        if (spec.kind == "annulus") {
            const double s = (r - spec.r0) / spec.width;
            return std::fabs(s) < 1.0 ? std::exp(-s * s / (1.0 - s * s)) : 0.0;
        }
        if (spec.kind == "plateau") {
            // flat top with an exponential skirt of e-folding scale `width`,
            // cut where the tail falls below the transport debris floor. The
            // gradual skirt keeps the discrete support edge resolved, which
            // amplitude-threshold support tracking needs to stay meaningful.
            const double s = (r - spec.r0) / spec.width;
            if (s <= 0.0) return 1.0;
            return s < 30.0 ? std::exp(-s) : 0.0;
        }
        if (spec.kind == "ring") {
            // plateau folded around the centerline r0: flat for
            // |r - r0| <= radius, same resolvable skirt on both sides.
            const double s = (std::fabs(r - spec.r0) - spec.radius) / spec.width;
            if (s <= 0.0) return 1.0;
            return s < 30.0 ? std::exp(-s) : 0.0;
        }
        return 0.0;
    };
    if (spec.kind == "zero") return f;
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            const Vec2 d = grid.center(ix, iy) - Vec2{spec.center_x, spec.center_y};
            f.at(ix, iy) = spec.amplitude * shape(norm(d));
        }
    if (spec.has_mass) {
        const double m = integrate(f);
        if (m == 0.0)
            throw ConfigError("profile has zero sampled mass; cannot rescale to mass = " +
                              std::to_string(spec.mass));
        f = (spec.mass / m) * f;
    }
    return f;
}

GridField build_v0(const V0Spec& spec, const Grid& grid, PoissonSolver& solver,
                   const GridField& alpha0) {
    GridField v = GridField::vector(grid);
    if (spec.kind == "zero") return v;
    if (spec.kind == "constant") {
        for (int iy = 0; iy < grid.n; ++iy)
            for (int ix = 0; ix < grid.n; ++ix)
                v.set_vec(ix, iy, {spec.cx, spec.cy});
        return v;
    }
    return velocity_from_vorticity(solver, alpha0);
}

} // namespace spray
