#ifndef BBM_IO_HPP
#define BBM_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynamics.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "harness.hpp"
#include "limit_models.hpp"
#include "transport.hpp"
#include "vec2.hpp"

namespace bbm
{

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig
{
    std::string name = "thm3";
    double c = 0.1;
    std::size_t N = 200;
    double chi = 0.5;
    Vec2 u0{0.0, 1.0};
    int checkpoints = 8;
    double early_fraction = 0.0;
};

struct GkSettings
{
    std::uint64_t n = 1'000'000;
    int J = 0;
    int batches = 32;
    bool independent_restarts = false;
};

struct SdeSettings
{
    double h = 0.0; ///< 0 selects 1e-3 * c
    std::size_t N = 1000;
    double grid_spacing = 0.02;
    std::uint64_t grid_collisions = 200'000;
};

struct ScanSettings
{
    Vec2 origin{0.45, -0.05};
    double h = 0.02;
    int nx = 6;
    int ny = 6;
};

struct RunConfig
{
    TorusTable table;
    SimParams sim;
    Vec2 Q0{0.5, 0.0};
    Vec2 V0;
    ExperimentConfig experiment;
    GkSettings greenkubo;
    SdeSettings sde;
    ScanSettings scan;
    std::uint64_t lyapunov_n = 1'000'000;
    std::size_t horizon_directions = 360;
    std::size_t horizon_offsets = 100;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    /// Normalized document (defaults filled in); hashed and embedded in outputs.
    json document;

    GkConfig gk_config() const
    {
        GkConfig g;
        g.n_collisions = greenkubo.n;
        g.J = greenkubo.J;
        g.options.batches = greenkubo.batches;
        g.options.independent_restarts = greenkubo.independent_restarts;
        g.seed = seed;
        g.workers = workers;
        return g;
    }
};

/// FNV-1a 64 of the canonical (key-sorted, compact) dump.
inline std::uint64_t config_hash(const json& doc)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : doc.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << x;
    return os.str();
}

namespace detail
{

inline const json& require(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ParseError("missing field \"" + std::string(key) + "\" in " + where);
    return obj.at(key);
}

inline double number(const json& v, const std::string& what)
{
    if (!v.is_number())
        throw ParseError("field \"" + what + "\" must be a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const char* key, double def, const std::string& where)
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return def;
    return number(obj.at(key), where + "." + key);
}

template <class Int>
Int count_or(const json& obj, const char* key, Int def, const std::string& where)
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return def;
    const json& v = obj.at(key);
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
        return static_cast<Int>(v.get<std::uint64_t>());
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19)
            return static_cast<Int>(d);
    }
    throw ParseError("field \"" + where + "." + key + "\" must be a non-negative integer");
}

inline Vec2 vec(const json& v, const std::string& what)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ParseError("field \"" + what + "\" must be a pair of numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline Vec2 vec_or(const json& obj, const char* key, Vec2 def, const std::string& where)
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return def;
    return vec(obj.at(key), where + "." + key);
}

inline const json& section(const json& doc, const char* key)
{
    static const json empty = json::object();
    if (!doc.contains(key))
        return empty;
    if (!doc.at(key).is_object())
        throw ParseError("section \"" + std::string(key) + "\" must be an object");
    return doc.at(key);
}

inline json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

} // namespace detail

namespace detail
{

inline RunConfig parse_config_impl(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("configuration must be a JSON object");
    RunConfig cfg;

    if (doc.contains("schema_version") && count_or<int>(doc, "schema_version", 0, "") != kSchemaVersion)
        throw ParseError("unsupported schema_version");

    // table
    const json& jt = require(doc, "table", "configuration");
    const json& js = require(jt, "scatterers", "table");
    if (!js.is_array())
        throw ParseError("field \"table.scatterers\" must be an array");
    std::vector<Scatterer> sc;
    for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string where = "table.scatterers[" + std::to_string(i) + "]";
        sc.push_back({vec(require(js[i], "center", where), where + ".center"),
                      number(require(js[i], "radius", where), where + ".radius")});
    }
    const double l_max = number_or(jt, "l_max", 2.0, "table");
    cfg.table = TorusTable(std::move(sc), l_max);

    // sim
    const json& jm = require(doc, "sim", "configuration");
    const json& jM = require(jm, "M", "sim");
    if (jM.is_string() && (jM.get<std::string>() == "inf" || jM.get<std::string>() == "infinity"))
        cfg.sim.M = std::numeric_limits<double>::infinity();
    else
        cfg.sim.M = number(jM, "sim.M");
    cfg.sim.r = number_or(jm, "r", 0.05, "sim");
    cfg.sim.delta0 = number_or(jm, "delta0", 0.02, "sim");
    const std::string mode = jm.value("mode", std::string("stopped"));
    if (mode == "stopped")
        cfg.sim.mode = DiskMode::stopped;
    else if (mode == "free")
        cfg.sim.mode = DiskMode::free;
    else
        throw ParseError("field \"sim.mode\" must be \"free\" or \"stopped\"");
    cfg.sim.horizon_time = number_or(jm, "horizon_time", std::numeric_limits<double>::infinity(), "sim");
    cfg.sim.max_collisions = count_or<std::uint64_t>(jm, "max_collisions",
                                                     std::numeric_limits<std::uint64_t>::max(), "sim");
    cfg.Q0 = vec_or(jm, "Q0", cfg.Q0, "sim");
    cfg.V0 = vec_or(jm, "V0", cfg.V0, "sim");

    const json& je = section(doc, "experiment");
    cfg.experiment.name = je.value("name", cfg.experiment.name);
    cfg.experiment.c = number_or(je, "c", cfg.experiment.c, "experiment");
    cfg.experiment.N = count_or<std::size_t>(je, "N", cfg.experiment.N, "experiment");
    cfg.experiment.chi = number_or(je, "chi", cfg.experiment.chi, "experiment");
    cfg.experiment.u0 = vec_or(je, "u0", cfg.experiment.u0, "experiment");
    cfg.experiment.checkpoints = count_or<int>(je, "checkpoints", cfg.experiment.checkpoints, "experiment");
    cfg.experiment.early_fraction = number_or(je, "early_fraction", cfg.experiment.early_fraction, "experiment");

    const json& jg = section(doc, "greenkubo");
    cfg.greenkubo.n = count_or<std::uint64_t>(jg, "n", cfg.greenkubo.n, "greenkubo");
    cfg.greenkubo.J = count_or<int>(jg, "J", cfg.greenkubo.J, "greenkubo");
    cfg.greenkubo.batches = count_or<int>(jg, "batches", cfg.greenkubo.batches, "greenkubo");
    cfg.greenkubo.independent_restarts = jg.value("independent_restarts", false);

    const json& jd = section(doc, "sde");
    cfg.sde.h = number_or(jd, "h", cfg.sde.h, "sde");
    cfg.sde.N = count_or<std::size_t>(jd, "N", cfg.sde.N, "sde");
    cfg.sde.grid_spacing = number_or(jd, "grid_spacing", cfg.sde.grid_spacing, "sde");
    cfg.sde.grid_collisions = count_or<std::uint64_t>(jd, "grid_collisions", cfg.sde.grid_collisions, "sde");

    const json& jc = section(doc, "scan");
    cfg.scan.origin = vec_or(jc, "origin", cfg.scan.origin, "scan");
    cfg.scan.h = number_or(jc, "h", cfg.scan.h, "scan");
    cfg.scan.nx = count_or<int>(jc, "nx", cfg.scan.nx, "scan");
    cfg.scan.ny = count_or<int>(jc, "ny", cfg.scan.ny, "scan");

    cfg.lyapunov_n = count_or<std::uint64_t>(section(doc, "lyapunov"), "n", cfg.lyapunov_n, "lyapunov");
    const json& jh = section(doc, "horizon_check");
    cfg.horizon_directions = count_or<std::size_t>(jh, "n_directions", cfg.horizon_directions, "horizon_check");
    cfg.horizon_offsets = count_or<std::size_t>(jh, "n_offsets", cfg.horizon_offsets, "horizon_check");
    cfg.output_dir = section(doc, "output").value("dir", cfg.output_dir);
    cfg.seed = count_or<std::uint64_t>(doc, "seed", cfg.seed, "configuration");
    cfg.workers = count_or<std::size_t>(doc, "workers", cfg.workers, "configuration");
    cfg.sim.seed = cfg.seed;

    // validation
    try {
        cfg.sim.validate();
    } catch (const ArgumentError& e) {
        throw ValidationError(std::string("sim: ") + e.what());
    }
    const auto hz = check_finite_horizon(cfg.table, cfg.table.l_max(), cfg.horizon_directions,
                                         cfg.horizon_offsets);
    if (!hz.pass)
        throw ValidationError("finite horizon: a free segment of length " + std::to_string(hz.worst_free_path) +
                              " exceeds l_max = " + std::to_string(cfg.table.l_max()));
    const double need = cfg.sim.r + cfg.sim.delta0;
    if (!(dist_to_boundary(wrap_point(cfg.Q0), cfg.table) > need))
        throw ValidationError("admissible Q0: clearance of Q0 must exceed r + delta0");
    if (!std::isinf(cfg.sim.M) && !(cfg.sim.M * norm2(cfg.V0) < 1.0))
        throw ValidationError("energy: M |V0|^2 must be < 1");
    if (cfg.workers == 0)
        cfg.workers = 1;

    // normalized document
    json norm_doc;
    norm_doc["schema_version"] = kSchemaVersion;
    json scat = json::array();
    for (const auto& s : cfg.table.scatterers())
        scat.push_back({{"center", vec_json(s.center)}, {"radius", s.radius}});
    norm_doc["table"] = {{"scatterers", scat}, {"l_max", cfg.table.l_max()}};
    json sim = {{"M", std::isinf(cfg.sim.M) ? json("inf") : json(cfg.sim.M)},
                {"r", cfg.sim.r},
                {"delta0", cfg.sim.delta0},
                {"mode", mode},
                {"Q0", vec_json(cfg.Q0)},
                {"V0", vec_json(cfg.V0)}};
    if (std::isfinite(cfg.sim.horizon_time))
        sim["horizon_time"] = cfg.sim.horizon_time;
    if (cfg.sim.max_collisions != std::numeric_limits<std::uint64_t>::max())
        sim["max_collisions"] = cfg.sim.max_collisions;
    norm_doc["sim"] = sim;
    norm_doc["experiment"] = {{"name", cfg.experiment.name},
                              {"c", cfg.experiment.c},
                              {"N", cfg.experiment.N},
                              {"chi", cfg.experiment.chi},
                              {"u0", vec_json(cfg.experiment.u0)},
                              {"checkpoints", cfg.experiment.checkpoints},
                              {"early_fraction", cfg.experiment.early_fraction}};
    norm_doc["greenkubo"] = {{"n", cfg.greenkubo.n},
                             {"J", cfg.greenkubo.J},
                             {"batches", cfg.greenkubo.batches},
                             {"independent_restarts", cfg.greenkubo.independent_restarts}};
    norm_doc["sde"] = {{"h", cfg.sde.h},
                       {"N", cfg.sde.N},
                       {"grid_spacing", cfg.sde.grid_spacing},
                       {"grid_collisions", cfg.sde.grid_collisions}};
    norm_doc["scan"] = {{"origin", vec_json(cfg.scan.origin)}, {"h", cfg.scan.h}, {"nx", cfg.scan.nx}, {"ny", cfg.scan.ny}};
    norm_doc["lyapunov"] = {{"n", cfg.lyapunov_n}};
    norm_doc["horizon_check"] = {{"n_directions", cfg.horizon_directions}, {"n_offsets", cfg.horizon_offsets}};
    norm_doc["output"] = {{"dir", cfg.output_dir}};
    norm_doc["seed"] = cfg.seed;
    norm_doc["workers"] = cfg.workers;
    cfg.document = std::move(norm_doc);
    return cfg;
}

} // namespace detail

/// Parse and validate a configuration document. Malformed input raises
/// ParseError; geometric problems raise ValidationError.
inline RunConfig parse_config(const std::string& text)
{
    try {
        return detail::parse_config_impl(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad configuration value: ") + e.what());
    }
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Replace the master seed, keeping the embedded document in sync.
inline void set_seed(RunConfig& cfg, std::uint64_t seed)
{
    cfg.seed = seed;
    cfg.sim.seed = seed;
    cfg.document["seed"] = seed;
}

inline void set_workers(RunConfig& cfg, std::size_t workers)
{
    cfg.workers = std::max<std::size_t>(1, workers);
    cfg.document["workers"] = cfg.workers;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Round-trip formatting with 17 significant digits.
inline std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline json mat_json(const Mat2& m) { return json::array({json::array({m.a, m.b}), json::array({m.c, m.d})}); }

/// Every report carries the config, its hash and the seed.
inline json report_header(const RunConfig& cfg, const std::string& kind)
{
    return {{"schema_version", kSchemaVersion},
            {"kind", kind},
            {"config_hash", hex64(config_hash(cfg.document))},
            {"seed", cfg.seed},
            {"config", cfg.document}};
}

inline json to_json(const DiffusionMatrix& d)
{
    json lags = json::array();
    for (std::size_t j = 0; j < d.per_lag.size(); ++j)
        lags.push_back({{"j", j}, {"C", mat_json(d.per_lag[j])}, {"stderr", mat_json(d.per_lag_stderr[j])}});
    return {{"Q", detail::vec_json(d.Q)},
            {"r_disk", d.r_disk},
            {"J", d.lags_used},
            {"matrix", mat_json(d.m)},
            {"stderr", mat_json(d.stderr)},
            {"n_collisions", d.n_collisions},
            {"n_disk_hits", d.n_disk_hits},
            {"per_lag", lags}};
}

inline json to_json(const EnsembleSummary& s)
{
    json cps = json::array();
    for (std::size_t k = 0; k < s.tau.size(); ++k) {
        cps.push_back({{"tau", s.tau[k]},
                       {"mean_V", detail::vec_json(s.mean_V[k])},
                       {"se_mean_V", detail::vec_json(s.se_mean_V[k])},
                       {"mean_Q", detail::vec_json(s.mean_Q[k])},
                       {"se_mean_Q", detail::vec_json(s.se_mean_Q[k])},
                       {"cov_V", mat_json(s.cov_V[k])},
                       {"se_cov_V", mat_json(s.se_cov_V[k])},
                       {"cov_Q", mat_json(s.cov_Q[k])},
                       {"se_cov_Q", mat_json(s.se_cov_Q[k])},
                       {"kurtosis_V", detail::vec_json(s.kurtosis_V[k])},
                       {"kurtosis_Q", detail::vec_json(s.kurtosis_Q[k])},
                       {"stopped", s.stopped[k]}});
    }
    return {{"regime", to_string(s.regime)},
            {"n_paths", s.n_paths},
            {"n_stopped", s.n_stopped},
            {"checkpoints", cps}};
}

inline json to_json(const ComparisonReport& r)
{
    json cps = json::array();
    for (const auto& c : r.checkpoints)
        cps.push_back({{"tau", c.tau},
                       {"max_mean_z", c.max_mean_z},
                       {"max_cov_z", c.max_cov_z},
                       {"cov_rel_V", c.cov_rel_V},
                       {"cov_rel_Q", c.cov_rel_Q},
                       {"max_kurtosis_z", c.max_kurtosis_z},
                       {"ks", {c.ks[0], c.ks[1], c.ks[2], c.ks[3]}},
                       {"ks_critical", c.ks_critical},
                       {"stopped_z", c.stopped_z},
                       {"pass", c.pass}});
    return {{"z_critical", r.z_critical},
            {"test_alpha", r.test_alpha},
            {"means_pass", r.means_pass},
            {"cov_pass", r.cov_pass},
            {"kurtosis_pass", r.kurtosis_pass},
            {"ks_pass", r.ks_pass},
            {"stopped_pass", r.stopped_pass},
            {"pass", r.pass},
            {"checkpoints", cps}};
}

/// Doubles are printed in shortest round-trip form, so values reload exactly.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline std::string csv_preamble(const RunConfig& cfg)
{
    return "# config_hash=" + hex64(config_hash(cfg.document)) + " seed=" + std::to_string(cfg.seed) +
           "\n# config=" + cfg.document.dump() + "\n";
}

/// Columns: path,tau,Vx,Vy,Qx,Qy,frozen
inline std::string ensemble_csv(const Ensemble& e, const RunConfig& cfg)
{
    std::ostringstream os;
    os << csv_preamble(cfg) << "# regime=" << to_string(e.regime) << "\n";
    os << "path,tau,Vx,Vy,Qx,Qy,frozen\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < e.paths.size(); ++i) {
        const auto& p = e.paths[i];
        for (std::size_t k = 0; k < e.tau.size(); ++k)
            os << i << ',' << e.tau[k] << ',' << p.V[k].x << ',' << p.V[k].y << ',' << p.Q[k].x << ','
               << p.Q[k].y << ',' << (p.frozen[k] ? 1 : 0) << '\n';
    }
    return os.str();
}

/// Inverse of ensemble_csv. A path counts as stopped when its last sample is frozen.
inline Ensemble read_ensemble_csv(const std::string& text)
{
    Ensemble e;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const auto pos = line.find("regime=");
            if (pos != std::string::npos) {
                const std::string r = line.substr(pos + 7);
                e.regime = r == "thm1" ? Regime::thm1 : r == "thm2" ? Regime::thm2 : Regime::thm3;
            }
            continue;
        }
        if (!header) {
            if (line != "path,tau,Vx,Vy,Qx,Qy,frozen")
                throw ParseError("unexpected ensemble CSV header: " + line);
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string f[7];
        for (int k = 0; k < 7; ++k)
            if (!std::getline(ls, f[k], k < 6 ? ',' : '\n'))
                throw ParseError("short row at line " + std::to_string(line_no));
        try {
            const std::size_t path = std::stoull(f[0]);
            const double tau = std::stod(f[1]);
            if (path >= e.paths.size())
                e.paths.resize(path + 1);
            auto& p = e.paths[path];
            if (path == 0)
                e.tau.push_back(tau);
            p.V.push_back({std::stod(f[2]), std::stod(f[3])});
            p.Q.push_back({std::stod(f[4]), std::stod(f[5])});
            p.frozen.push_back(f[6] == "1");
        } catch (const std::logic_error&) {
            throw ParseError("bad number at line " + std::to_string(line_no));
        }
    }
    for (auto& p : e.paths) {
        if (p.V.size() != e.tau.size())
            throw ParseError("ensemble CSV rows are not aligned with the checkpoint grid");
        p.stopped = !p.frozen.empty() && p.frozen.back();
    }
    return e;
}

/// Columns: t,n_collisions,Qx,Qy,Vx,Vy,frozen
inline std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, const RunConfig& cfg)
{
    std::ostringstream os;
    os << csv_preamble(cfg) << "t,n_collisions,Qx,Qy,Vx,Vy,frozen\n" << std::setprecision(17);
    for (const auto& r : rows)
        os << r.t << ',' << r.n_collisions << ',' << r.Q.x << ',' << r.Q.y << ',' << r.V.x << ',' << r.V.y
           << ',' << (r.frozen ? 1 : 0) << '\n';
    return os.str();
}

/// Columns: Qx,Qy,neighbor_Qx,neighbor_Qy,h,diff,error,ratio,inconclusive
inline std::string scan_csv(const ScanReport& rep, const RunConfig& cfg)
{
    std::ostringstream os;
    os << csv_preamble(cfg) << "Qx,Qy,neighbor_Qx,neighbor_Qy,h,diff,error,ratio,inconclusive\n"
       << std::setprecision(17);
    for (const auto& p : rep.pairs) {
        const Vec2 a = rep.grid.node(p.i1, p.j1), b = rep.grid.node(p.i2, p.j2);
        os << a.x << ',' << a.y << ',' << b.x << ',' << b.y << ',' << p.h << ',' << p.diff << ',' << p.error
           << ',' << p.ratio << ',' << (p.inconclusive ? 1 : 0) << '\n';
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ArgumentError("cannot write " + path);
    out << content;
}

} // namespace bbm

#endif // BBM_IO_HPP
