// Command-line front end: simulate, greenkubo, scan-sigma, lyapunov,
// check-horizon, sde, experiment thm1|thm2|thm3, compare.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bbm/bbm.hpp"

namespace fs = std::filesystem;
using namespace bbm;

namespace
{

struct Globals
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> workers;
};

RunConfig load(const Globals& g)
{
    RunConfig cfg = load_config(g.config);
    if (g.seed)
        set_seed(cfg, *g.seed);
    if (g.workers)
        set_workers(cfg, *g.workers);
    if (!g.out.empty())
        cfg.output_dir = g.out;
    fs::create_directories(cfg.output_dir);
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name)
{
    return (fs::path(cfg.output_dir) / name).string();
}

std::string mat_str(const Mat2& m)
{
    return "[" + fmt(m.a) + "," + fmt(m.b) + ";" + fmt(m.c) + "," + fmt(m.d) + "]";
}

int cmd_simulate(const RunConfig& cfg)
{
    SimParams p = cfg.sim;
    Rng rng = Rng::stream(cfg.seed, 0, 0x5e11ULL);
    const SystemState s0 = sample_initial_state(cfg.Q0, cfg.V0, p, cfg.table, rng);
    ObservationPlan plan;
    plan.record_collisions = true;
    const Trajectory tr = evolve(s0, p, cfg.table, plan);
    write_file(out_path(cfg, "simulate.csv"), trajectory_csv(tr.collisions, cfg));
    json rep = report_header(cfg, "simulate");
    rep["collisions"] = tr.final_state.n_collisions;
    rep["final_time"] = tr.final_state.t;
    rep["stopped"] = tr.stop_time.has_value();
    rep["wall_contact"] = tr.wall_contact;
    rep["max_energy_error"] = tr.audit.max_energy_error;
    rep["bound_violations"] = tr.audit.bound_violations;
    write_file(out_path(cfg, "simulate.json"), dump_json(rep));
    std::printf("simulate: collisions=%llu t=%s stopped=%d max_energy_error=%s\n",
                static_cast<unsigned long long>(tr.final_state.n_collisions), fmt(tr.final_state.t).c_str(),
                tr.stop_time ? 1 : 0, fmt(tr.audit.max_energy_error).c_str());
    return 0;
}

int cmd_greenkubo(const RunConfig& cfg)
{
    Rng rng = Rng::stream(cfg.seed, 0, kGridSalt);
    const GkConfig g = cfg.gk_config();
    const DiffusionMatrix d = green_kubo(cfg.Q0, cfg.table, cfg.sim.r, g.n_collisions, g.J, rng, g.options);
    const SigmaPieces pc = sigma_pieces(d, cfg.table, cfg.sim.r, cfg.V0, cfg.sim.M);
    json rep = report_header(cfg, "greenkubo");
    rep["result"] = to_json(d);
    rep["sigma2"] = mat_json(pc.sigma2);
    rep["mean_free_path"] = pc.mean_free_path;
    write_file(out_path(cfg, "greenkubo.json"), dump_json(rep));
    std::printf("greenkubo: J=%d sigma_bar2=%s stderr=%s\n", d.lags_used, mat_str(d.m).c_str(),
                mat_str(d.stderr).c_str());
    return 0;
}

int cmd_scan(const RunConfig& cfg)
{
    GridSpec grid;
    grid.origin = cfg.scan.origin;
    grid.h = cfg.scan.h;
    grid.nx = cfg.scan.nx;
    grid.ny = cfg.scan.ny;
    const ScanReport rep = scan_sigma(grid, cfg.table, cfg.sim.r, cfg.sim.delta0, cfg.gk_config());
    write_file(out_path(cfg, "scan_sigma.csv"), scan_csv(rep, cfg));
    json j = report_header(cfg, "scan-sigma");
    j["max_ratio"] = rep.max_ratio;
    j["conclusive_pairs"] = rep.conclusive;
    j["pairs"] = rep.pairs.size();
    write_file(out_path(cfg, "scan_sigma.json"), dump_json(j));
    std::printf("scan-sigma: max_ratio=%s conclusive=%d pairs=%zu\n", fmt(rep.max_ratio).c_str(), rep.conclusive,
                rep.pairs.size());
    return 0;
}

int cmd_lyapunov(const RunConfig& cfg)
{
    Rng rng = Rng::stream(cfg.seed, 0, 0x1a9ULL);
    const auto a = lyapunov_exponent(cfg.Q0, cfg.table, cfg.sim.r, cfg.lyapunov_n, rng);
    const auto b = lyapunov_separation(cfg.Q0, cfg.table, cfg.sim.r, cfg.lyapunov_n, rng);
    const double bound = std::log(1.0 + a.min_free_path * cfg.table.min_curvature());
    json rep = report_header(cfg, "lyapunov");
    rep["cocycle"] = {{"chi", a.chi}, {"stderr", a.stderr}};
    rep["separation"] = {{"chi", b.chi}, {"stderr", b.stderr}, {"restarts", b.skipped}};
    rep["lower_bound"] = bound;
    write_file(out_path(cfg, "lyapunov.json"), dump_json(rep));
    std::printf("lyapunov: chi=%s stderr=%s separation=%s lower_bound=%s\n", fmt(a.chi).c_str(),
                fmt(a.stderr).c_str(), fmt(b.chi).c_str(), fmt(bound).c_str());
    return 0;
}

int cmd_check_horizon(const RunConfig& cfg)
{
    const auto rep = check_finite_horizon(cfg.table, cfg.table.l_max(), cfg.horizon_directions, cfg.horizon_offsets);
    std::printf("horizon: %s worst_free_path=%s\n", rep.pass ? "pass" : "fail", fmt(rep.worst_free_path).c_str());
    return rep.pass ? 0 : 1;
}

Regime parse_regime(const std::string& name)
{
    if (name == "thm1")
        return Regime::thm1;
    if (name == "thm2")
        return Regime::thm2;
    if (name == "thm3")
        return Regime::thm3;
    throw ArgumentError("unknown regime \"" + name + "\"");
}

std::vector<double> checkpoints_of(const RunConfig& cfg)
{
    return default_checkpoints(cfg.experiment.c, cfg.experiment.checkpoints, cfg.experiment.early_fraction);
}

int cmd_sde(const RunConfig& cfg)
{
    const Regime regime = parse_regime(cfg.experiment.name);
    LimitParams lp;
    lp.regime = regime;
    lp.chi = cfg.experiment.chi;
    lp.u0 = normalized(cfg.experiment.u0);
    lp.Q0 = cfg.Q0;
    lp.c = cfg.experiment.c;
    lp.table = &cfg.table;
    lp.h = cfg.sde.h > 0.0 ? cfg.sde.h : 1e-3 * cfg.experiment.c;
    lp.N = cfg.sde.N;
    lp.seed = cfg.seed;
    lp.checkpoints = checkpoints_of(cfg);
    lp.workers = cfg.workers;
    GkConfig gk = cfg.gk_config();
    switch (regime) {
    case Regime::thm1:
        lp.sigma_field = thm1_sigma_line(cfg.Q0, lp.chi, lp.u0, lp.c, 9, cfg.table, cfg.sim.r, gk);
        break;
    case Regime::thm2: {
        gk.n_collisions = cfg.sde.grid_collisions;
        const double clearance = cfg.sim.r + cfg.sim.delta0;
        const GridSpec spec = reachable_grid(cfg.Q0, cfg.table, clearance, cfg.sde.grid_spacing);
        lp.sigma_field = SigmaField::grid(
            std::make_shared<const SigmaGrid>(build_sigma_grid(spec, cfg.table, cfg.sim.r, gk)));
        lp.stop_clearance = clearance;
        break;
    }
    case Regime::thm3:
        lp.sigma_field = SigmaField::isotropic(cfg.table);
        lp.stop_clearance = cfg.sim.delta0;
        break;
    }
    const Ensemble ens = simulate_limit(lp);
    const std::string stem = std::string("sde_") + to_string(regime);
    write_file(out_path(cfg, stem + ".csv"), ensemble_csv(ens, cfg));
    json rep = report_header(cfg, "sde");
    rep["summary"] = to_json(summarize(ens));
    write_file(out_path(cfg, stem + ".json"), dump_json(rep));
    std::printf("sde: regime=%s paths=%zu stopped=%zu\n", to_string(regime), ens.paths.size(), ens.n_stopped());
    return 0;
}

int cmd_experiment(const RunConfig& cfg, const std::string& name)
{
    const Regime regime = parse_regime(name);
    BilliardRunConfig bc;
    bc.M = cfg.sim.M;
    bc.r_disk = cfg.sim.r;
    bc.delta0 = cfg.sim.delta0;
    bc.Q0 = cfg.Q0;
    bc.chi = cfg.experiment.chi;
    bc.u0 = cfg.experiment.u0;
    bc.c = cfg.experiment.c;
    bc.N = cfg.experiment.N;
    bc.checkpoints = checkpoints_of(cfg);
    bc.seed = cfg.seed;
    bc.workers = cfg.workers;
    ThmRun run;
    switch (regime) {
    case Regime::thm1: run = run_thm1(bc, cfg.table); break;
    case Regime::thm2: run = run_thm2(bc, cfg.table); break;
    case Regime::thm3: run = run_thm3(bc, cfg.table); break;
    }
    const std::string stem = "experiment_" + name;
    write_file(out_path(cfg, stem + ".csv"), ensemble_csv(run.ensemble, cfg));
    json rep = report_header(cfg, "experiment");
    rep["summary"] = to_json(run.summary);
    rep["collision_rate"] = collision_rate(run.ensemble);
    rep["wall_contacts"] = run.ensemble.wall_contacts;
    write_file(out_path(cfg, stem + ".json"), dump_json(rep));
    const std::size_t last = run.summary.tau.size() - 1;
    std::printf("experiment: regime=%s paths=%zu stopped=%zu cov_V_end=%s\n", name.c_str(), run.summary.n_paths,
                run.summary.n_stopped, mat_str(run.summary.cov_V[last]).c_str());
    return 0;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_compare(const RunConfig& cfg, const std::string& a, const std::string& b)
{
    const Ensemble ea = read_ensemble_csv(slurp(a));
    const Ensemble eb = read_ensemble_csv(slurp(b));
    const ComparisonReport r = compare_ensembles(ea, eb);
    json rep = report_header(cfg, "compare");
    rep["a"] = a;
    rep["b"] = b;
    rep["report"] = to_json(r);
    write_file(out_path(cfg, "compare.json"), dump_json(rep));
    std::printf("compare: %s means=%d cov=%d kurtosis=%d ks=%d stopped=%d\n", r.pass ? "pass" : "fail",
                r.means_pass, r.cov_pass, r.kurtosis_pass, r.ks_pass, r.stopped_pass);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Brownian-motion-from-billiards toolkit"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    auto add_globals = [&](CLI::App* sub) {
        sub->add_option("--config", g.config, "configuration JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--out", g.out, "output directory");
        sub->add_option("--workers", workers, "worker threads");
    };
    std::string regime, file_a, file_b;
    auto* simulate = app.add_subcommand("simulate", "event-driven run of the two-particle system");
    auto* greenkubo = app.add_subcommand("greenkubo", "Green-Kubo diffusion matrix at Q0");
    auto* scan = app.add_subcommand("scan-sigma", "regularity scan of sigma_Q on a grid");
    auto* lyapunov = app.add_subcommand("lyapunov", "Lyapunov exponent of the frozen billiard");
    auto* horizon = app.add_subcommand("check-horizon", "finite-horizon sweep");
    auto* sde = app.add_subcommand("sde", "limit-process ensemble for experiment.name");
    auto* experiment = app.add_subcommand("experiment", "rescaled billiard ensemble");
    experiment->add_option("regime", regime, "thm1, thm2 or thm3")->required();
    auto* compare = app.add_subcommand("compare", "two-sample comparison of ensemble CSV files");
    compare->add_option("a", file_a, "first ensemble CSV")->required();
    compare->add_option("b", file_b, "reference ensemble CSV")->required();
    for (auto* sub : {simulate, greenkubo, scan, lyapunov, horizon, sde, experiment, compare})
        add_globals(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            if (sub->count("--seed"))
                g.seed = seed;
            if (sub->count("--workers"))
                g.workers = workers;
        }
        const RunConfig cfg = load(g);
        if (*simulate)
            return cmd_simulate(cfg);
        if (*greenkubo)
            return cmd_greenkubo(cfg);
        if (*scan)
            return cmd_scan(cfg);
        if (*lyapunov)
            return cmd_lyapunov(cfg);
        if (*horizon)
            return cmd_check_horizon(cfg);
        if (*sde)
            return cmd_sde(cfg);
        if (*experiment)
            return cmd_experiment(cfg, regime);
        if (*compare)
            return cmd_compare(cfg, file_a, file_b);
    } catch (const Error& e) {
        std::fprintf(stderr, "%s: %s\n", e.category(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
