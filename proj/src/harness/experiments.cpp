#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "isac/harness.hpp"
#include "json.hpp"

namespace isac::bench {

using ojson = nlohmann::ordered_json;

namespace {

namespace fs = std::filesystem;

// Stream salts; everything a cell consumes is derived from its seed so the
// outcome is independent of scheduling and thread count.
constexpr std::uint64_t kSaltScene = 0xA1;
constexpr std::uint64_t kSaltChannel = 0xA2;
constexpr std::uint64_t kSaltSignal = 0xA3;
constexpr std::uint64_t kSaltSolver = 0xA4;
constexpr std::uint64_t kSaltValidation = 0xA5;

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt, std::uint64_t k) {
    return sub_seed(sub_seed(seed, salt), k);
}

struct Cell {
    std::uint64_t seed = 0;
    int frame_len = 0;
    double snr_db = 0.0;
    double r0_frac = 0.0;
};

struct CellOutput {
    std::vector<std::vector<std::string>> rows;
    ojson results = ojson::array();
    ojson traces = ojson::array();
    ojson errors = ojson::array();
};

using CellFn = std::function<CellOutput(const ExperimentConfig&, const Cell&)>;

struct Plan {
    std::vector<std::string> columns;
    std::vector<Cell> cells;
    CellFn fn;
    std::vector<ojson> plots;
};

class Stopwatch {
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();

  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

std::string fmt(double x) { return detail::format_number(x); }

ojson cell_json(const Cell& c) {
    return ojson{{"L", c.frame_len},
                 {"snr_db", c.snr_db},
                 {"r0_frac", c.r0_frac}};
}

ojson result_entry(const Cell& c, const std::string& scheme, double wall_ms) {
    ojson e;
    e["seed"] = c.seed;
    e["scheme"] = scheme;
    e["cell"] = cell_json(c);
    e["wall_ms"] = wall_ms;
    return e;
}

ojson trace_entry(const Cell& c, const std::string& scheme,
                  const std::vector<double>& objective) {
    ojson e;
    e["seed"] = c.seed;
    e["scheme"] = scheme;
    e["cell"] = cell_json(c);
    e["objective"] = objective;
    return e;
}

SensingScene make_scene(const ExperimentConfig& cfg, const Cell& c) {
    Philox rng(sub_seed(c.seed, kSaltScene));
    cmat rh = gen_rh(cfg.n_t, 1.0, 10.0, rng);
    return SensingScene(std::move(rh), cfg.sigma_s2(), cfg.n_r, c.frame_len,
                        cfg.power(c.snr_db));
}

cmat make_channel(const ExperimentConfig& cfg, std::uint64_t seed) {
    Philox rng(sub_seed(seed, kSaltChannel));
    return sample_cscg(cfg.n_u, cfg.n_t, rng);
}

SignalBatch eval_batch(const ExperimentConfig& cfg, const Cell& c,
                       std::uint64_t salt) {
    return SignalBatch::generate(
        mix(c.seed, salt, static_cast<std::uint64_t>(c.frame_len)),
        cfg.n_realizations, cfg.n_t, c.frame_len);
}

// Iterations until the trace enters and stays within 1% of its final value.
int iters_to_band(const std::vector<double>& trace) {
    const double fin = trace.back();
    const double tol = 0.01 * std::abs(fin);
    std::size_t i = trace.size() - 1;
    while (i > 0 && std::abs(trace[i - 1] - fin) <= tol) --i;
    return static_cast<int>(i);
}

std::vector<Cell> grid_cells(const ExperimentConfig& cfg, bool sweep_r0) {
    std::vector<Cell> cells;
    for (std::uint64_t seed : cfg.seeds)
        for (int L : cfg.frame_len_grid)
            for (double snr : cfg.snr_grid)
                for (double frac : sweep_r0
                                       ? cfg.r0_grid
                                       : std::vector<double>{cfg.r0_grid[0]})
                    cells.push_back({seed, L, snr, frac});
    return cells;
}

ojson plot_spec(const char* out, const char* title, const char* x,
                const char* y, bool x_log = false, bool y_log = false,
                bool y_db = false) {
    ojson spec{{"x", x}, {"y", y}, {"series", "scheme"}, {"title", title},
               {"out", out}};
    if (x_log) spec["x_log"] = true;
    if (y_log) spec["y_log"] = true;
    if (y_db) spec["y_db"] = true;
    return spec;
}

CellOutput run_cov_error(const ExperimentConfig& cfg, const Cell& c) {
    Stopwatch watch;
    CellOutput out;
    const SignalBatch batch = eval_batch(cfg, c, kSaltSignal);
    const cmat eye = cmat::Identity(cfg.n_t, cfg.n_t);
    std::vector<double> vals;
    for (const cmat& s : batch.realizations) {
        const double L = static_cast<double>(c.frame_len);
        const double err = ((s * s.adjoint()) / L - eye).squaredNorm() /
                           static_cast<double>(cfg.n_t);
        vals.push_back(10.0 * std::log10(err));
    }
    const MeanSe m = mean_se(vals);
    out.rows.push_back({std::to_string(c.seed), "sample-cov",
                        std::to_string(c.frame_len), fmt(m.mean),
                        fmt(m.se)});
    ojson e = result_entry(c, "sample-cov", watch.ms());
    e["err_db"] = m.mean;
    e["err_db_se"] = m.se;
    e["iterations"] = 0;
    out.results.push_back(std::move(e));
    return out;
}

CellOutput run_asymptotic_l(const ExperimentConfig& cfg, const Cell& c) {
    Stopwatch watch;
    CellOutput out;
    const SensingScene scene = make_scene(cfg, c);
    const cmat w = waterfill_lmmse(scene);
    const SignalBatch batch = eval_batch(cfg, c, kSaltValidation);
    const MeanSe stats = elmmse_mc_stats(w, scene, batch);
    const double det_cost = lmmse_cost(w, scene);
    const double gap = (stats.mean - det_cost) / det_cost;
    out.rows.push_back({std::to_string(c.seed), "waterfill",
                        std::to_string(c.frame_len), fmt(stats.mean),
                        fmt(stats.se), fmt(det_cost), fmt(gap)});
    ojson e = result_entry(c, "waterfill", watch.ms());
    e["elmmse"] = stats.mean;
    e["elmmse_se"] = stats.se;
    e["lmmse"] = det_cost;
    e["gap_rel"] = gap;
    e["iterations"] = 0;
    out.results.push_back(std::move(e));
    return out;
}

CellOutput run_convergence(const ExperimentConfig& cfg, const Cell& c) {
    Stopwatch watch;
    CellOutput out;
    const SensingScene scene = make_scene(cfg, c);
    const cmat init = waterfill_lmmse(scene);
    const SignalBatch validation = eval_batch(cfg, c, kSaltValidation);
    const std::uint64_t solver_seed =
        mix(c.seed, kSaltSolver, static_cast<std::uint64_t>(c.frame_len));
    const OptResult res =
        cfg.algorithm == "sgp"
            ? sgp(scene, cfg.batch_size, cfg.schedule, init, solver_seed,
                  cfg.sgd_stop, validation)
            : mb_sgp(scene, cfg.batch_size, cfg.schedule, cfg.betas, init,
                     solver_seed, cfg.sgd_stop, validation);
    const MeanSe stats = elmmse_mc_stats(res.w, scene, validation);
    const int band = iters_to_band(res.trace);
    out.rows.push_back({std::to_string(c.seed), cfg.algorithm,
                        std::to_string(c.frame_len), fmt(c.snr_db),
                        fmt(stats.mean), fmt(stats.se),
                        std::to_string(res.iterations),
                        std::to_string(band)});
    ojson e = result_entry(c, cfg.algorithm, watch.ms());
    e["elmmse"] = stats.mean;
    e["elmmse_se"] = stats.se;
    e["iterations"] = res.iterations;
    e["iters_to_1pct"] = band;
    out.results.push_back(std::move(e));
    out.traces.push_back(trace_entry(c, cfg.algorithm, res.trace));
    return out;
}

CellOutput run_sensing_sweep(const ExperimentConfig& cfg, const Cell& c) {
    CellOutput out;
    const SensingScene scene = make_scene(cfg, c);
    const SignalBatch batch = eval_batch(cfg, c, kSaltSignal);
    auto push = [&](const std::string& scheme, const MeanSe& stats,
                    int iterations, double wall_ms) {
        out.rows.push_back({std::to_string(c.seed), scheme, fmt(c.snr_db),
                            std::to_string(c.frame_len), fmt(stats.mean),
                            fmt(stats.se)});
        ojson e = result_entry(c, scheme, wall_ms);
        e["elmmse"] = stats.mean;
        e["elmmse_se"] = stats.se;
        e["iterations"] = iterations;
        out.results.push_back(std::move(e));
    };

    Stopwatch w1;
    const cmat wf = waterfill_lmmse(scene);
    push("waterfill", elmmse_mc_stats(wf, scene, batch), 0, w1.ms());

    Stopwatch w2;
    std::vector<double> ddp_vals;
    for (const cmat& s : batch.realizations)
        ddp_vals.push_back(lmmse_cost_given_s(ddp_solve(s, scene), s, scene));
    push("ddp", mean_se(ddp_vals), 0, w2.ms());

    Stopwatch w3;
    const OptResult res = mb_sgp(
        scene, cfg.batch_size, cfg.schedule, cfg.betas, wf,
        mix(c.seed, kSaltSolver, static_cast<std::uint64_t>(c.frame_len)),
        cfg.sgd_stop, batch);
    push("mb-sgp", elmmse_mc_stats(res.w, scene, batch), res.iterations,
         w3.ms());
    out.traces.push_back(trace_entry(c, "mb-sgp", res.trace));
    return out;
}

CellOutput run_hsnr_check(const ExperimentConfig& cfg, const Cell& c) {
    Stopwatch watch;
    CellOutput out;
    const SensingScene scene = make_scene(cfg, c);
    const cmat w = waterfill_lmmse(scene);
    const SignalBatch batch = eval_batch(cfg, c, kSaltSignal);
    const MeanSe stats = elmmse_mc_stats(w, scene, batch);
    const double surrogate = hsnr_cost(w * w.adjoint(), scene);
    const double rel = std::abs(stats.mean - surrogate) / stats.mean;
    out.rows.push_back({std::to_string(c.seed), "waterfill", fmt(c.snr_db),
                        std::to_string(c.frame_len), fmt(stats.mean),
                        fmt(stats.se), fmt(surrogate), fmt(rel)});
    ojson e = result_entry(c, "waterfill", watch.ms());
    e["elmmse"] = stats.mean;
    e["elmmse_se"] = stats.se;
    e["hsnr"] = surrogate;
    e["rel_err"] = rel;
    e["iterations"] = 0;
    out.results.push_back(std::move(e));
    return out;
}

// Shared by the tradeoff and frame-length experiments; rate floors are
// fractions of the seed's channel capacity, capped at 0.999 of it so the
// feasible set keeps an interior.
struct IsacCell {
    SensingScene scene;
    CommScene comm;
    SignalBatch batch;
    double capacity;
    double r0_bits;
};

IsacCell make_isac_cell(const ExperimentConfig& cfg, const Cell& c) {
    SensingScene scene = make_scene(cfg, c);
    const cmat hc = make_channel(cfg, c.seed);
    const double power = cfg.power(c.snr_db);
    const CapacityPoint cap = capacity_waterfill(hc, cfg.sigma_c2(), power);
    const double r0 = std::min(c.r0_frac, 0.999) * cap.rate;
    CommScene comm(hc, cfg.sigma_c2(), r0, power);
    SignalBatch batch = eval_batch(cfg, c, kSaltSignal);
    return {std::move(scene), std::move(comm), std::move(batch), cap.rate,
            r0};
}

struct DdpEnsemble {
    MeanSe stats;
    std::vector<double> per_realization;
    double avg_rate;
    int mean_rounds;
    std::vector<double> first_trace;
};

DdpEnsemble run_ddp_ensemble(const ExperimentConfig& cfg,
                             const IsacCell& cell) {
    std::vector<IsacSolution> sols;
    std::vector<double> vals;
    long rounds = 0;
    for (const cmat& s : cell.batch.realizations) {
        sols.push_back(
            ddp_isac(s, cell.scene, cell.comm, cfg.penalty, cfg.schedule));
        vals.push_back(sols.back().elmmse);
        rounds += static_cast<long>(sols.back().trace.size()) - 1;
    }
    const RateGap gap = prop2_gap(sols, cell.comm, cell.scene.power);
    std::vector<double> first_trace;
    for (const IsacTraceRow& row : sols.front().trace)
        first_trace.push_back(row.objective);
    return {mean_se(vals), vals, gap.avg_rate,
            static_cast<int>(rounds / static_cast<long>(sols.size())),
            first_trace};
}

CellOutput run_isac_tradeoff(const ExperimentConfig& cfg, const Cell& c) {
    CellOutput out;
    const IsacCell cell = make_isac_cell(cfg, c);
    auto push = [&](const std::string& scheme, const MeanSe& stats,
                    double rate, int iterations, double wall_ms) {
        out.rows.push_back({std::to_string(c.seed), scheme, fmt(c.snr_db),
                            std::to_string(c.frame_len), fmt(c.r0_frac),
                            fmt(cell.r0_bits), fmt(cell.capacity),
                            fmt(stats.mean), fmt(stats.se), fmt(rate)});
        ojson e = result_entry(c, scheme, wall_ms);
        e["elmmse"] = stats.mean;
        e["elmmse_se"] = stats.se;
        e["rate"] = rate;
        e["capacity"] = cell.capacity;
        e["iterations"] = iterations;
        out.results.push_back(std::move(e));
    };

    Stopwatch w1;
    const DdpEnsemble ddp = run_ddp_ensemble(cfg, cell);
    push("ddp", ddp.stats, ddp.avg_rate, ddp.mean_rounds, w1.ms());
    out.traces.push_back(trace_entry(c, "ddp", ddp.first_trace));

    Stopwatch w2;
    const IsacSolution dip = dip_isac_sgp_ao(
        cell.scene, cell.comm, cfg.penalty, cfg.schedule, cfg.batch_size,
        mix(c.seed, kSaltSolver, static_cast<std::uint64_t>(c.frame_len)),
        cell.batch);
    push("dip", elmmse_mc_stats(dip.w, cell.scene, cell.batch),
         dip.achieved_rate, static_cast<int>(dip.trace.size()) - 1, w2.ms());
    std::vector<double> dip_trace;
    for (const IsacTraceRow& row : dip.trace)
        dip_trace.push_back(row.objective);
    out.traces.push_back(trace_entry(c, "dip", dip_trace));

    Stopwatch w3;
    const cmat det = detopt_baseline(cell.scene, cell.comm);
    push("detopt", elmmse_mc_stats(det, cell.scene, cell.batch),
         achievable_rate(det, cell.comm), 0, w3.ms());
    return out;
}

CellOutput run_isac_framelen(const ExperimentConfig& cfg, const Cell& c) {
    CellOutput out;
    const IsacCell cell = make_isac_cell(cfg, c);
    auto push = [&](const std::string& scheme, const MeanSe& stats,
                    double rate, int iterations, double wall_ms) {
        out.rows.push_back({std::to_string(c.seed), scheme,
                            std::to_string(c.frame_len), fmt(c.snr_db),
                            fmt(c.r0_frac), fmt(stats.mean), fmt(stats.se),
                            fmt(rate)});
        ojson e = result_entry(c, scheme, wall_ms);
        e["elmmse"] = stats.mean;
        e["elmmse_se"] = stats.se;
        e["rate"] = rate;
        e["iterations"] = iterations;
        out.results.push_back(std::move(e));
    };

    Stopwatch w1;
    const DdpEnsemble ddp = run_ddp_ensemble(cfg, cell);
    push("ddp", ddp.stats, ddp.avg_rate, ddp.mean_rounds, w1.ms());

    Stopwatch w2;
    const IsacSolution dip = dip_isac_sgp_ao(
        cell.scene, cell.comm, cfg.penalty, cfg.schedule, cfg.batch_size,
        mix(c.seed, kSaltSolver, static_cast<std::uint64_t>(c.frame_len)),
        cell.batch);
    push("dip", elmmse_mc_stats(dip.w, cell.scene, cell.batch),
         dip.achieved_rate, static_cast<int>(dip.trace.size()) - 1, w2.ms());

    std::vector<double> diffs;
    for (std::size_t n = 0; n < cell.batch.realizations.size(); ++n) {
        const double dip_cost = lmmse_cost_given_s(
            dip.w, cell.batch.realizations[n], cell.scene);
        diffs.push_back(dip_cost - ddp.per_realization[n]);
    }
    push("ddp-dip-gap", mean_se(diffs), 0.0, 0, 0.0);
    return out;
}

Plan build_plan(const ExperimentConfig& cfg) {
    Plan plan;
    if (cfg.experiment == "cov-error") {
        plan.columns = {"seed", "scheme", "L", "err_db", "err_db_se"};
        plan.cells = grid_cells(cfg, false);
        plan.fn = run_cov_error;
        plan.plots = {plot_spec("cov_error.svg", "sample covariance error",
                                "L", "err_db", true)};
    } else if (cfg.experiment == "asymptotic-L") {
        plan.columns = {"seed",      "scheme", "L",      "elmmse",
                        "elmmse_se", "lmmse",  "gap_rel"};
        plan.cells = grid_cells(cfg, false);
        plan.fn = run_asymptotic_l;
        plan.plots = {plot_spec("jensen_gap.svg",
                                "ergodic vs deterministic cost gap", "L",
                                "gap_rel", true, true)};
    } else if (cfg.experiment == "convergence") {
        plan.columns = {"seed",   "scheme",    "L",
                        "snr_db", "elmmse",    "elmmse_se",
                        "iterations", "iters_to_1pct"};
        plan.cells = grid_cells(cfg, false);
        plan.fn = run_convergence;
        plan.plots = {plot_spec("iterations.svg", "iterations to 1% band",
                                "seed", "iters_to_1pct")};
    } else if (cfg.experiment == "sensing-sweep") {
        plan.columns = {"seed", "scheme", "snr_db",
                        "L",    "elmmse", "elmmse_se"};
        plan.cells = grid_cells(cfg, false);
        plan.fn = run_sensing_sweep;
        plan.plots = {plot_spec("sensing_sweep.svg",
                                "estimation error vs SNR", "snr_db", "elmmse",
                                false, false, true)};
    } else if (cfg.experiment == "hsnr-check") {
        plan.columns = {"seed",   "scheme",    "snr_db", "L",
                        "elmmse", "elmmse_se", "hsnr",   "rel_err"};
        plan.cells = grid_cells(cfg, false);
        plan.fn = run_hsnr_check;
        plan.plots = {plot_spec("hsnr_fit.svg",
                                "high-SNR surrogate relative error", "snr_db",
                                "rel_err", false, true)};
    } else if (cfg.experiment == "isac-tradeoff") {
        plan.columns = {"seed",    "scheme",  "snr_db",    "L",
                        "r0_frac", "r0_bits", "capacity",  "elmmse",
                        "elmmse_se", "rate"};
        plan.cells = grid_cells(cfg, true);
        plan.fn = run_isac_tradeoff;
        plan.plots = {plot_spec("tradeoff.svg",
                                "estimation error vs rate floor", "r0_bits",
                                "elmmse")};
    } else {
        plan.columns = {"seed",    "scheme", "L",         "snr_db",
                        "r0_frac", "elmmse", "elmmse_se", "rate"};
        plan.cells = grid_cells(cfg, false);
        plan.fn = run_isac_framelen;
        plan.plots = {plot_spec("framelen.svg",
                                "estimation error vs frame length", "L",
                                "elmmse", true, true)};
    }
    return plan;
}

ojson config_json(const ExperimentConfig& cfg) {
    ojson j;
    j["experiment"] = cfg.experiment;
    j["algorithm"] = cfg.algorithm;
    j["n_t"] = cfg.n_t;
    j["n_r"] = cfg.n_r;
    j["n_u"] = cfg.n_u;
    j["frame_len_grid"] = cfg.frame_len_grid;
    j["snr_grid"] = cfg.snr_grid;
    j["sigma_s_dbm"] = cfg.sigma_s_dbm;
    j["sigma_c_dbm"] = cfg.sigma_c_dbm;
    j["n_realizations"] = cfg.n_realizations;
    j["seeds"] = cfg.seeds;
    j["batch_size"] = cfg.batch_size;
    j["schedule_a"] = cfg.schedule.a;
    j["schedule_b"] = cfg.schedule.b;
    j["beta1"] = cfg.betas.beta1;
    j["beta2"] = cfg.betas.beta2;
    j["eps0"] = cfg.betas.eps0;
    j["rho0"] = cfg.penalty.rho0;
    j["growth"] = cfg.penalty.growth;
    j["xi0"] = cfg.penalty.xi0;
    j["tau0"] = cfg.penalty.tau0;
    j["t_max"] = cfg.penalty.t_max;
    j["stop_eps"] = cfg.sgd_stop.eps;
    j["r_max"] = cfg.sgd_stop.r_max;
    j["tau"] = cfg.sca_stop.tau;
    j["j_max"] = cfg.sca_stop.j_max;
    j["r0_grid"] = cfg.r0_grid;
    j["out_dir"] = cfg.out_dir;
    return j;
}

void check_finite(const ojson& node, const std::string& path) {
    if (node.is_number_float() && !std::isfinite(node.get<double>()))
        throw ConfigError("record: non-finite value at " + path);
    if (node.is_object())
        for (const auto& item : node.items())
            check_finite(item.value(), path + "/" + item.key());
    if (node.is_array()) {
        std::size_t i = 0;
        for (const ojson& e : node)
            check_finite(e, path + "/" + std::to_string(i++));
    }
}

ojson load_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("record: cannot open " + path);
    ojson doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("record: invalid JSON in " + path + ": " +
                          e.what());
    }
    return doc;
}

// Mean validation trace across seeds, truncated to the shortest, so the
// convergence experiment gets a plot with one series per scheme.
std::vector<std::string> trace_plot(const ojson& record,
                                    const std::string& out_dir) {
    std::map<std::string, std::vector<std::vector<double>>> by_scheme;
    for (const ojson& t : record.at("traces"))
        by_scheme[t.at("scheme").get<std::string>()].push_back(
            t.at("objective").get<std::vector<double>>());
    std::vector<detail::PlotSeries> series;
    for (const auto& [scheme, traces] : by_scheme) {
        std::size_t len = traces.front().size();
        for (const auto& tr : traces) len = std::min(len, tr.size());
        detail::PlotSeries s;
        s.label = scheme;
        for (std::size_t i = 0; i < len; ++i) {
            std::vector<double> col;
            for (const auto& tr : traces) col.push_back(tr[i]);
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(pairwise_sum(col) / static_cast<double>(col.size()));
        }
        series.push_back(std::move(s));
    }
    if (series.empty()) return {};
    const std::string path =
        (fs::path(out_dir) / "convergence_trace.svg").string();
    detail::render_svg(path, "held-out objective per iteration", "iteration",
                       "objective", series, false, false);
    return {path};
}

}  // namespace

int thread_count() {
    if (const char* env = std::getenv("ISAC_PRECODE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

RunOutcome run(const ExperimentConfig& cfg, std::uint64_t seed_offset) {
    ExperimentConfig c = cfg;
    for (std::uint64_t& s : c.seeds) s += seed_offset;
    const Plan plan = build_plan(c);
    fs::create_directories(c.out_dir);

    std::vector<CellOutput> outputs(plan.cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.cells.size()) return;
            const Cell& cell = plan.cells[i];
            try {
                outputs[i] = plan.fn(c, cell);
            } catch (const std::exception& e) {
                CellOutput out;
                ojson err;
                err["seed"] = cell.seed;
                err["cell"] = cell_json(cell);
                err["message"] = e.what();
                out.errors.push_back(std::move(err));
                outputs[i] = std::move(out);
            }
        }
    };
    const int workers = std::min<int>(thread_count(),
                                      static_cast<int>(plan.cells.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    RunOutcome outcome;
    std::vector<std::vector<std::string>> rows;
    ojson record;
    record["schema_version"] = 1;
    record["experiment"] = c.experiment;
    record["config"] = config_json(c);
    record["results"] = ojson::array();
    record["traces"] = ojson::array();
    record["errors"] = ojson::array();
    for (const CellOutput& out : outputs) {
        for (const auto& row : out.rows) rows.push_back(row);
        for (const ojson& e : out.results) record["results"].push_back(e);
        for (const ojson& e : out.traces) record["traces"].push_back(e);
        for (const ojson& e : out.errors) record["errors"].push_back(e);
        if (out.errors.empty())
            ++outcome.cells_ok;
        else
            ++outcome.cells_failed;
    }

    outcome.csv_path = (fs::path(c.out_dir) / "results.csv").string();
    detail::write_csv(outcome.csv_path, plan.columns, rows);

    if (!rows.empty()) {
        for (const ojson& spec : plan.plots) {
            const std::string spec_path =
                (fs::path(c.out_dir) /
                 ("plot_" + spec.at("out").get<std::string>() + ".json"))
                    .string();
            std::ofstream(spec_path) << spec.dump(1) << '\n';
            outcome.svg_paths.push_back(
                emit_plot(outcome.csv_path, spec_path));
        }
        if (c.experiment == "convergence")
            for (const std::string& p : trace_plot(record, c.out_dir))
                outcome.svg_paths.push_back(p);
    }

    ojson artifacts;
    artifacts["results_csv"] = outcome.csv_path;
    artifacts["plots"] = outcome.svg_paths;
    record["artifacts"] = std::move(artifacts);
    check_finite(record, "");

    outcome.record_path = (fs::path(c.out_dir) / "record.json").string();
    std::ofstream rec(outcome.record_path, std::ios::binary);
    if (!rec) throw ConfigError("record: cannot write " + outcome.record_path);
    rec << record.dump(1) << '\n';
    return outcome;
}

std::string compare_traces(const std::string& record_path_a,
                           const std::string& record_path_b) {
    const ojson a = load_record(record_path_a);
    const ojson b = load_record(record_path_b);
    for (const ojson* r : {&a, &b})
        if (r->value("experiment", std::string()) != "convergence")
            throw ConfigError(
                "compare: records must come from the convergence experiment");
    ojson ca = a.at("config");
    ojson cb = b.at("config");
    const std::string algo_a = ca.value("algorithm", std::string());
    const std::string algo_b = cb.value("algorithm", std::string());
    for (ojson* j : {&ca, &cb}) {
        j->erase("algorithm");
        j->erase("batch_size");
        j->erase("out_dir");
    }
    if (ca != cb) {
        for (const auto& item : ca.items())
            if (!cb.contains(item.key()) || cb.at(item.key()) != item.value())
                throw ConfigError("compare: config mismatch at " + item.key());
        throw ConfigError("compare: config mismatch");
    }

    auto key_of = [](const ojson& e) {
        return e.at("cell").dump() + "#" + std::to_string(
            e.at("seed").get<std::uint64_t>());
    };
    std::map<std::string, const ojson*> rows_b;
    for (const ojson& e : b.at("results")) rows_b[key_of(e)] = &e;

    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %14s %14s %14s %14s\n", "seed",
                  (algo_a + " iters").c_str(), (algo_a + " final").c_str(),
                  (algo_b + " iters").c_str(), (algo_b + " final").c_str());
    out << line;
    double sum_ia = 0, sum_ib = 0, sum_fa = 0, sum_fb = 0;
    int n = 0;
    for (const ojson& ea : a.at("results")) {
        const auto it = rows_b.find(key_of(ea));
        if (it == rows_b.end())
            throw ConfigError("compare: missing matching cell in " +
                              record_path_b);
        const ojson& eb = *it->second;
        const double ia = ea.at("iters_to_1pct").get<double>();
        const double ib = eb.at("iters_to_1pct").get<double>();
        const double fa = ea.at("elmmse").get<double>();
        const double fb = eb.at("elmmse").get<double>();
        std::snprintf(line, sizeof(line), "%-8llu %14.0f %14.6g %14.0f %14.6g\n",
                      static_cast<unsigned long long>(
                          ea.at("seed").get<std::uint64_t>()),
                      ia, fa, ib, fb);
        out << line;
        sum_ia += ia;
        sum_ib += ib;
        sum_fa += fa;
        sum_fb += fb;
        ++n;
    }
    if (n == 0) throw ConfigError("compare: no results to compare");
    std::snprintf(line, sizeof(line), "%-8s %14.2f %14.6g %14.2f %14.6g\n",
                  "mean", sum_ia / n, sum_fa / n, sum_ib / n, sum_fb / n);
    out << line;
    return out.str();
}

}  // namespace isac::bench
