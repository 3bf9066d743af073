// Benchmark harness: experiment configs, the grid runner with its worker
// pool, CSV/JSON/SVG writers and the trace comparison tool. This is the
// only layer that deals in dBm; everything below it takes linear units.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/isac.hpp"

namespace isac::bench {

// Raised for malformed configs, plot specs or record files; the message
// names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One flat JSON document. Scalar keys frame_len / snr_db / r0_fraction are
// accepted as single-point grids; unknown keys are rejected.
struct ExperimentConfig {
    std::string experiment;
    std::string algorithm = "mb-sgp";  // convergence experiment only
    int n_t = 8;
    int n_r = 8;
    int n_u = 4;
    std::vector<int> frame_len_grid;   // per-experiment default when empty
    std::vector<double> snr_grid;
    double sigma_s_dbm = 0.0;
    double sigma_c_dbm = 0.0;
    int n_realizations = 100;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int batch_size = 10;
    StepSchedule schedule;
    MomentParams betas;
    PenaltyConfig penalty;
    StopRule sgd_stop;
    ScaStop sca_stop;
    std::vector<double> r0_grid;       // fractions of the channel capacity
    std::string out_dir = "out";

    double sigma_s2() const;           // linear (mW), from sigma_s_dbm
    double sigma_c2() const;
    double power(double snr_db) const; // sigma_s2 * 10^(snr_db / 10)
};

// Experiment names understood by run().
const std::vector<std::string>& experiment_names();

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Table-scale overrides: 32 antennas both sides, and the full frame grid
// when the desk default was in effect.
void apply_full_scale(ExperimentConfig& cfg);

struct RunOutcome {
    std::string csv_path;
    std::string record_path;
    std::vector<std::string> svg_paths;
    int cells_ok = 0;
    int cells_failed = 0;  // infeasible or otherwise erroring grid cells
};

// Executes the experiment grid over a worker pool (ISAC_PRECODE_THREADS,
// default the hardware count), writes results.csv, record.json and the
// experiment's plots into cfg.out_dir. Per-cell failures are recorded in
// the record and do not abort the run. seed_offset shifts every seed.
RunOutcome run(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);

// Compares two convergence-experiment records whose configs agree except
// for the algorithm: per seed, iterations until the trace stays within 1%
// of its final objective, the final objective, and means over seeds.
std::string compare_traces(const std::string& record_path_a,
                           const std::string& record_path_b);

// Renders one SVG from a results.csv per a plot-spec JSON file with keys
// x, y (column names), series (grouping column, optional), x_log, y_log,
// y_db, title, out. Missing columns raise ConfigError naming the column.
std::string emit_plot(const std::string& csv_path,
                      const std::string& spec_path);

// Validates a record.json against the shipped JSON schema (the subset of
// keywords the schema uses); throws ConfigError with a JSON path on the
// first violation.
void validate_record_file(const std::string& record_path,
                          const std::string& schema_path);

int thread_count();

namespace detail {

// Shortest round-trip decimal form, locale independent.
std::string format_number(double x);

void write_csv(const std::string& path, const std::vector<std::string>& cols,
               const std::vector<std::vector<std::string>>& rows);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Deterministic line plot (no timestamps, fixed palette). Axes may be
// log10-scaled; labels are printed as given.
void render_svg(const std::string& path, const std::string& title,
                const std::string& xlabel, const std::string& ylabel,
                const std::vector<PlotSeries>& series, bool x_log,
                bool y_log);

}  // namespace detail

}  // namespace isac::bench
