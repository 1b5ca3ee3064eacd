#pragma once

#include "entspan/entanglement.hpp"
#include "entspan/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace entspan {

enum class Solver { Auto, Exact, FreeFermion };

Solver solver_from_string(const std::string& s);
std::string solver_name(Solver s);

struct PairSolution {
    TwoSpinState rho;
    double gap = 0.0;
    std::string solver_used;
};

/// Ground-state reduced density matrix of the probe pair plus the first
/// excitation energy.  Auto routes quadratic end-to-end chains to the
/// free-fermion solver and everything else to dense diagonalization.
PairSolution solve_probe_pair(const ChainModel& model, ProbePair probes,
                              Solver solver = Solver::Auto);

struct Histogram {
    double lo = 0.0;
    double width = 0.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    double mean = 0.0;
    double max = 0.0;

    static Histogram collect(const std::vector<double>& values, double lo, double hi,
                             double width);
    nlohmann::json to_json() const;
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares on (log x, log y); throws on nonpositive data or fewer than
/// three points.
LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

/// One CSV table: fixed column order, rows of doubles, printed with %.17g so
/// identical runs are byte-identical.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunRecord {
    nlohmann::json config;              // echo of the resolved configuration
    nlohmann::json outputs;             // experiment metrics (expect-block domain)
    std::map<std::string, CsvTable> tables;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string version;
    std::string rng_algorithm;

    nlohmann::json to_json() const;     // everything except the tables
};

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json params;              // experiment-specific block
    std::uint64_t seed = 12345;
    int samples = -1;                   // -1: experiment default
    Solver solver = Solver::Auto;
    std::string out_dir = ".";
    int threads = 0;                    // 0: hardware concurrency
    nlohmann::json expect;              // optional list of assertions

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

/// Dispatches to the named experiment, fills outputs and tables, stamps
/// version/rng/wall time.  Throws on config errors; solver errors inside
/// Monte Carlo sampling are excluded per sample (hard failure above 1%).
RunRecord run(const ExperimentConfig& config);

/// Writes <out_dir>/<experiment>_<table>.csv for every table.
void emit_csv(const RunRecord& record, const std::string& out_dir);
/// Writes the record JSON (config, outputs, metadata) to `path`.
void emit_json(const RunRecord& record, const std::string& path);

/// Evaluates the config's expect block against record.outputs.
/// Entries: {"metric": dotted.path, "value": v, "tol": t} or
/// {"metric": ..., "min": a, "max": b}.  Returns human-readable failures.
std::vector<std::string> check_expectations(const RunRecord& record,
                                            const nlohmann::json& expect);

struct McConfig {
    int samples = 1;
    std::uint64_t seed = 0;
    int threads = 0;
    Solver solver = Solver::Auto;
    double bin_width = 0.002; // concurrence histogram binning
};

struct McOutcome {
    Histogram histogram;                 // concurrence, bins over [0, 1]
    std::vector<double> concurrences;    // per included sample
    std::vector<double> gaps;
    std::vector<std::uint64_t> included; // sample indices, ascending
    std::uint64_t excluded = 0;
    std::vector<std::string> exclusion_reasons; // first few, for the record
};

/// Disorder Monte Carlo over per-sample models built from independent
/// (seed, sample) Philox streams; deterministic for any worker count.
/// Fails when more than 1% of samples are excluded by solver errors.
McOutcome mc_disorder(const McConfig& config,
                      const std::function<ChainModel(std::uint64_t, RngStream&)>& builder,
                      ProbePair probes);

/// Bounded worker pool over [0, count); items own disjoint output slots.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

} // namespace entspan
