#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ngmkl/dataset.hpp"
#include "ngmkl/network.hpp"
#include "ngmkl/selection.hpp"

namespace ngmkl {

enum class Method { mkl_baseline, ngmkl1, ngmkl2, ngmkl3 };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct BenchConfig {
    std::vector<DatasetEntry> datasets;
    std::vector<Method> methods = {Method::mkl_baseline, Method::ngmkl1,
                                   Method::ngmkl2, Method::ngmkl3};
    TrainConfig train;
    double c_reg = 1.0;
    double l1_threshold = 1e-3;
    std::size_t boost_rounds = 20;
    std::optional<std::size_t> repetitions;  // overrides manifest values
    std::optional<std::uint64_t> base_seed;  // overrides manifest values
    std::size_t workers = 0;                 // 0 = hardware concurrency
    std::string curves_dir;                  // per-cell training curves (optional)
    std::string diagnostics_dir;             // per-cell selection diagnostics (optional)
};

/// Trailing artifacts of one (train, test) evaluation.
struct MethodRun {
    double error_percent = 0.0;
    std::vector<EpochStats> curve;       // network methods
    SelectionResult selection;           // ngmkl2/3
};

/// Full pipeline on one split: scale from the training rows, build the bank,
/// select kernels per variant (training split only), train, score the test
/// split as 100 * (1 - accuracy). `seed` drives network initialization and
/// batch order.
MethodRun run_method(Method method, const Dataset& train, const Dataset& test,
                     const BenchConfig& config, std::uint64_t seed);

struct CellResult {
    std::string dataset;
    Method method = Method::mkl_baseline;
    std::vector<double> rep_errors;  // percent, one per repetition
    double mean_error = 0.0;
    double std_error = 0.0;          // population std over repetitions
    double wall_seconds = 0.0;
    std::string failure;             // nonempty = cell failed with this reason
};

struct ExperimentReport {
    std::vector<CellResult> cells;

    bool all_failed() const;
};

/// Every dataset x method x repetition, cells in manifest x method order.
/// Cells run on a worker pool but results are deterministic regardless of
/// schedule; failures are recorded per cell rather than aborting the sweep.
ExperimentReport run_experiment(const BenchConfig& config);

/// CSV: dataset,method,mean_error,std_error,repetitions,rep_errors...
/// (no wall time, so reruns are byte-identical).
std::string render_report_csv(const ExperimentReport& report);

/// Markdown grid of mean+-std cells to two decimals (ties at the third
/// decimal round half-even).
std::string render_report_markdown(const ExperimentReport& report);

/// Two-decimal fixed formatting with decimal round-half-even at ties.
std::string format_percent(double value);

/// JSON experiment config; see README for the schema.
BenchConfig load_config(const std::string& path);

}  // namespace ngmkl
