#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ngmkl/mkl.hpp"
#include "ngmkl/svm.hpp"

namespace ngmkl {

enum class SelectionVariant { all, l1_sparse, boost_d1 };

/// Which bank kernels feed the network. `selected` keeps duplicates for the
/// boosting variant (selection is with replacement); `dedup_selected` keeps
/// first occurrences and is what downstream training consumes.
struct SelectionResult {
    SelectionVariant variant = SelectionVariant::all;
    std::vector<int> selected;
    std::vector<int> dedup_selected;
    std::vector<double> beta;             // l1_sparse diagnostics
    struct Round {
        std::size_t round;
        int kernel;
        double weighted_error;
        double learner_weight;
    };
    std::vector<Round> rounds;            // boost_d1 diagnostics
};

/// Boosting sample distribution: nonnegative, sums to 1.
struct BoostState {
    std::vector<double> sample_weights;
    std::size_t round = 0;

    static BoostState uniform(std::size_t n);
};

SelectionResult select_all(std::size_t bank_size);

/// Kernels whose trained MKL weight exceeds `threshold`, ordered by
/// descending beta (ties by index). Falls back to the single largest-beta
/// kernel if none pass.
SelectionResult select_l1(const std::vector<GramMatrix>& grams,
                          const std::vector<double>& labels,
                          const MklOptions& options, double threshold = 1e-3);

struct BoostRound {
    int kernel = 0;
    SvmModel model;                           // trained on the bootstrap sample
    std::vector<std::size_t> sample_indices;  // anchor rows of `model`, sorted
    std::vector<double> predictions;          // +-1 over the full training set
    double weighted_error = 0.0;
    double learner_weight = 0.0;
};

inline constexpr std::uint64_t kBoostSamplingSeed = 0x626f6f7374ULL;

/// One boosting trial: draws a bootstrap sample from the current
/// distribution, trains one SVM per kernel on the sample, and scores each by
/// its weighted 0/1 error over the full training set (ties to the lowest
/// index). Training on the sample rather than weighting the boxes keeps
/// interpolating kernels from reaching zero error for free: they still
/// misclassify the out-of-sample points. learner_weight = 1/2 ln((1-e)/e)
/// with e clamped to [1e-10, 0.5-1e-10].
BoostRound boost_round(const std::vector<GramMatrix>& grams,
                       const std::vector<double>& labels, const BoostState& state,
                       double c_reg, const SvmOptions& svm_options = {},
                       SplitMix64* rng = nullptr);

/// AdaBoost reweighting: w_i *= exp(-a y_i h_i), renormalized.
BoostState boost_update(BoostState state, const std::vector<double>& predictions,
                        const std::vector<double>& labels, double learner_weight);

/// MKBoost-D1 selection with replacement from uniform weights. The bootstrap
/// stream is seeded by `sampling_seed`, so the result is a pure function of
/// (data, config).
SelectionResult select_mkboost_d1(const std::vector<GramMatrix>& grams,
                                  const std::vector<double>& labels,
                                  std::size_t rounds, double c_reg,
                                  const SvmOptions& svm_options = {},
                                  std::uint64_t sampling_seed = kBoostSamplingSeed);

/// CSV diagnostics: `round,kernel,weighted_error,learner_weight` for boosting
/// or `kernel,beta` for the sparse variant.
std::string selection_diagnostics_csv(const SelectionResult& result);

}  // namespace ngmkl
