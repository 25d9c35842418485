#include "ngmkl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ngmkl {

namespace {

constexpr double kErrorClamp = 1e-10;

std::vector<int> dedup_first_occurrence(const std::vector<int>& selected) {
    std::vector<int> dedup;
    for (int k : selected)
        if (std::find(dedup.begin(), dedup.end(), k) == dedup.end()) dedup.push_back(k);
    return dedup;
}

}  // namespace

BoostState BoostState::uniform(std::size_t n) {
    detail::require(n >= 1, "boost state: empty sample set");
    return {std::vector<double>(n, 1.0 / static_cast<double>(n)), 0};
}

SelectionResult select_all(std::size_t bank_size) {
    detail::require(bank_size >= 1, "select_all: empty bank");
    SelectionResult result;
    result.variant = SelectionVariant::all;
    result.selected.resize(bank_size);
    std::iota(result.selected.begin(), result.selected.end(), 0);
    result.dedup_selected = result.selected;
    return result;
}

SelectionResult select_l1(const std::vector<GramMatrix>& grams,
                          const std::vector<double>& labels,
                          const MklOptions& options, double threshold) {
    detail::require(threshold > 0.0, "select_l1: threshold must be positive");
    const MklSolution solution = mkl_train(grams, labels, options);

    std::vector<int> order(solution.beta.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return solution.beta[static_cast<std::size_t>(a)] >
               solution.beta[static_cast<std::size_t>(b)];
    });

    SelectionResult result;
    result.variant = SelectionVariant::l1_sparse;
    result.beta = solution.beta;
    for (int j : order)
        if (solution.beta[static_cast<std::size_t>(j)] > threshold)
            result.selected.push_back(j);
    if (result.selected.empty()) result.selected.push_back(order.front());
    result.dedup_selected = result.selected;
    return result;
}

namespace {

// n draws from the boosting distribution by inverse-CDF sampling, sorted.
// Retries a few times if the draw collapses to a single class.
std::vector<std::size_t> bootstrap_sample(const std::vector<double>& weights,
                                          const std::vector<double>& labels,
                                          SplitMix64& rng) {
    const std::size_t n = weights.size();
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += weights[i];
        cdf[i] = acc;
    }

    for (int attempt = 0; attempt < 16; ++attempt) {
        std::vector<std::size_t> sample(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double u = rng.uniform() * acc;
            sample[k] = static_cast<std::size_t>(
                std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            if (sample[k] >= n) sample[k] = n - 1;
        }
        std::sort(sample.begin(), sample.end());
        bool pos = false, neg = false;
        for (std::size_t idx : sample) (labels[idx] > 0 ? pos : neg) = true;
        if (pos && neg) return sample;
    }
    throw std::runtime_error("boost_round: sampling distribution is single-class");
}

}  // namespace

BoostRound boost_round(const std::vector<GramMatrix>& grams,
                       const std::vector<double>& labels, const BoostState& state,
                       double c_reg, const SvmOptions& svm_options, SplitMix64* rng) {
    detail::require(!grams.empty(), "boost_round: empty kernel list");
    detail::require(state.sample_weights.size() == labels.size(),
                    "boost_round: weight length mismatch");

    const std::size_t n = labels.size();
    SplitMix64 fallback(kBoostSamplingSeed + state.round);
    const auto sample =
        bootstrap_sample(state.sample_weights, labels, rng ? *rng : fallback);

    std::vector<double> sample_labels(n);
    for (std::size_t k = 0; k < n; ++k) sample_labels[k] = labels[sample[k]];

    BoostRound best;
    bool have_best = false;
    Matrix sub(n, n);
    for (std::size_t j = 0; j < grams.size(); ++j) {
        const Matrix& g = grams[j].values;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) sub(a, b) = g(sample[a], sample[b]);

        SvmProblem problem(sub, sample_labels, c_reg);
        SvmModel model = smo_train(problem, svm_options);

        // Score on the full training set: kernel row i against the sampled anchors.
        std::vector<double> predictions(n);
        double weighted_error = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double f = model.bias;
            for (std::size_t sv : model.support_indices)
                f += model.alpha[sv] * model.train_labels[sv] * g(i, sample[sv]);
            predictions[i] = f >= 0.0 ? 1.0 : -1.0;
            if (predictions[i] != labels[i]) weighted_error += state.sample_weights[i];
        }

        if (!have_best || weighted_error < best.weighted_error) {
            have_best = true;
            best.kernel = static_cast<int>(j);
            best.model = std::move(model);
            best.predictions = std::move(predictions);
            best.weighted_error = weighted_error;
        }
    }

    best.sample_indices = sample;
    const double eps =
        std::clamp(best.weighted_error, kErrorClamp, 0.5 - kErrorClamp);
    best.learner_weight = 0.5 * std::log((1.0 - eps) / eps);
    return best;
}

BoostState boost_update(BoostState state, const std::vector<double>& predictions,
                        const std::vector<double>& labels, double learner_weight) {
    detail::require(predictions.size() == labels.size(),
                    "boost_update: prediction length mismatch");
    detail::require(state.sample_weights.size() == labels.size(),
                    "boost_update: weight length mismatch");

    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        state.sample_weights[i] *= std::exp(-learner_weight * labels[i] * predictions[i]);
        sum += state.sample_weights[i];
    }
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw std::runtime_error("boost_update: degenerate weight distribution");
    for (double& w : state.sample_weights) w /= sum;
    state.round += 1;
    return state;
}

SelectionResult select_mkboost_d1(const std::vector<GramMatrix>& grams,
                                  const std::vector<double>& labels,
                                  std::size_t rounds, double c_reg,
                                  const SvmOptions& svm_options,
                                  std::uint64_t sampling_seed) {
    detail::require(rounds >= 1, "select_mkboost_d1: rounds must be >= 1");

    SelectionResult result;
    result.variant = SelectionVariant::boost_d1;

    SplitMix64 rng(sampling_seed);
    BoostState state = BoostState::uniform(labels.size());
    for (std::size_t r = 0; r < rounds; ++r) {
        BoostRound round = boost_round(grams, labels, state, c_reg, svm_options, &rng);
        result.selected.push_back(round.kernel);
        result.rounds.push_back(
            {r, round.kernel, round.weighted_error, round.learner_weight});
        state = boost_update(std::move(state), round.predictions, labels,
                             round.learner_weight);
    }

    result.dedup_selected = dedup_first_occurrence(result.selected);
    return result;
}

std::string selection_diagnostics_csv(const SelectionResult& result) {
    std::ostringstream out;
    if (result.variant == SelectionVariant::boost_d1) {
        out << "round,kernel,weighted_error,learner_weight\n";
        for (const auto& r : result.rounds) {
            char line[128];
            std::snprintf(line, sizeof(line), "%zu,%d,%.12g,%.12g\n", r.round, r.kernel,
                          r.weighted_error, r.learner_weight);
            out << line;
        }
    } else {
        out << "kernel,beta\n";
        if (!result.beta.empty()) {
            for (std::size_t j = 0; j < result.beta.size(); ++j) {
                char line[64];
                std::snprintf(line, sizeof(line), "%zu,%.12g\n", j, result.beta[j]);
                out << line;
            }
        } else {
            for (int j : result.selected) out << j << ",1\n";
        }
    }
    return out.str();
}

}  // namespace ngmkl
