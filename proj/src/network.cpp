#include "ngmkl/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace ngmkl {

double scaled_tanh(double x) { return kScaledTanhGain * std::tanh(kScaledTanhSlope * x); }

double scaled_tanh_prime(double x) {
    const double t = std::tanh(kScaledTanhSlope * x);
    return kScaledTanhGain * kScaledTanhSlope * (1.0 - t * t);
}

double activate(Activation a, double x) {
    return a == Activation::scaled_tanh ? scaled_tanh(x) : x;
}

double activate_prime(Activation a, double x) {
    return a == Activation::scaled_tanh ? scaled_tanh_prime(x) : 1.0;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - peak);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double cross_entropy(std::span<const double> logits, std::size_t target) {
    detail::require(target < logits.size(), "cross_entropy: target out of range");
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - peak);
    return -(logits[target] - peak) + std::log(sum);
}

namespace {

std::vector<double> mat_vec(const Matrix& w, const std::vector<double>& x) {
    std::vector<double> out(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) out[r] = dot(w.row(r), x);
    return out;
}

std::size_t argmax_lowest(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

std::pair<std::vector<double>, ForwardCache> forward(const KernelNetwork& model,
                                                     const Matrix& kernel_rows) {
    const std::size_t s = model.kernel_count();
    detail::require(kernel_rows.rows() == s && kernel_rows.cols() == model.anchor_count(),
                    "forward: kernel_rows shape mismatch");

    ForwardCache cache;
    cache.kernel_rows = kernel_rows;
    cache.z1_pre.resize(s);
    cache.z1.resize(s);
    for (std::size_t j = 0; j < s; ++j) {
        cache.z1_pre[j] = dot(model.gammas.row(j), kernel_rows.row(j));
        cache.z1[j] = activate(model.kernel_activation, cache.z1_pre[j]);
    }

    std::vector<double> current = cache.z1;
    for (const Matrix& w : model.hidden_layers) {
        std::vector<double> pre = mat_vec(w, current);
        std::vector<double> post(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i)
            post[i] = activate(model.hidden_activation, pre[i]);
        cache.hidden_pre.push_back(std::move(pre));
        cache.hidden.push_back(post);
        current = std::move(post);
    }

    cache.logits = mat_vec(model.output_weights, current);
    return {cache.logits, std::move(cache)};
}

Gradients backward(const KernelNetwork& model, const ForwardCache& cache,
                   std::size_t target) {
    const std::size_t s = model.kernel_count();
    const std::size_t c = model.class_count();
    detail::require(target < c, "backward: target out of range");
    detail::require(cache.z1.size() == s && cache.hidden.size() == model.hidden_layers.size(),
                    "backward: cache does not match model");

    Gradients grads;
    grads.gammas = Matrix(model.gammas.rows(), model.gammas.cols());
    grads.hidden_layers.reserve(model.hidden_layers.size());
    for (const Matrix& w : model.hidden_layers)
        grads.hidden_layers.emplace_back(w.rows(), w.cols());
    grads.output_weights = Matrix(c, model.output_weights.cols());

    // softmax-with-cross-entropy: dJ/dlogits = p - onehot(target)
    std::vector<double> delta = softmax(cache.logits);
    delta[target] -= 1.0;

    const std::vector<double>& last =
        cache.hidden.empty() ? cache.z1 : cache.hidden.back();
    for (std::size_t r = 0; r < c; ++r)
        for (std::size_t t = 0; t < last.size(); ++t)
            grads.output_weights(r, t) = delta[r] * last[t];

    // Pull delta back to the layer input below the output.
    std::vector<double> down(model.output_weights.cols(), 0.0);
    for (std::size_t t = 0; t < down.size(); ++t)
        for (std::size_t r = 0; r < c; ++r)
            down[t] += model.output_weights(r, t) * delta[r];
    delta = std::move(down);

    for (std::size_t layer = model.hidden_layers.size(); layer-- > 0;) {
        const Matrix& w = model.hidden_layers[layer];
        const std::vector<double>& pre = cache.hidden_pre[layer];
        const std::vector<double>& input =
            layer == 0 ? cache.z1 : cache.hidden[layer - 1];

        std::vector<double> dpre(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i)
            dpre[i] = delta[i] * activate_prime(model.hidden_activation, pre[i]);

        Matrix& gw = grads.hidden_layers[layer];
        for (std::size_t r = 0; r < w.rows(); ++r)
            for (std::size_t t = 0; t < w.cols(); ++t)
                gw(r, t) = dpre[r] * input[t];

        std::vector<double> next(w.cols(), 0.0);
        for (std::size_t t = 0; t < w.cols(); ++t)
            for (std::size_t r = 0; r < w.rows(); ++r)
                next[t] += w(r, t) * dpre[r];
        delta = std::move(next);
    }

    for (std::size_t j = 0; j < s; ++j) {
        const double dz1_pre =
            delta[j] * activate_prime(model.kernel_activation, cache.z1_pre[j]);
        const auto row = cache.kernel_rows.row(j);
        for (std::size_t a = 0; a < row.size(); ++a)
            grads.gammas(j, a) = dz1_pre * row[a];
    }
    return grads;
}

namespace {

void decay_update(Matrix& w, const Matrix& g, double lr, double wd) {
    double* wp = w.data();
    const double* gp = g.data();
    for (std::size_t k = 0; k < w.rows() * w.cols(); ++k)
        wp[k] -= lr * (gp[k] + wd * wp[k]);
}

}  // namespace

void sgd_step(KernelNetwork& model, const Gradients& grads, double lr,
              double weight_decay) {
    decay_update(model.gammas, grads.gammas, lr, weight_decay);
    for (std::size_t l = 0; l < model.hidden_layers.size(); ++l)
        decay_update(model.hidden_layers[l], grads.hidden_layers[l], lr, weight_decay);
    decay_update(model.output_weights, grads.output_weights, lr, weight_decay);
}

namespace {

void fill_uniform(Matrix& w, double bound, SplitMix64& rng) {
    double* p = w.data();
    for (std::size_t k = 0; k < w.rows() * w.cols(); ++k)
        p[k] = rng.uniform(-bound, bound);
}

KernelNetwork init_with_rng(const Dataset& train, const std::vector<KernelSpec>& kernels,
                            const std::vector<int>& kernel_indices,
                            const TrainConfig& config, SplitMix64& rng) {
    detail::require(!kernels.empty(), "network: empty kernel list");
    detail::require(kernel_indices.size() == kernels.size(),
                    "network: kernel index list mismatch");
    detail::require(train.class_count >= 2, "network: need at least two classes");
    detail::require(config.hidden_width >= 1, "network: hidden width must be >= 1");

    const std::size_t s = kernels.size();
    const std::size_t n = train.size();
    const std::size_t n1 = config.hidden_width;
    const std::size_t c = static_cast<std::size_t>(train.class_count);

    KernelNetwork model;
    model.kernels = kernels;
    model.kernel_indices = kernel_indices;
    model.anchors = train.features;
    model.gammas = Matrix(s, n);
    model.hidden_layers = {Matrix(n1, s)};
    model.output_weights = Matrix(c, n1);

    fill_uniform(model.gammas, std::sqrt(3.0 / static_cast<double>(n)), rng);
    fill_uniform(model.hidden_layers[0], std::sqrt(3.0 / static_cast<double>(s)), rng);
    fill_uniform(model.output_weights, std::sqrt(3.0 / static_cast<double>(n1)), rng);
    return model;
}

}  // namespace

KernelNetwork init_network(const Dataset& train, const std::vector<KernelSpec>& kernels,
                           const std::vector<int>& kernel_indices,
                           const TrainConfig& config) {
    SplitMix64 rng(config.seed);
    return init_with_rng(train, kernels, kernel_indices, config, rng);
}

TrainResult train(const Dataset& train_data, const std::vector<KernelSpec>& kernels,
                  const std::vector<int>& kernel_indices, const TrainConfig& config) {
    const std::size_t n = train_data.size();
    detail::require(config.batch_size >= 1 && config.batch_size <= n,
                    "train: batch_size must be in [1, n]");

    bool multiclass = false;
    for (int l : train_data.labels) multiclass |= (l != train_data.labels.front());
    detail::require(multiclass, "train: single-class data");

    SplitMix64 rng(config.seed);
    TrainResult result;
    result.model = init_with_rng(train_data, kernels, kernel_indices, config, rng);
    KernelNetwork& model = result.model;

    const std::size_t s = kernels.size();
    std::vector<Matrix> self_grams;
    self_grams.reserve(s);
    for (const KernelSpec& spec : kernels)
        self_grams.push_back(gram(spec, train_data.features, train_data.features).values);

    Matrix kernel_rows(s, n);
    Gradients sum;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = random_permutation(n, rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, n);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);

            sum.gammas = Matrix(model.gammas.rows(), model.gammas.cols());
            sum.hidden_layers.assign(1, Matrix(model.hidden_layers[0].rows(),
                                               model.hidden_layers[0].cols()));
            sum.output_weights =
                Matrix(model.output_weights.rows(), model.output_weights.cols());

            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t sample = order[b];
                for (std::size_t j = 0; j < s; ++j) {
                    const auto src = self_grams[j].row(sample);
                    std::copy(src.begin(), src.end(), kernel_rows.row(j).begin());
                }
                const std::size_t target =
                    static_cast<std::size_t>(train_data.labels[sample]);

                auto [logits, cache] = forward(model, kernel_rows);
                loss_sum += cross_entropy(logits, target);
                if (argmax_lowest(logits) == target) ++correct;

                Gradients g = backward(model, cache, target);
                double* dst = sum.gammas.data();
                const double* src = g.gammas.data();
                for (std::size_t k = 0; k < s * n; ++k) dst[k] += src[k];
                dst = sum.hidden_layers[0].data();
                src = g.hidden_layers[0].data();
                for (std::size_t k = 0;
                     k < sum.hidden_layers[0].rows() * sum.hidden_layers[0].cols(); ++k)
                    dst[k] += src[k];
                dst = sum.output_weights.data();
                src = g.output_weights.data();
                for (std::size_t k = 0;
                     k < sum.output_weights.rows() * sum.output_weights.cols(); ++k)
                    dst[k] += src[k];
            }

            double* p = sum.gammas.data();
            for (std::size_t k = 0; k < s * n; ++k) p[k] *= inv_batch;
            p = sum.hidden_layers[0].data();
            for (std::size_t k = 0;
                 k < sum.hidden_layers[0].rows() * sum.hidden_layers[0].cols(); ++k)
                p[k] *= inv_batch;
            p = sum.output_weights.data();
            for (std::size_t k = 0;
                 k < sum.output_weights.rows() * sum.output_weights.cols(); ++k)
                p[k] *= inv_batch;

            sgd_step(model, sum, config.learning_rate, config.weight_decay);
        }

        result.curve.push_back({loss_sum / static_cast<double>(n),
                                static_cast<double>(correct) / static_cast<double>(n)});
    }
    return result;
}

namespace {

Matrix kernel_rows_for(const KernelNetwork& model, std::span<const double> x) {
    const std::size_t s = model.kernel_count();
    const std::size_t n = model.anchor_count();
    Matrix rows(s, n);
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t a = 0; a < n; ++a)
            rows(j, a) = kernel_eval(model.kernels[j], x, model.anchors.row(a));
    return rows;
}

}  // namespace

std::vector<int> predict(const KernelNetwork& model, const Matrix& features) {
    detail::require(features.cols() == model.anchors.cols(),
                    "predict: feature dimension mismatch");
    std::vector<int> labels(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto [logits, cache] = forward(model, kernel_rows_for(model, features.row(i)));
        labels[i] = static_cast<int>(argmax_lowest(logits));
    }
    return labels;
}

std::vector<double> binary_decision(const KernelNetwork& model, const Matrix& features) {
    detail::require(model.class_count() == 2, "binary_decision: model is not binary");
    detail::require(features.cols() == model.anchors.cols(),
                    "binary_decision: feature dimension mismatch");
    std::vector<double> decisions(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto [logits, cache] = forward(model, kernel_rows_for(model, features.row(i)));
        decisions[i] = logits[0] - logits[1];
    }
    return decisions;
}

namespace {

constexpr std::uint32_t kModelMagic = 0x4e4d474eu;  // "NGMN" little-endian
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void put_matrix(std::ostream& out, const Matrix& m) {
    put(out, static_cast<std::uint64_t>(m.rows()));
    put(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.rows() * m.cols()));
}

Matrix get_matrix(std::istream& in) {
    std::uint64_t rows = 0, cols = 0;
    get(in, rows);
    get(in, cols);
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    return m;
}

}  // namespace

void save_network(const KernelNetwork& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    put(out, kModelMagic);
    put(out, kModelVersion);
    put(out, static_cast<std::uint64_t>(model.kernel_count()));
    put(out, static_cast<std::uint64_t>(model.anchor_count()));
    put(out, static_cast<std::uint64_t>(model.anchors.cols()));
    put(out, static_cast<std::uint8_t>(model.kernel_activation));
    put(out, static_cast<std::uint8_t>(model.hidden_activation));
    for (std::size_t j = 0; j < model.kernel_count(); ++j) {
        put(out, static_cast<std::uint8_t>(model.kernels[j].kind));
        put(out, static_cast<std::int32_t>(model.kernels[j].degree));
        put(out, model.kernels[j].sigma);
        put(out, static_cast<std::int32_t>(model.kernel_indices[j]));
    }
    put_matrix(out, model.gammas);
    put(out, static_cast<std::uint64_t>(model.hidden_layers.size()));
    for (const Matrix& w : model.hidden_layers) put_matrix(out, w);
    put_matrix(out, model.output_weights);
    if (!out) throw std::runtime_error("short write to model file: " + path);
}

KernelNetwork load_network(const std::string& path, Matrix anchors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::uint32_t magic = 0, version = 0;
    get(in, magic);
    get(in, version);
    if (magic != kModelMagic || version != kModelVersion)
        throw std::runtime_error("bad model file header: " + path);

    std::uint64_t s = 0, anchor_count = 0, anchor_dim = 0;
    std::uint8_t kernel_act = 0, hidden_act = 0;
    get(in, s);
    get(in, anchor_count);
    get(in, anchor_dim);
    get(in, kernel_act);
    get(in, hidden_act);
    if (anchors.rows() != anchor_count || anchors.cols() != anchor_dim)
        throw std::runtime_error("model anchors do not match supplied matrix: " + path);

    KernelNetwork model;
    model.anchors = std::move(anchors);
    model.kernel_activation = static_cast<Activation>(kernel_act);
    model.hidden_activation = static_cast<Activation>(hidden_act);
    for (std::uint64_t j = 0; j < s; ++j) {
        std::uint8_t kind = 0;
        std::int32_t degree = 0, index = 0;
        double sigma = 0.0;
        get(in, kind);
        get(in, degree);
        get(in, sigma);
        get(in, index);
        model.kernels.push_back(kind ==
                                        static_cast<std::uint8_t>(KernelSpec::Kind::polynomial)
                                    ? KernelSpec::polynomial(degree)
                                    : KernelSpec::gaussian(sigma));
        model.kernel_indices.push_back(index);
    }
    model.gammas = get_matrix(in);
    std::uint64_t layer_count = 0;
    get(in, layer_count);
    for (std::uint64_t l = 0; l < layer_count; ++l)
        model.hidden_layers.push_back(get_matrix(in));
    model.output_weights = get_matrix(in);
    if (!in) throw std::runtime_error("truncated model file: " + path);
    return model;
}

std::string training_curve_csv(std::span<const EpochStats> curve) {
    std::string out = "epoch,mean_loss,train_accuracy\n";
    for (std::size_t e = 0; e < curve.size(); ++e) {
        char line[96];
        std::snprintf(line, sizeof(line), "%zu,%.12g,%.12g\n", e, curve[e].mean_loss,
                      curve[e].train_accuracy);
        out += line;
    }
    return out;
}

}  // namespace ngmkl
