#include "ngmkl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "json.hpp"

namespace ngmkl {

namespace {

// Shortest round-trip decimal form.
std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

bool parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    // std::from_chars rejects a leading '+', which LIBSVM labels carry.
    if (token.front() == '+') token.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

bool parse_index(std::string_view token, std::size_t& out) {
    if (token.empty()) return false;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

struct SparseRow {
    double raw_label;
    std::vector<std::pair<std::size_t, double>> entries;  // 1-based indices
};

}  // namespace

Dataset parse_libsvm(std::istream& in) {
    std::vector<SparseRow> rows;
    std::size_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);

        std::istringstream tokens(line);
        std::string token;
        if (!(tokens >> token)) continue;  // blank or comment-only line

        SparseRow row;
        if (!parse_double(token, row.raw_label) || !std::isfinite(row.raw_label))
            throw ParseError(line_no, "malformed label token '" + token + "'");

        std::size_t prev_index = 0;
        while (tokens >> token) {
            auto colon = token.find(':');
            if (colon == std::string::npos)
                throw ParseError(line_no, "malformed feature token '" + token + "'");
            std::size_t index;
            double value;
            if (!parse_index(token.substr(0, colon), index))
                throw ParseError(line_no, "malformed feature index in '" + token + "'");
            if (!parse_double(token.substr(colon + 1), value) || !std::isfinite(value))
                throw ParseError(line_no, "malformed feature value in '" + token + "'");
            if (index < 1) throw ParseError(line_no, "feature index must be >= 1");
            if (index <= prev_index)
                throw ParseError(line_no, "feature indices must be strictly increasing");
            prev_index = index;
            max_index = std::max(max_index, index);
            row.entries.emplace_back(index, value);
        }
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw ParseError(line_no, "empty file");
    if (max_index == 0) throw ParseError(line_no, "no feature indices in file");

    Dataset data;
    data.features = Matrix(rows.size(), max_index);
    data.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double raw = rows[i].raw_label;
        auto it = std::find(data.label_map.begin(), data.label_map.end(), raw);
        if (it == data.label_map.end()) {
            data.label_map.push_back(raw);
            it = std::prev(data.label_map.end());
        }
        data.labels[i] = static_cast<int>(it - data.label_map.begin());
        for (const auto& [index, value] : rows[i].entries)
            data.features(i, index - 1) = value;
    }
    data.class_count = static_cast<int>(data.label_map.size());
    return data;
}

Dataset parse_libsvm(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_libsvm(in);
}

Dataset load_libsvm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return parse_libsvm(in);
}

std::string serialize_libsvm(const Dataset& data) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();

    bool last_column_used = false;
    for (std::size_t i = 0; i < n && !last_column_used; ++i)
        last_column_used = data.features(i, d - 1) != 0.0;

    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += format_double(data.label_map[static_cast<std::size_t>(data.labels[i])]);
        for (std::size_t j = 0; j < d; ++j) {
            double v = data.features(i, j);
            if (v == 0.0) continue;
            out += ' ';
            out += std::to_string(j + 1);
            out += ':';
            out += format_double(v);
        }
        // Width marker: keeps d recoverable when column d-1 is all zeros.
        if (i == 0 && !last_column_used) {
            out += ' ';
            out += std::to_string(d);
            out += ":0";
        }
        out += '\n';
    }
    return out;
}

ScalingParams fit_scaling(const Dataset& train) {
    detail::require(train.size() >= 1, "fit_scaling: empty dataset");
    const std::size_t d = train.dim();
    ScalingParams params;
    params.min.assign(d, 0.0);
    params.max.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = train.features(0, j), hi = lo;
        for (std::size_t i = 1; i < train.size(); ++i) {
            lo = std::min(lo, train.features(i, j));
            hi = std::max(hi, train.features(i, j));
        }
        params.min[j] = lo;
        params.max[j] = hi;
    }
    return params;
}

Dataset apply_scaling(const ScalingParams& params, const Dataset& data) {
    detail::require(params.min.size() == data.dim(),
                    "apply_scaling: dimension mismatch");
    Dataset scaled = data;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        const double lo = params.min[j], hi = params.max[j];
        const double range = hi - lo;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double v = data.features(i, j);
            scaled.features(i, j) = range == 0.0 ? 0.0 : -1.0 + 2.0 * (v - lo) / range;
        }
    }
    return scaled;
}

std::pair<Dataset, Dataset> make_split(const Dataset& data, const SplitPlan& plan,
                                       std::size_t rep_index) {
    detail::require(rep_index < plan.repetitions, "make_split: rep_index out of range");
    detail::require(plan.train_size + plan.test_size <= data.size(),
                    "make_split: split sizes exceed dataset size");

    SplitMix64 rng(plan.base_seed + rep_index);
    const auto perm = random_permutation(data.size(), rng);

    auto take = [&](std::size_t offset, std::size_t count) {
        Dataset subset;
        subset.features = Matrix(count, data.dim());
        subset.labels.resize(count);
        subset.class_count = data.class_count;
        subset.label_map = data.label_map;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t src = perm[offset + i];
            subset.labels[i] = data.labels[src];
            for (std::size_t j = 0; j < data.dim(); ++j)
                subset.features(i, j) = data.features(src, j);
        }
        return subset;
    };

    return {take(0, plan.train_size), take(plan.train_size, plan.test_size)};
}

std::vector<double> binary_signed_labels(const Dataset& data) {
    detail::require(data.class_count == 2, "binary labels require exactly 2 classes");
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        y[i] = data.labels[i] == 0 ? 1.0 : -1.0;
    return y;
}

std::vector<DatasetEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);

    const auto base = std::filesystem::path(path).parent_path();
    std::vector<DatasetEntry> entries;
    for (const auto& item : doc.at("datasets")) {
        DatasetEntry entry;
        entry.name = item.at("name").get<std::string>();
        auto file = std::filesystem::path(item.at("path").get<std::string>());
        entry.path = file.is_absolute() ? file.string() : (base / file).string();
        entry.plan.train_size = item.at("train_size").get<std::size_t>();
        entry.plan.test_size = item.at("test_size").get<std::size_t>();
        entry.plan.repetitions = item.value("repetitions", std::size_t{10});
        entry.plan.base_seed = item.value("base_seed", std::uint64_t{0});
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace ngmkl
