#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ngmkl/common.hpp"

namespace ngmkl {

/// Dense labeled dataset. Labels are class indices in [0, class_count);
/// label_map records the raw file label for each class in order of first
/// appearance, so parse -> serialize round-trips exactly.
struct Dataset {
    Matrix features;              // n x d
    std::vector<int> labels;      // length n
    int class_count = 0;
    std::vector<double> label_map;  // class index -> raw label value

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitPlan {
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t repetitions = 1;
    std::uint64_t base_seed = 0;
};

/// Per-feature training min/max for [-1, 1] scaling.
struct ScalingParams {
    std::vector<double> min;
    std::vector<double> max;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parse LIBSVM text: `<label> <index>:<value> ...`, 1-based strictly
/// increasing indices, `#` comments, blank lines ignored. Absent indices are
/// zero; d = max index seen.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(std::string_view text);
Dataset load_libsvm_file(const std::string& path);

/// Canonical LIBSVM lines: raw label, nonzero pairs in index order. If the
/// last column is all-zero (width known only from an explicit zero pair), the
/// first row carries a `d:0` marker so the width survives a round-trip.
std::string serialize_libsvm(const Dataset& data);

ScalingParams fit_scaling(const Dataset& train);

/// Affine map sending train-min -> -1 and train-max -> +1 per feature;
/// constant features map to 0. Test values may land outside [-1, 1].
Dataset apply_scaling(const ScalingParams& params, const Dataset& data);

/// Deterministic split for repetition `rep_index`: a SplitMix64(base_seed +
/// rep_index) permutation, first train_size rows then test_size rows.
std::pair<Dataset, Dataset> make_split(const Dataset& data, const SplitPlan& plan,
                                       std::size_t rep_index);

/// Binary convenience: +1 for class 0, -1 for class 1. Throws unless
/// class_count == 2.
std::vector<double> binary_signed_labels(const Dataset& data);

/// One manifest row, mirroring the benchmark table: dataset name, LIBSVM file
/// path and its split plan.
struct DatasetEntry {
    std::string name;
    std::string path;
    SplitPlan plan;
};

/// JSON manifest `{"datasets": [{name, path, train_size, test_size,
/// repetitions}]}`. Relative paths resolve against the manifest's directory.
std::vector<DatasetEntry> load_manifest(const std::string& path);

}  // namespace ngmkl
