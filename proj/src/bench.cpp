#include "ngmkl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "ngmkl/mkl.hpp"

namespace ngmkl {

std::string method_name(Method m) {
    switch (m) {
        case Method::mkl_baseline: return "MKL";
        case Method::ngmkl1: return "NGMKL1";
        case Method::ngmkl2: return "NGMKL2";
        case Method::ngmkl3: return "NGMKL3";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mkl" || lower == "mkl-baseline") return Method::mkl_baseline;
    if (lower == "ngmkl1") return Method::ngmkl1;
    if (lower == "ngmkl2") return Method::ngmkl2;
    if (lower == "ngmkl3") return Method::ngmkl3;
    throw std::invalid_argument("unknown method: " + name);
}

namespace {

std::uint64_t cell_seed(std::uint64_t base, std::size_t rep, Method method) {
    SplitMix64 rng(base + 0x9e3779b97f4a7c15ULL * (rep + 1));
    return rng.next() + static_cast<std::uint64_t>(method);
}

std::vector<GramMatrix> training_grams(const std::vector<KernelSpec>& bank,
                                       const Matrix& features) {
    std::vector<GramMatrix> grams;
    grams.reserve(bank.size());
    for (const KernelSpec& spec : bank) grams.push_back(gram(spec, features, features));
    return grams;
}

double mkl_baseline_error(const Dataset& train, const Dataset& test,
                          const BenchConfig& config) {
    const auto bank = base_kernel_bank();
    const auto y_train = binary_signed_labels(train);
    const auto grams = training_grams(bank, train.features);

    MklOptions options;
    options.c_reg = config.c_reg;
    const MklSolution solution = mkl_train(grams, y_train, options);

    // Combine test-by-train kernel blocks one kernel at a time to keep the
    // peak at a single m x n accumulator.
    Matrix combined(test.size(), train.size());
    for (std::size_t j = 0; j < bank.size(); ++j) {
        if (solution.beta[j] == 0.0) continue;
        const GramMatrix block = gram(bank[j], test.features, train.features);
        const double* src = block.values.data();
        double* dst = combined.data();
        for (std::size_t k = 0; k < combined.rows() * combined.cols(); ++k)
            dst[k] += solution.beta[j] * src[k];
    }

    const auto y_test = binary_signed_labels(test);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double decision = svm_decision(solution.svm, combined.row(i));
        const double label = decision >= 0.0 ? 1.0 : -1.0;
        if (label != y_test[i]) ++wrong;
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(test.size());
}

}  // namespace

MethodRun run_method(Method method, const Dataset& train, const Dataset& test,
                     const BenchConfig& config, std::uint64_t seed) {
    detail::require(train.dim() == test.dim(), "run_method: dimension mismatch");

    const ScalingParams scaling = fit_scaling(train);
    const Dataset strain = apply_scaling(scaling, train);
    const Dataset stest = apply_scaling(scaling, test);

    MethodRun run;
    if (method == Method::mkl_baseline) {
        if (train.class_count != 2)
            throw std::runtime_error("MKL baseline supports binary problems only");
        run.error_percent = mkl_baseline_error(strain, stest, config);
        return run;
    }

    const auto bank = base_kernel_bank();
    if (method == Method::ngmkl1) {
        run.selection = select_all(bank.size());
    } else {
        if (train.class_count != 2)
            throw std::runtime_error(method_name(method) +
                                     " kernel selection supports binary problems only");
        const auto y_train = binary_signed_labels(strain);
        const auto grams = training_grams(bank, strain.features);
        if (method == Method::ngmkl2) {
            MklOptions options;
            options.c_reg = config.c_reg;
            run.selection = select_l1(grams, y_train, options, config.l1_threshold);
        } else {
            run.selection =
                select_mkboost_d1(grams, y_train, config.boost_rounds, config.c_reg);
        }
    }

    std::vector<KernelSpec> kernels;
    for (int idx : run.selection.dedup_selected)
        kernels.push_back(bank[static_cast<std::size_t>(idx)]);

    TrainConfig train_config = config.train;
    train_config.seed = seed;
    train_config.batch_size = std::min(train_config.batch_size, strain.size());

    TrainResult trained =
        ::ngmkl::train(strain, kernels, run.selection.dedup_selected, train_config);
    run.curve = std::move(trained.curve);

    const auto predictions = predict(trained.model, stest.features);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < stest.size(); ++i)
        if (predictions[i] != stest.labels[i]) ++wrong;
    run.error_percent = 100.0 * static_cast<double>(wrong) / static_cast<double>(stest.size());
    return run;
}

bool ExperimentReport::all_failed() const {
    if (cells.empty()) return false;
    return std::all_of(cells.begin(), cells.end(),
                       [](const CellResult& c) { return !c.failure.empty(); });
}

ExperimentReport run_experiment(const BenchConfig& config) {
    detail::require(!config.datasets.empty(), "run_experiment: no datasets configured");
    detail::require(!config.methods.empty(), "run_experiment: no methods configured");

    // Load each dataset once, up front; a bad file fails its cells, not the run.
    std::map<std::string, Dataset> loaded;
    std::map<std::string, std::string> load_errors;
    for (const auto& entry : config.datasets) {
        if (loaded.count(entry.name) || load_errors.count(entry.name)) continue;
        try {
            loaded.emplace(entry.name, load_libsvm_file(entry.path));
        } catch (const std::exception& e) {
            load_errors.emplace(entry.name, e.what());
        }
    }

    struct Task {
        std::size_t cell;
        std::size_t rep;
        const DatasetEntry* entry;
        Method method;
        SplitPlan plan;
    };

    ExperimentReport report;
    std::vector<Task> tasks;
    for (const auto& entry : config.datasets) {
        SplitPlan plan = entry.plan;
        if (config.repetitions) plan.repetitions = *config.repetitions;
        if (config.base_seed) plan.base_seed = *config.base_seed;
        for (Method method : config.methods) {
            CellResult cell;
            cell.dataset = entry.name;
            cell.method = method;
            cell.rep_errors.assign(plan.repetitions,
                                   std::numeric_limits<double>::quiet_NaN());
            const std::size_t cell_index = report.cells.size();
            report.cells.push_back(std::move(cell));
            for (std::size_t rep = 0; rep < plan.repetitions; ++rep)
                tasks.push_back({cell_index, rep, &entry, method, plan});
        }
    }

    std::vector<std::vector<std::string>> rep_failures(report.cells.size());
    std::vector<std::vector<MethodRun>> rep_runs(report.cells.size());
    std::vector<std::vector<double>> rep_times(report.cells.size());
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const std::size_t reps = report.cells[c].rep_errors.size();
        rep_failures[c].resize(reps);
        rep_runs[c].resize(reps);
        rep_times[c].assign(reps, 0.0);
    }

    auto run_task = [&](const Task& task) {
        const auto started = std::chrono::steady_clock::now();
        try {
            auto it = loaded.find(task.entry->name);
            if (it == loaded.end())
                throw std::runtime_error(load_errors.at(task.entry->name));
            const auto [train_set, test_set] = make_split(it->second, task.plan, task.rep);
            MethodRun run = run_method(task.method, train_set, test_set, config,
                                       cell_seed(task.plan.base_seed, task.rep, task.method));
            report.cells[task.cell].rep_errors[task.rep] = run.error_percent;
            rep_runs[task.cell][task.rep] = std::move(run);
        } catch (const std::exception& e) {
            rep_failures[task.cell][task.rep] = e.what();
        }
        rep_times[task.cell][task.rep] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                .count();
    };

    std::size_t workers = config.workers;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, tasks.size());

    if (workers <= 1) {
        for (const Task& task : tasks) run_task(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < tasks.size();
                     t = next.fetch_add(1))
                    run_task(tasks[t]);
            });
        for (auto& thread : pool) thread.join();
    }

    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        CellResult& cell = report.cells[c];
        for (std::size_t rep = 0; rep < cell.rep_errors.size(); ++rep) {
            if (!rep_failures[c][rep].empty() && cell.failure.empty())
                cell.failure = "rep " + std::to_string(rep) + ": " + rep_failures[c][rep];
            cell.wall_seconds += rep_times[c][rep];
        }
        if (!cell.failure.empty()) continue;

        const auto& errors = cell.rep_errors;
        const double n = static_cast<double>(errors.size());
        double mean = 0.0;
        for (double e : errors) mean += e;
        mean /= n;
        double var = 0.0;
        for (double e : errors) var += (e - mean) * (e - mean);
        cell.mean_error = mean;
        cell.std_error = std::sqrt(var / n);  // population std

        // Optional per-cell artifacts from the first repetition.
        if (!config.curves_dir.empty() && !rep_runs[c].front().curve.empty()) {
            std::filesystem::create_directories(config.curves_dir);
            std::ofstream out(std::filesystem::path(config.curves_dir) /
                              (cell.dataset + "." + method_name(cell.method) +
                               ".curve.csv"));
            out << training_curve_csv(rep_runs[c].front().curve);
        }
        if (!config.diagnostics_dir.empty() &&
            cell.method != Method::mkl_baseline && cell.method != Method::ngmkl1) {
            std::filesystem::create_directories(config.diagnostics_dir);
            std::ofstream out(std::filesystem::path(config.diagnostics_dir) /
                              (cell.dataset + "." + method_name(cell.method) +
                               ".selection.csv"));
            out << selection_diagnostics_csv(rep_runs[c].front().selection);
        }
    }
    return report;
}

std::string render_report_csv(const ExperimentReport& report) {
    std::string out =
        "dataset,method,mean_error_percent,std_error_percent,repetitions,rep_errors,"
        "failure\n";
    for (const CellResult& cell : report.cells) {
        out += cell.dataset;
        out += ',';
        out += method_name(cell.method);
        out += ',';
        char buf[64];
        if (cell.failure.empty()) {
            std::snprintf(buf, sizeof(buf), "%.12g", cell.mean_error);
            out += buf;
            out += ',';
            std::snprintf(buf, sizeof(buf), "%.12g", cell.std_error);
            out += buf;
        } else {
            out += ",";
        }
        out += ',';
        out += std::to_string(cell.rep_errors.size());
        out += ',';
        if (cell.failure.empty()) {
            for (std::size_t i = 0; i < cell.rep_errors.size(); ++i) {
                if (i) out += ';';
                std::snprintf(buf, sizeof(buf), "%.12g", cell.rep_errors[i]);
                out += buf;
            }
        }
        out += ',';
        std::string failure = cell.failure;
        std::replace(failure.begin(), failure.end(), ',', ';');
        std::replace(failure.begin(), failure.end(), '\n', ' ');
        out += failure;
        out += '\n';
    }
    return out;
}

std::string format_percent(double value) {
    const double scaled = value * 100.0;
    const double lower = std::floor(scaled);
    const double frac = scaled - lower;
    double rounded;
    if (std::abs(frac - 0.5) < 1e-9) {
        // tie at the third decimal: round half to even
        rounded = std::fmod(lower, 2.0) == 0.0 ? lower : lower + 1.0;
    } else {
        rounded = std::floor(scaled + 0.5);
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", rounded / 100.0);
    return buf;
}

std::string render_report_markdown(const ExperimentReport& report) {
    std::vector<std::string> datasets;
    std::vector<Method> methods;
    for (const CellResult& cell : report.cells) {
        if (std::find(datasets.begin(), datasets.end(), cell.dataset) == datasets.end())
            datasets.push_back(cell.dataset);
        if (std::find(methods.begin(), methods.end(), cell.method) == methods.end())
            methods.push_back(cell.method);
    }

    std::ostringstream out;
    out << "| Dataset |";
    for (Method m : methods) out << ' ' << method_name(m) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) out << "---|";
    out << '\n';

    for (const std::string& dataset : datasets) {
        out << "| " << dataset << " |";
        for (Method m : methods) {
            const auto it = std::find_if(
                report.cells.begin(), report.cells.end(), [&](const CellResult& c) {
                    return c.dataset == dataset && c.method == m;
                });
            if (it == report.cells.end()) {
                out << " |";
            } else if (!it->failure.empty()) {
                out << " n/a |";
            } else {
                out << ' ' << format_percent(it->mean_error) << "±"
                    << format_percent(it->std_error) << " |";
            }
        }
        out << '\n';
    }
    return out.str();
}

BenchConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);

    BenchConfig config;
    const auto base = std::filesystem::path(path).parent_path();

    auto manifest_path = std::filesystem::path(doc.at("manifest").get<std::string>());
    if (!manifest_path.is_absolute()) manifest_path = base / manifest_path;
    config.datasets = load_manifest(manifest_path.string());

    if (doc.contains("datasets")) {
        std::vector<std::string> filter = doc["datasets"].get<std::vector<std::string>>();
        std::vector<DatasetEntry> kept;
        for (const std::string& name : filter) {
            const auto it =
                std::find_if(config.datasets.begin(), config.datasets.end(),
                             [&](const DatasetEntry& e) { return e.name == name; });
            if (it == config.datasets.end())
                throw std::runtime_error("dataset not in manifest: " + name);
            kept.push_back(*it);
        }
        config.datasets = std::move(kept);
    }

    if (doc.contains("methods")) {
        config.methods.clear();
        for (const auto& name : doc["methods"])
            config.methods.push_back(parse_method(name.get<std::string>()));
    }

    if (doc.contains("repetitions"))
        config.repetitions = doc["repetitions"].get<std::size_t>();
    if (doc.contains("base_seed"))
        config.base_seed = doc["base_seed"].get<std::uint64_t>();
    config.c_reg = doc.value("c_reg", config.c_reg);
    config.l1_threshold = doc.value("l1_threshold", config.l1_threshold);
    config.boost_rounds = doc.value("boost_rounds", config.boost_rounds);
    config.workers = doc.value("workers", config.workers);
    config.curves_dir = doc.value("curves_dir", config.curves_dir);
    config.diagnostics_dir = doc.value("diagnostics_dir", config.diagnostics_dir);

    if (doc.contains("train")) {
        const auto& t = doc["train"];
        config.train.batch_size = t.value("batch_size", config.train.batch_size);
        config.train.learning_rate = t.value("learning_rate", config.train.learning_rate);
        config.train.weight_decay = t.value("weight_decay", config.train.weight_decay);
        config.train.epochs = t.value("epochs", config.train.epochs);
        config.train.hidden_width = t.value("hidden_width", config.train.hidden_width);
    }
    return config;
}

}  // namespace ngmkl
