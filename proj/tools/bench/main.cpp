#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ngmkl/bench.hpp"
#include "ngmkl/gradcheck.hpp"
#include "ngmkl/kernels.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& datasets,
            const std::vector<std::string>& methods, long long reps, long long seed,
            const std::string& out_path, const std::string& format, long long epochs,
            long long hidden, double lr, double weight_decay, long long batch,
            double c_reg, long long boost_rounds, double l1_threshold,
            const std::string& curves_dir, const std::string& diag_dir) {
    ngmkl::BenchConfig config = ngmkl::load_config(config_path);

    if (!datasets.empty()) {
        std::vector<ngmkl::DatasetEntry> kept;
        for (const std::string& name : datasets) {
            const auto it =
                std::find_if(config.datasets.begin(), config.datasets.end(),
                             [&](const ngmkl::DatasetEntry& e) { return e.name == name; });
            if (it == config.datasets.end())
                throw std::runtime_error("dataset not in manifest: " + name);
            kept.push_back(*it);
        }
        config.datasets = std::move(kept);
    }
    if (!methods.empty()) {
        config.methods.clear();
        for (const std::string& name : methods)
            config.methods.push_back(ngmkl::parse_method(name));
    }
    if (reps >= 0) config.repetitions = static_cast<std::size_t>(reps);
    if (seed >= 0) config.base_seed = static_cast<std::uint64_t>(seed);
    if (epochs >= 0) config.train.epochs = static_cast<std::size_t>(epochs);
    if (hidden >= 0) config.train.hidden_width = static_cast<std::size_t>(hidden);
    if (lr >= 0) config.train.learning_rate = lr;
    if (weight_decay >= 0) config.train.weight_decay = weight_decay;
    if (batch >= 0) config.train.batch_size = static_cast<std::size_t>(batch);
    if (c_reg >= 0) config.c_reg = c_reg;
    if (boost_rounds >= 0) config.boost_rounds = static_cast<std::size_t>(boost_rounds);
    if (l1_threshold >= 0) config.l1_threshold = l1_threshold;
    if (!curves_dir.empty()) config.curves_dir = curves_dir;
    if (!diag_dir.empty()) config.diagnostics_dir = diag_dir;

    if (const char* workers = std::getenv("NGMKL_WORKERS"))
        config.workers = static_cast<std::size_t>(std::atoll(workers));

    const ngmkl::ExperimentReport report = ngmkl::run_experiment(config);

    for (const auto& cell : report.cells) {
        if (cell.failure.empty())
            std::fprintf(stderr, "%-14s %-8s mean %6.2f%%  std %5.2f%%  (%.1fs)\n",
                         cell.dataset.c_str(), ngmkl::method_name(cell.method).c_str(),
                         cell.mean_error, cell.std_error, cell.wall_seconds);
        else
            std::fprintf(stderr, "%-14s %-8s FAILED: %s\n", cell.dataset.c_str(),
                         ngmkl::method_name(cell.method).c_str(), cell.failure.c_str());
    }

    const std::string rendered = format == "markdown"
                                     ? ngmkl::render_report_markdown(report)
                                     : ngmkl::render_report_csv(report);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open output file: " + out_path);
        out << rendered;
        std::fprintf(stderr, "report written to %s\n", out_path.c_str());
    }
    return report.all_failed() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-kernel benchmark harness"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a benchmark sweep from a JSON config");
    std::string config_path, out_path, format = "csv", curves_dir, diag_dir;
    std::vector<std::string> datasets, methods;
    long long reps = -1, seed = -1, epochs = -1, hidden = -1, batch = -1,
              boost_rounds = -1;
    double lr = -1, weight_decay = -1, c_reg = -1, l1_threshold = -1;
    run->add_option("--config", config_path, "JSON experiment config")->required();
    run->add_option("--dataset", datasets, "Restrict to these manifest datasets");
    run->add_option("--method", methods, "Methods: mkl, ngmkl1, ngmkl2, ngmkl3");
    run->add_option("--reps", reps, "Repetitions per cell");
    run->add_option("--seed", seed, "Base seed");
    run->add_option("--out", out_path, "Report output path (default stdout)");
    run->add_option("--format", format, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    run->add_option("--epochs", epochs, "Training epochs");
    run->add_option("--hidden", hidden, "Hidden layer width");
    run->add_option("--lr", lr, "Learning rate");
    run->add_option("--weight-decay", weight_decay, "Weight decay");
    run->add_option("--batch-size", batch, "Minibatch size");
    run->add_option("--c-reg", c_reg, "SVM box constraint");
    run->add_option("--boost-rounds", boost_rounds, "Boosting selection rounds");
    run->add_option("--l1-threshold", l1_threshold, "Sparse-selection beta threshold");
    run->add_option("--curves-dir", curves_dir, "Write per-cell training curves here");
    run->add_option("--diag-dir", diag_dir, "Write per-cell selection diagnostics here");

    // verify-gradients
    auto* verify = app.add_subcommand("verify-gradients",
                                      "Finite-difference audit of the network gradients");
    long long vg_seed = 7, vg_instances = 25;
    verify->add_option("--seed", vg_seed, "RNG seed");
    verify->add_option("--instances", vg_instances, "Number of random models");

    // list-kernels
    auto* list = app.add_subcommand("list-kernels", "Print the base kernel bank");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, datasets, methods, reps, seed, out_path, format,
                           epochs, hidden, lr, weight_decay, batch, c_reg, boost_rounds,
                           l1_threshold, curves_dir, diag_dir);

        if (verify->parsed()) {
            const auto report = ngmkl::run_gradient_check_suite(
                static_cast<std::uint64_t>(vg_seed),
                static_cast<std::size_t>(vg_instances));
            std::printf("%zu parameters checked, max relative error %.3g: %s\n",
                        report.parameters_checked, report.max_rel_error,
                        report.passed ? "OK" : "FAILED");
            return report.passed ? 0 : 1;
        }

        if (list->parsed()) {
            const auto bank = ngmkl::base_kernel_bank();
            for (std::size_t i = 0; i < bank.size(); ++i)
                std::printf("%2zu  %s\n", i, bank[i].name().c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
