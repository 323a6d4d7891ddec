#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saen/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSentinel = 3;

struct CliArgs {
    std::string dataset_dir;
    std::string name;
    std::vector<saen::Index> radii;
    std::string attributes = "both";
    std::string in_path;
    std::string out_path;
    std::string report_path;
    std::string config_path;
    std::string model_out;
    std::int64_t seed = -1;
    bool no_compress = false;
    double timeout_s = 0.0;
    std::int64_t mem_cap_mb = 0;
    std::int64_t bench_epochs = 1;
};

saen::ExperimentConfig load_cli_config(const CliArgs& args) {
    saen::ExperimentConfig config = saen::load_config(args.config_path);
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    if (args.no_compress) config.compress = false;
    return config;
}

int run(const std::string& command, const CliArgs& args) {
    using namespace saen;
    if (command == "decompose") {
        const GraphDataset dataset = parse_tu_dataset(args.dataset_dir, args.name);
        const SparseInt attributes =
            build_attributes(dataset, attribute_mode_from_string(args.attributes));
        const HDecomposition h = egnn_decompose(dataset, attributes, args.radii);
        save_hdecomposition(h, args.out_path);
        const DecompositionStats stats = decomposition_stats(h);
        std::cout << "levels:";
        for (Index s : stats.level_sizes) std::cout << " " << s;
        std::cout << "\nstored entries: " << stats.total_entries
                  << "\nserialized bytes: " << stats.serialized_bytes << "\n";
        return kExitOk;
    }
    if (command == "compress") {
        const HDecomposition h = load_hdecomposition(args.in_path);
        const CompressedDecomposition c = domain_compress(h);
        save_compressed(c, args.out_path);
        const CompressionReport report = compression_report(h, c);
        nlohmann::ordered_json j;
        j["kind"] = "compress";
        j["toolkit_version"] = kToolkitVersion;
        j["compression"] = compression_report_to_json(report);
        if (!args.report_path.empty()) emit_report(j, args.report_path);
        std::cout << format_report_table(j);
        return kExitOk;
    }
    if (command == "train") {
        const ExperimentConfig config = load_cli_config(args);
        SaenModel model;
        const TrainingRunReport report = run_single_training(config, &model);
        const auto j = report_to_json(report);
        emit_report(j, args.out_path);
        if (!args.model_out.empty()) save_model(model, args.model_out);
        std::cout << format_report_table(j);
        return kExitOk;
    }
    if (command == "cv") {
        const ExperimentConfig config = load_cli_config(args);
        // Flush whatever folds finished if a later one dies.
        std::vector<FoldScore> partial;
        try {
            const ExperimentReport report = run_cross_validation(
                config, [&partial](const FoldScore& s) { partial.push_back(s); });
            const auto j = report_to_json(report);
            emit_report(j, args.out_path);
            std::cout << format_report_table(j);
        } catch (...) {
            if (!partial.empty()) {
                nlohmann::ordered_json j;
                j["kind"] = "cv";
                j["toolkit_version"] = kToolkitVersion;
                j["config"] = config_to_json(config);
                j["partial"] = true;
                nlohmann::ordered_json scores = nlohmann::ordered_json::array();
                for (const auto& s : partial)
                    scores.push_back(
                        {{"repeat", s.repeat}, {"fold", s.fold}, {"accuracy", s.accuracy}});
                j["scores"] = scores;
                emit_report(j, args.out_path + ".partial");
                std::cerr << "wrote " << partial.size() << " completed folds to " << args.out_path
                          << ".partial\n";
            }
            throw;
        }
        return kExitOk;
    }
    if (command == "bench") {
        const ExperimentConfig config = load_cli_config(args);
        BenchOptions options;
        options.timeout_s = args.timeout_s;
        options.mem_cap_mb = args.mem_cap_mb;
        options.epochs = args.bench_epochs;
        const BenchReport report = benchmark_compression(config, options);
        const auto j = report_to_json(report);
        emit_report(j, args.out_path);
        std::cout << format_report_table(j);
        return report.has_sentinel() ? kExitSentinel : kExitOk;
    }
    return kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shift-Aggregate-Extract networks over hierarchical graph decompositions"};
    app.set_version_flag("--version", saen::kToolkitVersion);
    app.require_subcommand(1);
    CliArgs args;

    auto* decompose = app.add_subcommand("decompose", "Build the EGNN decomposition of a dataset");
    decompose->add_option("--dataset", args.dataset_dir, "dataset directory")->required();
    decompose->add_option("--name", args.name, "dataset name (file prefix)")->required();
    decompose->add_option("--radii", args.radii, "ego graph radii")->required()->delimiter(',');
    decompose->add_option("--attributes", args.attributes, "degree|node-labels|both");
    decompose->add_option("--out", args.out_path, "output HDEC1 file")->required();

    auto* compress = app.add_subcommand("compress", "Domain-compress a decomposition");
    compress->add_option("--in", args.in_path, "input HDEC1 file")->required();
    compress->add_option("--out", args.out_path, "output HDECC1 file")->required();
    compress->add_option("--report", args.report_path, "ratio report JSON");

    auto* tr = app.add_subcommand("train", "Train once on the full dataset");
    tr->add_option("--config", args.config_path, "experiment config JSON")->required();
    tr->add_option("--seed", args.seed, "override config seed");
    tr->add_flag("--no-compress", args.no_compress, "train on the uncompressed decomposition");
    tr->add_option("--out", args.out_path, "report JSON")->required();
    tr->add_option("--model-out", args.model_out, "SAEN1 checkpoint path");

    auto* cv = app.add_subcommand("cv", "Repeated stratified k-fold cross-validation");
    cv->add_option("--config", args.config_path, "experiment config JSON")->required();
    cv->add_option("--out", args.out_path, "report JSON")->required();

    auto* bench = app.add_subcommand("bench", "Compression ratio and speedup benchmark");
    bench->add_option("--config", args.config_path, "experiment config JSON")->required();
    bench->add_option("--timeout", args.timeout_s, "seconds before the timeout sentinel")
        ->required();
    bench->add_option("--mem-cap-mb", args.mem_cap_mb, "memory cap (0 = unlimited)");
    bench->add_option("--epochs", args.bench_epochs, "epochs per timed side");
    bench->add_option("--out", args.out_path, "report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), args);
    } catch (const saen::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const saen::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const saen::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const saen::IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
