#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "saen/compression.hpp"
#include "saen/graph.hpp"
#include "saen/net.hpp"

namespace saen {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct ExperimentConfig {
    std::filesystem::path dataset_dir;
    std::string dataset_name;
    std::vector<Index> radii;
    std::vector<std::vector<Index>> widths; // per level, Table-3 style
    Index epochs = 100;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double leaky_slope = 0.01;
    Index folds = 10;
    Index repeats = 10;
    std::uint64_t seed = 1;
    bool compress = true;
    AttributeMode attributes = AttributeMode::kBoth;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config);

// Stratified fold assignment: returns fold id per example; per-class counts
// differ by at most one across folds.
std::vector<Index> stratified_folds(const std::vector<Index>& labels, Index folds,
                                    std::uint64_t seed);

struct FoldScore {
    Index repeat = 0;
    Index fold = 0;
    double accuracy = 0.0;
};

struct PhaseTimes {
    double decompose_s = 0.0;
    double compress_s = 0.0;
    double train_s = 0.0;
    double evaluate_s = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string toolkit_version = kToolkitVersion;
    Index graph_count = 0;
    Index class_count = 0;
    Index attribute_dim = 0;
    std::vector<FoldScore> scores;
    double mean_accuracy = 0.0;
    double std_folds = 0.0;        // sample std over all fold scores
    double std_repeat_means = 0.0; // sample std over per-repeat means
    PhaseTimes times;
    std::optional<CompressionReport> compression;
};

// on_fold, when set, is invoked after every completed fold so callers can
// flush partial results if a later fold dies.
ExperimentReport run_cross_validation(const ExperimentConfig& config,
                                      const std::function<void(const FoldScore&)>& on_fold = {});

// One full-dataset training run (the `train` subcommand).
struct TrainingRunReport {
    ExperimentConfig config;
    std::string toolkit_version = kToolkitVersion;
    Index graph_count = 0;
    Index class_count = 0;
    std::vector<double> loss_curve;
    double train_accuracy = 0.0;
    PhaseTimes times;
    std::optional<CompressionReport> compression;
};

TrainingRunReport run_single_training(const ExperimentConfig& config,
                                      SaenModel* trained_model = nullptr);

struct BenchSide {
    std::string status = "ok"; // ok | timeout | out-of-memory
    double seconds = 0.0;      // meaningful only when status == ok
};

struct BenchOptions {
    double timeout_s = 0.0;  // 0 forces the timeout sentinel before training
    Index mem_cap_mb = 0;    // 0 = unlimited
    Index epochs = 1;        // epochs per timed side
};

struct BenchReport {
    ExperimentConfig config;
    std::string toolkit_version = kToolkitVersion;
    double decompose_s = 0.0;
    double compress_s = 0.0;
    BenchSide uncompressed;
    BenchSide compressed;
    std::optional<double> speedup; // set only when both sides ran
    CompressionReport compression;

    bool has_sentinel() const {
        return uncompressed.status != "ok" || compressed.status != "ok";
    }
};

BenchReport benchmark_compression(const ExperimentConfig& config, const BenchOptions& options);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
nlohmann::ordered_json report_to_json(const TrainingRunReport& report);
nlohmann::ordered_json report_to_json(const BenchReport& report);
nlohmann::ordered_json compression_report_to_json(const CompressionReport& report);

// Writes the machine-readable report with stable key order.
void emit_report(const nlohmann::ordered_json& report, const std::filesystem::path& path);
nlohmann::ordered_json load_report(const std::filesystem::path& path);

// Human-readable accuracy / size-and-runtime style table for terminal output.
std::string format_report_table(const nlohmann::ordered_json& report);

} // namespace saen
