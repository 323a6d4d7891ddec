#include "saen/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace saen {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void require_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : j.items())
        if (!allowed.contains(key))
            throw ValidationError("config" + path + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config" + path + "." + key + ": wrong type");
    }
}

template <typename T>
T get_required(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ValidationError("config" + path + "." + key + ": missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config" + path + "." + key + ": wrong type");
    }
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

std::uint64_t fold_model_seed(std::uint64_t seed, Index repeat, Index fold) {
    // splitmix64 over (seed, repeat, fold) so every run gets a distinct,
    // reproducible stream.
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(repeat) + 1)) ^
                      (0xbf58476d1ce4e5b9ull * (static_cast<std::uint64_t>(fold) + 1));
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

struct PreparedData {
    GraphDataset dataset;
    HDecomposition decomposition;
    std::optional<CompressedDecomposition> compressed;
    NetworkData network;
    ModelShape shape;
    double decompose_s = 0.0;
    double compress_s = 0.0;
    std::optional<CompressionReport> report;
};

PreparedData prepare(const ExperimentConfig& config, bool compress) {
    PreparedData out;
    out.dataset = parse_tu_dataset(config.dataset_dir, config.dataset_name);
    const SparseInt attributes = build_attributes(out.dataset, config.attributes);
    {
        Stopwatch sw;
        out.decomposition = egnn_decompose(out.dataset, attributes, config.radii);
        out.decompose_s = sw.seconds();
    }
    if (compress) {
        Stopwatch sw;
        out.compressed = domain_compress(out.decomposition);
        out.compress_s = sw.seconds();
        out.report = compression_report(out.decomposition, *out.compressed);
        out.network = make_network_data(*out.compressed);
        out.shape = model_shape(*out.compressed, out.dataset.class_count);
    } else {
        out.network = make_network_data(out.decomposition);
        out.shape = model_shape(out.decomposition, out.dataset.class_count);
    }
    return out;
}

// Rough peak-bytes estimate for one training run: data matrices plus forward
// trace, with a factor for backward transients.
Index estimate_training_bytes(const std::vector<Index>& level_sizes, Index nnz_total,
                              Index attribute_dim, const std::vector<std::vector<Index>>& widths) {
    Index bytes = nnz_total * 24;
    Index prev_dim = attribute_dim;
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const Index rows = level_sizes[l];
        Index row_width = l == 0 ? 0 : prev_dim * 2; // aggregate block columns
        for (Index w : widths[l]) row_width += 2 * w;
        bytes += rows * row_width * 8;
        prev_dim = widths[l].back();
    }
    return bytes * 3;
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    require_keys(j, "", {"version", "dataset", "radii", "layers", "epochs", "lr", "beta1", "beta2",
                         "epsilon", "leaky_slope", "folds", "repeats", "seed", "compress",
                         "attributes"});
    ExperimentConfig config;
    const Index version = get_or<Index>(j, "version", "", 1);
    if (version != 1) throw ValidationError("config.version: unsupported version");

    if (!j.contains("dataset") || !j.at("dataset").is_object())
        throw ValidationError("config.dataset: missing or not an object");
    const json& ds = j.at("dataset");
    require_keys(ds, ".dataset", {"dir", "name"});
    config.dataset_dir = get_required<std::string>(ds, "dir", ".dataset");
    config.dataset_name = get_required<std::string>(ds, "name", ".dataset");

    config.radii = get_required<std::vector<Index>>(j, "radii", "");

    if (!j.contains("layers") || !j.at("layers").is_object())
        throw ValidationError("config.layers: missing or not an object");
    const json& layers = j.at("layers");
    std::set<std::string> layer_keys;
    for (std::size_t l = 0; l < layers.size(); ++l) layer_keys.insert("s" + std::to_string(l));
    require_keys(layers, ".layers", layer_keys);
    for (std::size_t l = 0; l < layers.size(); ++l)
        config.widths.push_back(
            get_required<std::vector<Index>>(layers, "s" + std::to_string(l), ".layers"));

    config.epochs = get_or<Index>(j, "epochs", "", config.epochs);
    config.lr = get_or<double>(j, "lr", "", config.lr);
    config.beta1 = get_or<double>(j, "beta1", "", config.beta1);
    config.beta2 = get_or<double>(j, "beta2", "", config.beta2);
    config.epsilon = get_or<double>(j, "epsilon", "", config.epsilon);
    config.leaky_slope = get_or<double>(j, "leaky_slope", "", config.leaky_slope);
    config.folds = get_or<Index>(j, "folds", "", config.folds);
    config.repeats = get_or<Index>(j, "repeats", "", config.repeats);
    config.seed = get_or<std::uint64_t>(j, "seed", "", config.seed);
    config.compress = get_or<bool>(j, "compress", "", config.compress);
    config.attributes =
        attribute_mode_from_string(get_or<std::string>(j, "attributes", "", "both"));

    validate_config(config);
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config parse error in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void validate_config(const ExperimentConfig& config) {
    if (config.dataset_name.empty()) throw ValidationError("config.dataset.name: empty");
    if (config.radii.empty()) throw ValidationError("config.radii: must be non-empty");
    if (!std::is_sorted(config.radii.begin(), config.radii.end()) ||
        std::adjacent_find(config.radii.begin(), config.radii.end()) != config.radii.end())
        throw ValidationError("config.radii: must be strictly ascending");
    if (config.radii.front() < 0) throw ValidationError("config.radii: negative radius");
    if (config.widths.empty()) throw ValidationError("config.layers: missing level width lists");
    for (std::size_t l = 0; l < config.widths.size(); ++l) {
        if (config.widths[l].empty())
            throw ValidationError("config.layers.s" + std::to_string(l) + ": empty");
        for (Index w : config.widths[l])
            if (w < 1) throw ValidationError("config.layers.s" + std::to_string(l) +
                                             ": widths must be positive");
    }
    if (config.epochs < 0) throw ValidationError("config.epochs: must be >= 0");
    if (config.lr <= 0) throw ValidationError("config.lr: must be > 0");
    if (config.folds < 2) throw ValidationError("config.folds: must be >= 2");
    if (config.repeats < 1) throw ValidationError("config.repeats: must be >= 1");
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
    ordered_json j;
    j["version"] = 1;
    j["dataset"] = {{"dir", config.dataset_dir.string()}, {"name", config.dataset_name}};
    j["radii"] = config.radii;
    ordered_json layers;
    for (std::size_t l = 0; l < config.widths.size(); ++l)
        layers["s" + std::to_string(l)] = config.widths[l];
    j["layers"] = layers;
    j["epochs"] = config.epochs;
    j["lr"] = config.lr;
    j["beta1"] = config.beta1;
    j["beta2"] = config.beta2;
    j["epsilon"] = config.epsilon;
    j["leaky_slope"] = config.leaky_slope;
    j["folds"] = config.folds;
    j["repeats"] = config.repeats;
    j["seed"] = config.seed;
    j["compress"] = config.compress;
    j["attributes"] = to_string(config.attributes);
    return j;
}

std::vector<Index> stratified_folds(const std::vector<Index>& labels, Index folds,
                                    std::uint64_t seed) {
    if (folds < 2) throw ArgumentError("stratified_folds: folds must be >= 2");
    const Index n = static_cast<Index>(labels.size());
    std::vector<Index> fold_of(n, -1);
    const Index classes = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::mt19937_64 rng(seed);
    for (Index c = 0; c < classes; ++c) {
        std::vector<Index> members;
        for (Index i = 0; i < n; ++i)
            if (labels[i] == c) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t k = 0; k < members.size(); ++k)
            fold_of[members[k]] = static_cast<Index>(k) % folds;
    }
    return fold_of;
}

ExperimentReport run_cross_validation(const ExperimentConfig& config,
                                      const std::function<void(const FoldScore&)>& on_fold) {
    validate_config(config);
    ExperimentReport report;
    report.config = config;

    PreparedData data = prepare(config, config.compress);
    report.graph_count = data.dataset.size();
    report.class_count = data.dataset.class_count;
    report.attribute_dim = data.shape.attribute_dim;
    report.times.decompose_s = data.decompose_s;
    report.times.compress_s = data.compress_s;
    report.compression = data.report;

    if (data.dataset.size() < config.folds)
        throw ValidationError("config.folds: more folds than graphs");

    std::vector<double> all_scores;
    std::vector<double> repeat_means;
    for (Index repeat = 0; repeat < config.repeats; ++repeat) {
        const std::vector<Index> fold_of =
            stratified_folds(data.dataset.labels, config.folds, config.seed + repeat);
        std::vector<double> repeat_scores;
        for (Index fold = 0; fold < config.folds; ++fold) {
            std::vector<Index> train_idx, test_idx;
            for (Index g = 0; g < data.dataset.size(); ++g)
                (fold_of[g] == fold ? test_idx : train_idx).push_back(g);

            SaenModel model = make_model(data.shape, config.widths, config.leaky_slope,
                                         fold_model_seed(config.seed, repeat, fold));
            TrainConfig tc;
            tc.epochs = config.epochs;
            tc.lr = config.lr;
            tc.beta1 = config.beta1;
            tc.beta2 = config.beta2;
            tc.eps = config.epsilon;
            tc.train_examples = train_idx;
            {
                Stopwatch sw;
                train(model, data.network, data.dataset.labels, tc);
                report.times.train_s += sw.seconds();
            }
            double accuracy = 0.0;
            {
                Stopwatch sw;
                accuracy = evaluate(model, data.network, data.dataset.labels, test_idx).accuracy;
                report.times.evaluate_s += sw.seconds();
            }
            report.scores.push_back({repeat, fold, accuracy});
            all_scores.push_back(accuracy);
            repeat_scores.push_back(accuracy);
            if (on_fold) on_fold(report.scores.back());
        }
        repeat_means.push_back(mean_of(repeat_scores));
    }
    report.mean_accuracy = mean_of(all_scores);
    report.std_folds = sample_std(all_scores);
    report.std_repeat_means = sample_std(repeat_means);
    return report;
}

TrainingRunReport run_single_training(const ExperimentConfig& config, SaenModel* trained_model) {
    validate_config(config);
    TrainingRunReport report;
    report.config = config;

    PreparedData data = prepare(config, config.compress);
    report.graph_count = data.dataset.size();
    report.class_count = data.dataset.class_count;
    report.times.decompose_s = data.decompose_s;
    report.times.compress_s = data.compress_s;
    report.compression = data.report;

    SaenModel model = make_model(data.shape, config.widths, config.leaky_slope, config.seed);
    TrainConfig tc;
    tc.epochs = config.epochs;
    tc.lr = config.lr;
    tc.beta1 = config.beta1;
    tc.beta2 = config.beta2;
    tc.eps = config.epsilon;
    {
        Stopwatch sw;
        report.loss_curve = train(model, data.network, data.dataset.labels, tc).loss_curve;
        report.times.train_s = sw.seconds();
    }
    {
        Stopwatch sw;
        report.train_accuracy = evaluate(model, data.network, data.dataset.labels).accuracy;
        report.times.evaluate_s = sw.seconds();
    }
    if (trained_model) *trained_model = std::move(model);
    return report;
}

BenchReport benchmark_compression(const ExperimentConfig& config, const BenchOptions& options) {
    validate_config(config);
    BenchReport report;
    report.config = config;

    // The benchmark always compresses; the config flag selects the training
    // data path elsewhere, not here.
    PreparedData data = prepare(config, true);
    report.decompose_s = data.decompose_s;
    report.compress_s = data.compress_s;
    report.compression = *data.report;

    const NetworkData uncompressed = make_network_data(data.decomposition);
    const ModelShape shape_unc = model_shape(data.decomposition, data.dataset.class_count);

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(options.timeout_s));
    const auto expired = [deadline] { return std::chrono::steady_clock::now() >= deadline; };

    const auto run_side = [&](const NetworkData& network, const ModelShape& shape,
                              const std::vector<Index>& level_sizes) {
        BenchSide side;
        if (options.mem_cap_mb > 0) {
            Index nnz = network.x.nnz();
            for (const auto& level : network.relations)
                for (const auto& rel : level) nnz += rel.nnz();
            const Index estimate =
                estimate_training_bytes(level_sizes, nnz, shape.attribute_dim, config.widths);
            if (estimate > options.mem_cap_mb * 1024 * 1024) {
                side.status = "out-of-memory";
                return side;
            }
        }
        if (expired()) {
            side.status = "timeout";
            return side;
        }
        SaenModel model = make_model(shape, config.widths, config.leaky_slope, config.seed);
        TrainConfig tc;
        tc.epochs = options.epochs;
        tc.lr = config.lr;
        tc.beta1 = config.beta1;
        tc.beta2 = config.beta2;
        tc.eps = config.epsilon;
        tc.should_stop = expired;
        Stopwatch sw;
        const TrainResult tr = train(model, network, data.dataset.labels, tc);
        if (tr.stopped) {
            side.status = "timeout";
            return side;
        }
        side.seconds = sw.seconds();
        return side;
    };

    report.uncompressed = run_side(uncompressed, shape_unc, data.decomposition.level_sizes);
    report.compressed =
        run_side(data.network, data.shape, data.compressed->level_sizes_comp);
    if (report.uncompressed.status == "ok" && report.compressed.status == "ok" &&
        report.compressed.seconds > 0.0)
        report.speedup = report.uncompressed.seconds / report.compressed.seconds;
    return report;
}

nlohmann::ordered_json compression_report_to_json(const CompressionReport& report) {
    ordered_json j;
    ordered_json levels = ordered_json::array();
    for (const auto& lr : report.levels)
        levels.push_back({{"level", lr.level},
                          {"original_size", lr.original_size},
                          {"compressed_size", lr.compressed_size},
                          {"size_ratio", lr.size_ratio}});
    j["levels"] = levels;
    j["original_entries"] = report.original_entries;
    j["compressed_entries"] = report.compressed_entries;
    j["entry_ratio"] = report.entry_ratio;
    j["original_bytes"] = report.original_bytes;
    j["compressed_bytes"] = report.compressed_bytes;
    j["byte_ratio"] = report.byte_ratio;
    return j;
}

namespace {

ordered_json times_to_json(const PhaseTimes& times) {
    return ordered_json{{"decompose_s", times.decompose_s},
                        {"compress_s", times.compress_s},
                        {"train_s", times.train_s},
                        {"evaluate_s", times.evaluate_s}};
}

} // namespace

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["kind"] = "cv";
    j["toolkit_version"] = report.toolkit_version;
    j["config"] = config_to_json(report.config);
    j["dataset"] = {{"graphs", report.graph_count},
                    {"classes", report.class_count},
                    {"attribute_dim", report.attribute_dim}};
    ordered_json scores = ordered_json::array();
    for (const auto& s : report.scores)
        scores.push_back({{"repeat", s.repeat}, {"fold", s.fold}, {"accuracy", s.accuracy}});
    j["scores"] = scores;
    j["accuracy"] = {{"mean", report.mean_accuracy},
                     {"std_folds", report.std_folds},
                     {"std_repeat_means", report.std_repeat_means}};
    j["timings_s"] = times_to_json(report.times);
    if (report.compression) j["compression"] = compression_report_to_json(*report.compression);
    return j;
}

nlohmann::ordered_json report_to_json(const TrainingRunReport& report) {
    ordered_json j;
    j["kind"] = "train";
    j["toolkit_version"] = report.toolkit_version;
    j["config"] = config_to_json(report.config);
    j["dataset"] = {{"graphs", report.graph_count}, {"classes", report.class_count}};
    j["loss_curve"] = report.loss_curve;
    j["train_accuracy"] = report.train_accuracy;
    j["timings_s"] = times_to_json(report.times);
    if (report.compression) j["compression"] = compression_report_to_json(*report.compression);
    return j;
}

nlohmann::ordered_json report_to_json(const BenchReport& report) {
    ordered_json j;
    j["kind"] = "bench";
    j["toolkit_version"] = report.toolkit_version;
    j["config"] = config_to_json(report.config);
    j["decompose_s"] = report.decompose_s;
    j["compress_s"] = report.compress_s;
    j["uncompressed"] = ordered_json{{"status", report.uncompressed.status}};
    if (report.uncompressed.status == "ok")
        j["uncompressed"]["seconds"] = report.uncompressed.seconds;
    j["compressed"] = ordered_json{{"status", report.compressed.status}};
    if (report.compressed.status == "ok") j["compressed"]["seconds"] = report.compressed.seconds;
    if (report.speedup) j["speedup"] = *report.speedup;
    j["compression"] = compression_report_to_json(report.compression);
    return j;
}

void emit_report(const nlohmann::ordered_json& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    os << report.dump(2) << "\n";
    if (!os) throw IngestError("failed writing " + path.string());
}

nlohmann::ordered_json load_report(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IngestError("cannot open: " + path.string());
    try {
        return ordered_json::parse(is);
    } catch (const json::exception& e) {
        throw FormatError("report parse error in " + path.string() + ": " + e.what());
    }
}

std::string format_report_table(const nlohmann::ordered_json& report) {
    std::ostringstream os;
    const std::string kind = report.value("kind", "");
    if (kind == "cv") {
        os << "dataset            accuracy        std(folds)  std(repeats)\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-18s %6.2f +- %4.2f  %10.2f  %12.2f\n",
                      report["config"]["dataset"]["name"].get<std::string>().c_str(),
                      report["accuracy"]["mean"].get<double>() * 100.0,
                      report["accuracy"]["std_repeat_means"].get<double>() * 100.0,
                      report["accuracy"]["std_folds"].get<double>() * 100.0,
                      report["accuracy"]["std_repeat_means"].get<double>() * 100.0);
        os << buf;
    } else if (kind == "bench") {
        os << "dataset            entries(orig)  entries(comp)  ratio  runtime(orig)  "
              "runtime(comp)  speedup\n";
        const auto& c = report["compression"];
        const auto side = [&](const char* key) -> std::string {
            const auto& s = report[key];
            if (s["status"] == "ok") {
                char b[32];
                std::snprintf(b, sizeof(b), "%.2fs", s["seconds"].get<double>());
                return b;
            }
            return s["status"] == "timeout" ? "TO" : "OOM";
        };
        const std::string name = report["config"]["dataset"]["name"].get<std::string>();
        const std::string unc = side("uncompressed");
        const std::string comp = side("compressed");
        std::string speedup = "--";
        if (report.contains("speedup")) {
            char b[32];
            std::snprintf(b, sizeof(b), "%.1fx", report["speedup"].get<double>());
            speedup = b;
        }
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%-18s %13lld  %13lld  %5.2f  %13s  %13s  %7s\n",
                      name.c_str(),
                      static_cast<long long>(c["original_entries"].get<std::int64_t>()),
                      static_cast<long long>(c["compressed_entries"].get<std::int64_t>()),
                      c["entry_ratio"].get<double>(), unc.c_str(), comp.c_str(), speedup.c_str());
        os << buf;
    } else if (kind == "train") {
        os << "dataset " << report["config"]["dataset"]["name"].get<std::string>()
           << ": train accuracy " << report["train_accuracy"].get<double>() << " over "
           << report["loss_curve"].size() << " epochs\n";
    } else if (kind == "compress") {
        const auto& c = report["compression"];
        os << "entries " << c["original_entries"] << " -> " << c["compressed_entries"]
           << " (ratio " << c["entry_ratio"] << "), bytes " << c["original_bytes"] << " -> "
           << c["compressed_bytes"] << " (ratio " << c["byte_ratio"] << ")\n";
    }
    return os.str();
}

} // namespace saen
