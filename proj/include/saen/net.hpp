#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "saen/compression.hpp"
#include "saen/dense.hpp"
#include "saen/hdecomp.hpp"

namespace saen {

// One affine layer; also reused as the container shape for gradients and
// Adam moment accumulators.
struct LayerParams {
    DenseMatrix w; // in x out
    DenseMatrix b; // 1 x out
};

// Per-level MLP: layer_dims = [input, hidden..., d_l]. Hidden layers apply
// Leaky ReLU, the final layer is affine.
struct LevelNet {
    Index level = 0;
    std::vector<Index> layer_dims;
    std::vector<LayerParams> layers;
};

struct Gradients {
    std::vector<std::vector<LayerParams>> nets; // [level][layer]
    LayerParams classifier;
};

struct AdamState {
    Gradients m;
    Gradients v;
    std::int64_t step = 0;
};

struct SaenModel {
    std::vector<LevelNet> nets; // levels 0..L
    LayerParams classifier;     // d_L -> class_count
    Index class_count = 0;
    double leaky_slope = 0.01;
    AdamState adam_state;
    std::uint64_t seed = 0;

    Index levels() const { return static_cast<Index>(nets.size()) - 1; }
};

// Input/output dimensions the model must be built against.
struct ModelShape {
    Index attribute_dim = 0;
    std::vector<Index> type_counts; // n(l) for l = 1..L
    Index class_count = 0;
};

ModelShape model_shape(const HDecomposition& h, Index class_count);
ModelShape model_shape(const CompressedDecomposition& c, Index class_count);

// widths: Table-3 style per-level lists; the last entry of each list is d_l,
// and the classifier affine map d_L -> class_count is appended on top.
// Weights are seeded uniform +-sqrt(6 / (fan_in + fan_out)), biases zero.
SaenModel make_model(const ModelShape& shape, const std::vector<std::vector<Index>>& widths,
                     double leaky_slope, std::uint64_t seed);

// Numeric view of a (possibly compressed) decomposition: double-valued
// relation matrices plus the map from dataset graph to the H_L row that
// carries its representation.
struct NetworkData {
    SparseDouble x;
    std::vector<std::vector<SparseDouble>> relations; // [level][type], level >= 1
    std::vector<Index> top_map;                       // graph id -> H_L row
    Index graph_count = 0;
};

NetworkData make_network_data(const HDecomposition& h);
NetworkData make_network_data(const CompressedDecomposition& c);

// Per-level activations cached for backprop: z = pre-activations per layer,
// act = post-activations per layer (act.back() is H_l). aggregate is A_l for
// l >= 1 (level 0 reads the sparse attribute matrix directly).
struct LevelTrace {
    DenseMatrix aggregate;
    std::vector<DenseMatrix> z;
    std::vector<DenseMatrix> act;
};

struct ForwardTrace {
    std::vector<LevelTrace> levels;
    DenseMatrix raw_logits; // per H_L row, before the graph gather
    DenseMatrix logits;     // per dataset graph
};

// Eq-style building blocks, usable standalone.
DenseMatrix shift_aggregate(const std::vector<SparseDouble>& relations, const DenseMatrix& h_prev);
DenseMatrix extract(const LevelNet& net, const DenseMatrix& aggregate, double leaky_slope);

ForwardTrace forward(const SaenModel& model, const NetworkData& data);

struct LossResult {
    double loss = 0.0;
    DenseMatrix grad; // d loss / d logits
};

// Mean over the selected examples of -log softmax(logits)[label];
// empty `examples` means all rows.
LossResult cross_entropy_loss(const DenseMatrix& logits, const std::vector<Index>& labels,
                              const std::vector<Index>& examples = {});

Gradients backward(const SaenModel& model, const NetworkData& data, const ForwardTrace& trace,
                   const DenseMatrix& loss_grad);

Gradients zero_gradients(const SaenModel& model);

void adam_step(SaenModel& model, const Gradients& grads, double lr, double beta1, double beta2,
               double eps);

struct TrainConfig {
    Index epochs = 100;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<Index> train_examples;  // empty = train on every graph
    std::function<bool()> should_stop;  // checked between epochs
};

struct TrainResult {
    std::vector<double> loss_curve;
    bool stopped = false; // true when should_stop interrupted the run
};

TrainResult train(SaenModel& model, const NetworkData& data, const std::vector<Index>& labels,
                  const TrainConfig& config);

struct EvalResult {
    double accuracy = 0.0;
    std::vector<Index> predictions; // per evaluated example
};

EvalResult evaluate(const SaenModel& model, const NetworkData& data,
                    const std::vector<Index>& labels, const std::vector<Index>& examples = {});

// "SAEN1" checkpoint serialization.
void save_model(const SaenModel& model, const std::filesystem::path& path);
SaenModel load_model(const std::filesystem::path& path);

} // namespace saen
