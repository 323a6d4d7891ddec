#include "saen/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "saen/binio.hpp"

namespace saen {

namespace {

constexpr const char kMagic[] = "SAEN1\n";

DenseMatrix affine(const DenseMatrix& input, const LayerParams& layer) {
    DenseMatrix z = matmul(input, layer.w);
    for (Index r = 0; r < z.rows(); ++r) {
        auto row = z.row(r);
        auto bias = layer.b.row(0);
        for (Index c = 0; c < z.cols(); ++c) row[c] += bias[c];
    }
    return z;
}

DenseMatrix affine_sparse(const SparseDouble& input, const LayerParams& layer) {
    DenseMatrix z(input.rows(), layer.w.cols());
    add_sparse_dense_product(input, layer.w, z, 0);
    for (Index r = 0; r < z.rows(); ++r) {
        auto row = z.row(r);
        auto bias = layer.b.row(0);
        for (Index c = 0; c < z.cols(); ++c) row[c] += bias[c];
    }
    return z;
}

DenseMatrix leaky_relu(const DenseMatrix& z, double slope) {
    DenseMatrix a = z;
    for (double& v : a.data())
        if (v < 0.0) v *= slope;
    return a;
}

DenseMatrix column_sums(const DenseMatrix& m) {
    DenseMatrix out(1, m.cols());
    auto acc = out.row(0);
    for (Index r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (Index c = 0; c < m.cols(); ++c) acc[c] += row[c];
    }
    return out;
}

// Runs the per-level MLP, caching pre- and post-activations. The first-layer
// input is either the sparse attribute matrix (level 0) or the dense
// aggregate, so it is passed through a callable.
template <typename FirstAffine>
void run_net(const LevelNet& net, FirstAffine&& first_affine, double slope, LevelTrace& trace) {
    const std::size_t layer_count = net.layers.size();
    trace.z.clear();
    trace.act.clear();
    for (std::size_t i = 0; i < layer_count; ++i) {
        DenseMatrix z = i == 0 ? first_affine(net.layers[0]) : affine(trace.act[i - 1], net.layers[i]);
        const bool hidden = i + 1 < layer_count;
        trace.act.push_back(hidden ? leaky_relu(z, slope) : z);
        trace.z.push_back(std::move(z));
    }
}

void check_finite(const LayerParams& g, const std::string& path) {
    if (!g.w.all_finite()) throw TrainingError("non-finite gradient at " + path + ".w");
    if (!g.b.all_finite()) throw TrainingError("non-finite gradient at " + path + ".b");
}

void adam_update_tensor(DenseMatrix& p, const DenseMatrix& g, DenseMatrix& m, DenseMatrix& v,
                        double lr, double beta1, double beta2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.data().size(); ++i) {
        const double grad = g.data()[i];
        m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * grad;
        v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * grad * grad;
        const double m_hat = m.data()[i] / bc1;
        const double v_hat = v.data()[i] / bc2;
        p.data()[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

void write_tensor(std::ostream& os, const DenseMatrix& m) {
    binio::write_u64(os, static_cast<std::uint64_t>(m.rows()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.cols()));
    for (double v : m.data()) binio::write_f64(os, v);
}

DenseMatrix read_tensor(std::istream& is) {
    const Index rows = binio::read_i64(is);
    const Index cols = binio::read_i64(is);
    if (rows < 0 || cols < 0) throw FormatError("corrupt tensor block: negative shape");
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = binio::read_f64(is);
    return m;
}

void write_layer(std::ostream& os, const LayerParams& p) {
    write_tensor(os, p.w);
    write_tensor(os, p.b);
}

LayerParams read_layer(std::istream& is) {
    LayerParams p;
    p.w = read_tensor(is);
    p.b = read_tensor(is);
    return p;
}

} // namespace

ModelShape model_shape(const HDecomposition& h, Index class_count) {
    ModelShape shape;
    shape.attribute_dim = h.attributes.cols();
    for (Index l = 1; l <= h.levels(); ++l) shape.type_counts.push_back(h.type_count(l));
    shape.class_count = class_count;
    return shape;
}

ModelShape model_shape(const CompressedDecomposition& c, Index class_count) {
    ModelShape shape;
    shape.attribute_dim = c.x_comp.cols();
    for (Index l = 1; l <= c.levels(); ++l)
        shape.type_counts.push_back(static_cast<Index>(c.alphabets[l].types.size()));
    shape.class_count = class_count;
    return shape;
}

SaenModel make_model(const ModelShape& shape, const std::vector<std::vector<Index>>& widths,
                     double leaky_slope, std::uint64_t seed) {
    const Index levels = static_cast<Index>(shape.type_counts.size());
    if (static_cast<Index>(widths.size()) != levels + 1)
        throw ArgumentError("make_model: expected one width list per level (got " +
                            std::to_string(widths.size()) + ", need " + std::to_string(levels + 1) +
                            ")");
    if (shape.class_count < 2) throw ArgumentError("make_model: class_count must be >= 2");

    SaenModel model;
    model.class_count = shape.class_count;
    model.leaky_slope = leaky_slope;
    model.seed = seed;
    std::mt19937_64 rng(seed);
    const auto init_layer = [&rng](Index in, Index out) {
        LayerParams p;
        p.w = DenseMatrix(in, out);
        p.b = DenseMatrix(1, out);
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : p.w.data()) v = dist(rng);
        return p;
    };

    Index prev_dim = 0;
    for (Index l = 0; l <= levels; ++l) {
        if (widths[l].empty()) throw ArgumentError("make_model: empty width list for level " +
                                                   std::to_string(l));
        for (Index w : widths[l])
            if (w < 1) throw ArgumentError("make_model: non-positive layer width");
        LevelNet net;
        net.level = l;
        const Index input = l == 0 ? shape.attribute_dim : shape.type_counts[l - 1] * prev_dim;
        net.layer_dims.push_back(input);
        for (Index w : widths[l]) net.layer_dims.push_back(w);
        for (std::size_t i = 0; i + 1 < net.layer_dims.size(); ++i)
            net.layers.push_back(init_layer(net.layer_dims[i], net.layer_dims[i + 1]));
        prev_dim = net.layer_dims.back();
        model.nets.push_back(std::move(net));
    }
    model.classifier = init_layer(prev_dim, shape.class_count);

    model.adam_state.m = zero_gradients(model);
    model.adam_state.v = zero_gradients(model);
    model.adam_state.step = 0;
    return model;
}

NetworkData make_network_data(const HDecomposition& h) {
    NetworkData data;
    data.x = h.attributes.cast<double>();
    data.relations.resize(h.levels() + 1);
    for (Index l = 1; l <= h.levels(); ++l)
        for (const auto& rel : h.relations[l]) data.relations[l].push_back(rel.matrix.cast<double>());
    data.graph_count = static_cast<Index>(h.top_index.size());
    data.top_map.assign(data.graph_count, -1);
    for (Index s = 0; s < static_cast<Index>(h.top_index.size()); ++s) {
        const Index g = h.top_index[s];
        if (g < 0 || g >= data.graph_count || data.top_map[g] != -1)
            throw ArgumentError("make_network_data: top_index is not a bijection onto graphs");
        data.top_map[g] = s;
    }
    return data;
}

NetworkData make_network_data(const CompressedDecomposition& c) {
    NetworkData data;
    data.x = c.x_comp.cast<double>();
    data.relations.resize(c.levels() + 1);
    for (Index l = 1; l <= c.levels(); ++l)
        for (const auto& rel : c.relations_comp[l])
            data.relations[l].push_back(rel.matrix.cast<double>());
    data.graph_count = static_cast<Index>(c.top_index.size());
    data.top_map.assign(data.graph_count, -1);
    const auto& top_pair = c.stack.back();
    for (Index s = 0; s < static_cast<Index>(c.top_index.size()); ++s) {
        const Index g = c.top_index[s];
        if (g < 0 || g >= data.graph_count || data.top_map[g] != -1)
            throw ArgumentError("make_network_data: top_index is not a bijection onto graphs");
        data.top_map[g] = top_pair.class_of[s];
    }
    return data;
}

DenseMatrix shift_aggregate(const std::vector<SparseDouble>& relations, const DenseMatrix& h_prev) {
    if (relations.empty()) throw ArgumentError("shift_aggregate: no relation matrices");
    const Index rows = relations[0].rows();
    const Index d = h_prev.cols();
    for (const auto& rel : relations)
        if (rel.rows() != rows) throw ArgumentError("shift_aggregate: relation row count mismatch");
    DenseMatrix a(rows, static_cast<Index>(relations.size()) * d);
    for (std::size_t t = 0; t < relations.size(); ++t)
        add_sparse_dense_product(relations[t], h_prev, a, static_cast<Index>(t) * d);
    return a;
}

DenseMatrix extract(const LevelNet& net, const DenseMatrix& aggregate, double leaky_slope) {
    if (aggregate.cols() != net.layer_dims.front())
        throw ArgumentError("extract: input width does not match net input dim");
    LevelTrace trace;
    run_net(net, [&](const LayerParams& l0) { return affine(aggregate, l0); }, leaky_slope, trace);
    return trace.act.back();
}

ForwardTrace forward(const SaenModel& model, const NetworkData& data) {
    const Index levels = model.levels();
    if (static_cast<Index>(data.relations.size()) != levels + 1)
        throw ArgumentError("forward: model level count does not match data");
    if (data.x.cols() != model.nets[0].layer_dims.front())
        throw ArgumentError("forward: attribute width does not match level-0 net input");

    ForwardTrace trace;
    trace.levels.resize(levels + 1);
    run_net(model.nets[0], [&](const LayerParams& l0) { return affine_sparse(data.x, l0); },
            model.leaky_slope, trace.levels[0]);

    for (Index l = 1; l <= levels; ++l) {
        const DenseMatrix& h_prev = trace.levels[l - 1].act.back();
        trace.levels[l].aggregate = shift_aggregate(data.relations[l], h_prev);
        if (trace.levels[l].aggregate.cols() != model.nets[l].layer_dims.front())
            throw ArgumentError("forward: aggregate width does not match level net input");
        run_net(model.nets[l],
                [&](const LayerParams& l0) { return affine(trace.levels[l].aggregate, l0); },
                model.leaky_slope, trace.levels[l]);
    }

    trace.raw_logits = affine(trace.levels[levels].act.back(), model.classifier);
    trace.logits = DenseMatrix(data.graph_count, model.class_count);
    for (Index g = 0; g < data.graph_count; ++g) {
        auto src = trace.raw_logits.row(data.top_map[g]);
        std::copy(src.begin(), src.end(), trace.logits.row(g).begin());
    }
    return trace;
}

LossResult cross_entropy_loss(const DenseMatrix& logits, const std::vector<Index>& labels,
                              const std::vector<Index>& examples) {
    if (static_cast<Index>(labels.size()) != logits.rows())
        throw ArgumentError("cross_entropy_loss: label count does not match logit rows");
    std::vector<Index> all;
    if (examples.empty()) {
        all.resize(logits.rows());
        for (Index g = 0; g < logits.rows(); ++g) all[g] = g;
    }
    const std::vector<Index>& rows = examples.empty() ? all : examples;
    if (rows.empty()) throw ArgumentError("cross_entropy_loss: no examples selected");

    LossResult result;
    result.grad = DenseMatrix(logits.rows(), logits.cols());
    const double inv_count = 1.0 / static_cast<double>(rows.size());
    for (Index g : rows) {
        if (g < 0 || g >= logits.rows())
            throw ArgumentError("cross_entropy_loss: example index out of range");
        const Index label = labels[g];
        if (label < 0 || label >= logits.cols())
            throw ArgumentError("cross_entropy_loss: invalid label " + std::to_string(label));
        auto row = logits.row(g);
        const double max_logit = *std::max_element(row.begin(), row.end());
        double denom = 0.0;
        for (double v : row) denom += std::exp(v - max_logit);
        result.loss += (std::log(denom) - (row[label] - max_logit)) * inv_count;
        auto grad = result.grad.row(g);
        for (Index k = 0; k < logits.cols(); ++k)
            grad[k] = std::exp(row[k] - max_logit) / denom * inv_count;
        grad[label] -= inv_count;
    }
    return result;
}

Gradients zero_gradients(const SaenModel& model) {
    Gradients g;
    g.nets.resize(model.nets.size());
    for (std::size_t l = 0; l < model.nets.size(); ++l)
        for (const auto& layer : model.nets[l].layers)
            g.nets[l].push_back({DenseMatrix(layer.w.rows(), layer.w.cols()),
                                 DenseMatrix(1, layer.b.cols())});
    g.classifier = {DenseMatrix(model.classifier.w.rows(), model.classifier.w.cols()),
                    DenseMatrix(1, model.classifier.b.cols())};
    return g;
}

Gradients backward(const SaenModel& model, const NetworkData& data, const ForwardTrace& trace,
                   const DenseMatrix& loss_grad) {
    const Index levels = model.levels();
    Gradients grads = zero_gradients(model);

    // Scatter per-graph logit gradients back onto H_L rows; under compression
    // several graphs can share one row.
    DenseMatrix draw(trace.raw_logits.rows(), trace.raw_logits.cols());
    for (Index g = 0; g < data.graph_count; ++g) {
        auto src = loss_grad.row(g);
        auto dst = draw.row(data.top_map[g]);
        for (Index k = 0; k < loss_grad.cols(); ++k) dst[k] += src[k];
    }

    const DenseMatrix& h_top = trace.levels[levels].act.back();
    grads.classifier.w = matmul_at_b(h_top, draw);
    grads.classifier.b = column_sums(draw);
    DenseMatrix dact = matmul_a_bt(draw, model.classifier.w);

    for (Index l = levels; l >= 0; --l) {
        const LevelNet& net = model.nets[l];
        const LevelTrace& lt = trace.levels[l];
        for (Index i = static_cast<Index>(net.layers.size()) - 1; i >= 0; --i) {
            DenseMatrix dz = std::move(dact);
            const bool hidden = i + 1 < static_cast<Index>(net.layers.size());
            if (hidden) {
                const DenseMatrix& z = lt.z[i];
                for (std::size_t k = 0; k < dz.data().size(); ++k)
                    if (z.data()[k] < 0.0) dz.data()[k] *= model.leaky_slope;
            }
            grads.nets[l][i].b = column_sums(dz);
            if (i > 0) {
                grads.nets[l][i].w = matmul_at_b(lt.act[i - 1], dz);
                dact = matmul_a_bt(dz, net.layers[i].w);
            } else if (l > 0) {
                grads.nets[l][0].w = matmul_at_b(lt.aggregate, dz);
                dact = matmul_a_bt(dz, net.layers[0].w);
            } else {
                // Level-0 first layer: weight gradient via the sparse
                // attribute matrix; no gradient flows into the data.
                add_sparse_transpose_product(data.x, dz, grads.nets[0][0].w, 0);
            }
        }
        if (l > 0) {
            // dact currently holds dA_l; push it through the transposed
            // relations to get dH_{l-1}.
            const Index d_prev = model.nets[l - 1].layer_dims.back();
            DenseMatrix dh(trace.levels[l - 1].act.back().rows(), d_prev);
            for (std::size_t t = 0; t < data.relations[l].size(); ++t)
                add_sparse_transpose_product(data.relations[l][t], dact, dh,
                                             static_cast<Index>(t) * d_prev);
            dact = std::move(dh);
        }
    }
    return grads;
}

void adam_step(SaenModel& model, const Gradients& grads, double lr, double beta1, double beta2,
               double eps) {
    AdamState& state = model.adam_state;
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < model.nets.size(); ++l) {
        for (std::size_t i = 0; i < model.nets[l].layers.size(); ++i) {
            const std::string path = "net" + std::to_string(l) + ".layer" + std::to_string(i);
            check_finite(grads.nets[l][i], path);
            adam_update_tensor(model.nets[l].layers[i].w, grads.nets[l][i].w, state.m.nets[l][i].w,
                               state.v.nets[l][i].w, lr, beta1, beta2, eps, bc1, bc2);
            adam_update_tensor(model.nets[l].layers[i].b, grads.nets[l][i].b, state.m.nets[l][i].b,
                               state.v.nets[l][i].b, lr, beta1, beta2, eps, bc1, bc2);
        }
    }
    check_finite(grads.classifier, "classifier");
    adam_update_tensor(model.classifier.w, grads.classifier.w, state.m.classifier.w,
                       state.v.classifier.w, lr, beta1, beta2, eps, bc1, bc2);
    adam_update_tensor(model.classifier.b, grads.classifier.b, state.m.classifier.b,
                       state.v.classifier.b, lr, beta1, beta2, eps, bc1, bc2);
}

TrainResult train(SaenModel& model, const NetworkData& data, const std::vector<Index>& labels,
                  const TrainConfig& config) {
    TrainResult result;
    result.loss_curve.reserve(config.epochs);
    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.should_stop && config.should_stop()) {
            result.stopped = true;
            break;
        }
        const ForwardTrace trace = forward(model, data);
        const LossResult loss = cross_entropy_loss(trace.logits, labels, config.train_examples);
        if (!std::isfinite(loss.loss))
            throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
        const Gradients grads = backward(model, data, trace, loss.grad);
        adam_step(model, grads, config.lr, config.beta1, config.beta2, config.eps);
        result.loss_curve.push_back(loss.loss);
    }
    return result;
}

EvalResult evaluate(const SaenModel& model, const NetworkData& data,
                    const std::vector<Index>& labels, const std::vector<Index>& examples) {
    const ForwardTrace trace = forward(model, data);
    std::vector<Index> all;
    if (examples.empty()) {
        all.resize(data.graph_count);
        for (Index g = 0; g < data.graph_count; ++g) all[g] = g;
    }
    const std::vector<Index>& rows = examples.empty() ? all : examples;
    EvalResult result;
    Index correct = 0;
    for (Index g : rows) {
        if (g < 0 || g >= data.graph_count)
            throw ArgumentError("evaluate: example index out of range");
        auto row = trace.logits.row(g);
        const Index pred = static_cast<Index>(
            std::max_element(row.begin(), row.end()) - row.begin());
        result.predictions.push_back(pred);
        if (pred == labels[g]) ++correct;
    }
    result.accuracy = rows.empty() ? 0.0 : static_cast<double>(correct) / rows.size();
    return result;
}

void save_model(const SaenModel& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    binio::write_magic(os, kMagic);
    binio::write_f64(os, model.leaky_slope);
    binio::write_u64(os, static_cast<std::uint64_t>(model.class_count));
    binio::write_u64(os, model.seed);
    binio::write_u64(os, model.nets.size());
    for (const auto& net : model.nets) {
        binio::write_u64(os, net.layer_dims.size());
        for (Index d : net.layer_dims) binio::write_i64(os, d);
        for (const auto& layer : net.layers) write_layer(os, layer);
    }
    write_layer(os, model.classifier);
    binio::write_u64(os, static_cast<std::uint64_t>(model.adam_state.step));
    for (const auto& levels : {&model.adam_state.m, &model.adam_state.v}) {
        for (const auto& net : levels->nets)
            for (const auto& layer : net) write_layer(os, layer);
        write_layer(os, levels->classifier);
    }
    if (!os) throw IngestError("failed writing " + path.string());
}

namespace {

SaenModel load_model_impl(std::istream& is) {
    SaenModel model;
    model.leaky_slope = binio::read_f64(is);
    model.class_count = binio::read_i64(is);
    model.seed = binio::read_u64(is);
    const Index net_count = binio::read_i64(is);
    if (net_count < 1 || net_count > 1024)
        throw FormatError("corrupt checkpoint: implausible level count");
    for (Index l = 0; l < net_count; ++l) {
        LevelNet net;
        net.level = l;
        const Index dims = binio::read_i64(is);
        if (dims < 2 || dims > (1 << 20))
            throw FormatError("corrupt checkpoint: implausible layer count");
        net.layer_dims.resize(dims);
        for (auto& d : net.layer_dims) d = binio::read_i64(is);
        for (Index i = 0; i + 1 < dims; ++i) net.layers.push_back(read_layer(is));
        model.nets.push_back(std::move(net));
    }
    model.classifier = read_layer(is);
    model.adam_state.step = binio::read_i64(is);
    for (auto* levels : {&model.adam_state.m, &model.adam_state.v}) {
        levels->nets.resize(net_count);
        for (Index l = 0; l < net_count; ++l)
            for (std::size_t i = 0; i < model.nets[l].layers.size(); ++i)
                levels->nets[l].push_back(read_layer(is));
        levels->classifier = read_layer(is);
    }
    return model;
}

} // namespace

SaenModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IngestError("cannot open: " + path.string());
    binio::expect_magic(is, kMagic);
    try {
        return load_model_impl(is);
    } catch (const ArgumentError& e) {
        throw FormatError("corrupt checkpoint " + path.string() + ": " + e.what());
    }
}

} // namespace saen
