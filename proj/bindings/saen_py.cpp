#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "saen/harness.hpp"

namespace py = pybind11;
using namespace saen;

namespace {

SparseInt array_to_sparse(const py::array& arr) {
    const py::array_t<double> a = py::cast<py::array_t<double>>(arr);
    if (a.ndim() != 2) throw ArgumentError("expected a 2-d array");
    const auto view = a.unchecked<2>();
    std::vector<Index> bad_rows;
    std::vector<SparseInt::Triplet> entries;
    for (py::ssize_t r = 0; r < view.shape(0); ++r) {
        bool ok = true;
        for (py::ssize_t c = 0; c < view.shape(1); ++c) {
            const double v = view(r, c);
            if (v != std::floor(v) || !std::isfinite(v)) ok = false;
        }
        if (!ok) {
            bad_rows.push_back(static_cast<Index>(r));
            continue;
        }
        for (py::ssize_t c = 0; c < view.shape(1); ++c)
            if (view(r, c) != 0.0)
                entries.push_back({static_cast<Index>(r), static_cast<Index>(c),
                                   static_cast<std::int64_t>(view(r, c))});
    }
    if (!bad_rows.empty()) {
        std::ostringstream os;
        os << "non-categorical (non-integer) entries in rows:";
        for (Index r : bad_rows) os << " " << r;
        throw ArgumentError(os.str());
    }
    return SparseInt::from_triplets(static_cast<Index>(view.shape(0)),
                                    static_cast<Index>(view.shape(1)), std::move(entries));
}

py::array_t<std::int64_t> sparse_to_array(const SparseInt& m) {
    py::array_t<std::int64_t> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) view(r, c) = 0;
        auto cs = m.row_cols(r);
        auto vs = m.row_vals(r);
        for (std::size_t k = 0; k < cs.size(); ++k) view(r, cs[k]) = vs[k];
    }
    return out;
}

py::array_t<double> dense_to_array(const DenseMatrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
    return out;
}

// (row, col, numerator, denominator) quadruples for an exact matrix.
py::array_t<std::int64_t> rational_to_quadruples(const SparseRational& m) {
    py::array_t<std::int64_t> out({m.nnz(), static_cast<Index>(4)});
    auto view = out.mutable_unchecked<2>();
    Index k = 0;
    for (Index r = 0; r < m.rows(); ++r) {
        auto cs = m.row_cols(r);
        auto vs = m.row_vals(r);
        for (std::size_t i = 0; i < cs.size(); ++i, ++k) {
            view(k, 0) = r;
            view(k, 1) = cs[i];
            view(k, 2) = vs[i].num;
            view(k, 3) = vs[i].den;
        }
    }
    return out;
}

ExperimentConfig config_from_json_string(const std::string& text) {
    return config_from_json(nlohmann::json::parse(text));
}

py::array_t<double> model_logits(const NetworkData& data, const ModelShape& shape,
                                 const std::vector<std::vector<Index>>& widths, double slope,
                                 std::uint64_t seed) {
    const SaenModel model = make_model(shape, widths, slope, seed);
    return dense_to_array(forward(model, data).logits);
}

} // namespace

PYBIND11_MODULE(_saen, m) {
    m.doc() = "Shift-Aggregate-Extract networks with lossless domain compression";
    m.attr("__version__") = kToolkitVersion;

    py::register_exception<IngestError>(m, "IngestError", PyExc_IOError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

    py::class_<GraphDataset, std::shared_ptr<GraphDataset>>(m, "Dataset")
        .def_property_readonly("name", [](const GraphDataset& d) { return d.name; })
        .def_property_readonly("labels", [](const GraphDataset& d) { return d.labels; })
        .def_property_readonly("class_count", [](const GraphDataset& d) { return d.class_count; })
        .def_property_readonly("node_label_count",
                               [](const GraphDataset& d) { return d.node_label_count; })
        .def("__len__", [](const GraphDataset& d) { return d.size(); })
        .def("num_vertices", [](const GraphDataset& d, Index g) { return d.graphs.at(g).num_vertices; })
        .def("edges", [](const GraphDataset& d, Index g) { return d.graphs.at(g).edges; })
        .def("total_vertices", &GraphDataset::total_vertices)
        .def("write", [](const GraphDataset& d, const std::string& dir) { write_tu_dataset(d, dir); })
        .def("__repr__", [](const GraphDataset& d) {
            return "<saen.Dataset '" + d.name + "' with " + std::to_string(d.size()) + " graphs, " +
                   std::to_string(d.class_count) + " classes>";
        });

    m.def("parse_tu_dataset",
          [](const std::string& dir, const std::string& name) {
              return std::make_shared<GraphDataset>(parse_tu_dataset(dir, name));
          },
          py::arg("dir"), py::arg("name"));

    m.def("degree_attributes",
          [](const GraphDataset& d) { return sparse_to_array(degree_attributes(d)); });

    m.def("build_attributes",
          [](const GraphDataset& d, const std::string& mode) {
              return sparse_to_array(build_attributes(d, attribute_mode_from_string(mode)));
          },
          py::arg("dataset"), py::arg("mode") = "both");

    m.def("ego_graph",
          [](Index num_vertices, const std::vector<std::pair<Index, Index>>& edges, Index root,
             Index radius) {
              const Graph g = make_graph(num_vertices, edges);
              const EgoGraph ego = ego_graph(g, root, radius);
              return py::make_tuple(ego.vertices, ego.edges);
          },
          py::arg("num_vertices"), py::arg("edges"), py::arg("root"), py::arg("radius"));

    py::class_<HDecomposition, std::shared_ptr<HDecomposition>>(m, "Decomposition")
        .def_property_readonly("level_sizes", [](const HDecomposition& h) { return h.level_sizes; })
        .def("validate",
             [](const HDecomposition& h) {
                 std::vector<py::tuple> out;
                 for (const auto& v : validate_decomposition(h))
                     out.push_back(py::make_tuple(v.level, v.object, v.message));
                 return out;
             })
        .def("stats",
             [](const HDecomposition& h) {
                 const DecompositionStats s = decomposition_stats(h);
                 py::dict d;
                 d["level_sizes"] = s.level_sizes;
                 py::list rels;
                 for (const auto& r : s.relations)
                     rels.append(py::make_tuple(r.level, r.mtype, r.nnz));
                 d["relations"] = rels;
                 d["attribute_nnz"] = s.attribute_nnz;
                 d["total_entries"] = s.total_entries;
                 d["serialized_bytes"] = s.serialized_bytes;
                 return d;
             })
        .def("save", [](const HDecomposition& h, const std::string& path) {
            save_hdecomposition(h, path);
        })
        .def_static("load", [](const std::string& path) {
            return std::make_shared<HDecomposition>(load_hdecomposition(path));
        });

    m.def("egnn_decompose",
          [](const GraphDataset& dataset, const std::vector<Index>& radii,
             const std::string& attributes) {
              const SparseInt x = build_attributes(dataset, attribute_mode_from_string(attributes));
              return std::make_shared<HDecomposition>(egnn_decompose(dataset, x, radii));
          },
          py::arg("dataset"), py::arg("radii"), py::arg("attributes") = "both");

    py::class_<CompressedDecomposition, std::shared_ptr<CompressedDecomposition>>(m, "Compressed")
        .def_property_readonly("level_sizes",
                               [](const CompressedDecomposition& c) { return c.level_sizes_comp; })
        .def("save", [](const CompressedDecomposition& c, const std::string& path) {
            save_compressed(c, path);
        })
        .def_static("load", [](const std::string& path) {
            return std::make_shared<CompressedDecomposition>(load_compressed(path));
        });

    m.def("domain_compress", [](const HDecomposition& h) {
        return std::make_shared<CompressedDecomposition>(domain_compress(h));
    });

    m.def("compression_report_json",
          [](const HDecomposition& h, const CompressedDecomposition& c) {
              return compression_report_to_json(compression_report(h, c)).dump();
          });

    m.def("verify_compression",
          [](const HDecomposition& h, const CompressedDecomposition& c) {
              return verify_compression_exact(h, c);
          });

    m.def("compute_cd",
          [](const py::array& matrix) {
              const SparseInt sm = array_to_sparse(matrix);
              const CompressionPair pair = compute_cd(sm);
              return py::make_tuple(sparse_to_array(sm.take_rows(pair.representatives)),
                                    rational_to_quadruples(pair.C), sparse_to_array(pair.D));
          },
          py::arg("matrix"),
          "Group identical rows; returns (m_comp, c_quadruples, d) with c as "
          "(row, col, numerator, denominator) rows.");

    m.def("forward_logits",
          [](const HDecomposition& h, const std::vector<std::vector<Index>>& widths,
             Index class_count, std::uint64_t seed, double leaky_slope) {
              return model_logits(make_network_data(h), model_shape(h, class_count), widths,
                                  leaky_slope, seed);
          },
          py::arg("decomposition"), py::arg("widths"), py::arg("class_count"), py::arg("seed") = 7,
          py::arg("leaky_slope") = 0.01);

    m.def("forward_logits",
          [](const CompressedDecomposition& c, const std::vector<std::vector<Index>>& widths,
             Index class_count, std::uint64_t seed, double leaky_slope) {
              return model_logits(make_network_data(c), model_shape(c, class_count), widths,
                                  leaky_slope, seed);
          },
          py::arg("compressed"), py::arg("widths"), py::arg("class_count"), py::arg("seed") = 7,
          py::arg("leaky_slope") = 0.01);

    m.def("cross_validate_json", [](const std::string& config_json) {
        return report_to_json(run_cross_validation(config_from_json_string(config_json))).dump();
    });

    m.def("train_single_json", [](const std::string& config_json) {
        return report_to_json(run_single_training(config_from_json_string(config_json))).dump();
    });

    m.def("bench_json",
          [](const std::string& config_json, double timeout_s, Index mem_cap_mb, Index epochs) {
              BenchOptions options;
              options.timeout_s = timeout_s;
              options.mem_cap_mb = mem_cap_mb;
              options.epochs = epochs;
              return report_to_json(
                         benchmark_compression(config_from_json_string(config_json), options))
                  .dump();
          },
          py::arg("config_json"), py::arg("timeout_s"), py::arg("mem_cap_mb") = 0,
          py::arg("epochs") = 1);
}
