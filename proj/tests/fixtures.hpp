#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "saen/compression.hpp"
#include "saen/graph.hpp"
#include "saen/hdecomp.hpp"

namespace saen::testing {

inline Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

inline Graph path(Index n) {
    std::vector<std::pair<Index, Index>> edges;
    for (Index v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return make_graph(n, std::move(edges));
}

inline Graph star(Index leaves) {
    std::vector<std::pair<Index, Index>> edges;
    for (Index v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
    return make_graph(leaves + 1, std::move(edges));
}

inline GraphDataset single_graph_dataset(Graph g, std::string name = "single") {
    GraphDataset ds;
    ds.graphs.push_back(std::move(g));
    ds.labels = {0};
    ds.class_count = 2; // keep a 2-class head even for one example
    ds.name = std::move(name);
    return ds;
}

// 20 separable graphs: triangles (label 0) vs paths (label 1).
inline GraphDataset toy_triangles_vs_paths(Index count = 20) {
    GraphDataset ds;
    ds.name = "toy";
    ds.class_count = 2;
    for (Index i = 0; i < count; ++i) {
        if (i % 2 == 0) {
            ds.graphs.push_back(triangle());
            ds.labels.push_back(0);
        } else {
            ds.graphs.push_back(path(3 + (i / 2) % 4));
            ds.labels.push_back(1);
        }
    }
    return ds;
}

inline Graph random_graph(std::mt19937_64& rng, Index max_vertices = 20) {
    std::uniform_int_distribution<Index> size_dist(2, max_vertices);
    const Index n = size_dist(rng);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> density(0.15, 0.6);
    const double p = density(rng);
    std::vector<std::pair<Index, Index>> edges;
    for (Index u = 0; u < n; ++u)
        for (Index v = u + 1; v < n; ++v)
            if (coin(rng) < p) edges.emplace_back(u, v);
    return make_graph(n, std::move(edges));
}

inline GraphDataset random_dataset(std::mt19937_64& rng, Index graphs, Index max_vertices = 20) {
    GraphDataset ds;
    ds.name = "random";
    ds.class_count = 2;
    for (Index i = 0; i < graphs; ++i) {
        ds.graphs.push_back(random_graph(rng, max_vertices));
        ds.labels.push_back(i % 2);
    }
    return ds;
}

inline HDecomposition decompose_with_degrees(const GraphDataset& ds,
                                             const std::vector<Index>& radii) {
    return egnn_decompose(ds, degree_attributes(ds), radii);
}

// Dataset whose objects stay pairwise distinct under compression: every
// vertex carries its own node label, so nothing collapses at any level
// (radius 0).
inline GraphDataset all_distinct_dataset() {
    GraphDataset ds;
    ds.name = "distinct";
    ds.class_count = 2;
    ds.graphs.push_back(make_graph(3, {{0, 1}, {1, 2}}, {0, 1, 2}));
    ds.graphs.push_back(make_graph(3, {{0, 1}, {0, 2}}, {3, 4, 5}));
    ds.labels = {0, 1};
    ds.node_label_count = 6;
    return ds;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto dir = std::filesystem::temp_directory_path() /
                     ("saen_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace saen::testing
