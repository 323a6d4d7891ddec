#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "saen/sparse.hpp"

namespace saen {

// Undirected graph with optional categorical node labels. Immutable after
// construction via make_graph; adjacency is prebuilt for BFS and degrees.
struct Graph {
    Index num_vertices = 0;
    std::vector<std::pair<Index, Index>> edges; // canonical (u <= v), sorted, unique
    std::vector<Index> node_labels;             // empty when the dataset carries none
    std::vector<std::vector<Index>> adjacency;

    Index degree(Index v) const { return static_cast<Index>(adjacency[v].size()); }

    bool operator==(const Graph& other) const {
        return num_vertices == other.num_vertices && edges == other.edges &&
               node_labels == other.node_labels;
    }
};

// Symmetrizes, de-duplicates and validates the edge list, then builds adjacency.
Graph make_graph(Index num_vertices, std::vector<std::pair<Index, Index>> edges,
                 std::vector<Index> node_labels = {});

struct GraphDataset {
    std::vector<Graph> graphs;
    std::vector<Index> labels; // one per graph, in [0, class_count)
    Index class_count = 0;
    Index node_label_count = 0; // size of the node-label alphabet, 0 if unlabeled
    std::string name;

    Index size() const { return static_cast<Index>(graphs.size()); }
    Index total_vertices() const;

    bool operator==(const GraphDataset& other) const {
        return graphs == other.graphs && labels == other.labels &&
               class_count == other.class_count && node_label_count == other.node_label_count &&
               name == other.name;
    }
};

// Reads the standard benchmark text format: `<name>_A.txt` (1-indexed "i, j"
// lines), `<name>_graph_indicator.txt`, `<name>_graph_labels.txt` and the
// optional `<name>_node_labels.txt`. Labels are re-mapped to 0..k-1 preserving
// the sorted order of the raw values.
GraphDataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name);

// Writes `dataset` back out in the same four-file format (used by fixtures and
// the round-trip test).
void write_tu_dataset(const GraphDataset& dataset, const std::filesystem::path& dir);

enum class AttributeMode { kDegree, kNodeLabels, kBoth };

AttributeMode attribute_mode_from_string(const std::string& s);
std::string to_string(AttributeMode mode);

// One-hot degree encoding: one row per vertex in (graph, vertex) order, column
// index = degree, width = max degree over the whole dataset + 1.
SparseInt degree_attributes(const GraphDataset& dataset);

// Attribute matrix for the configured mode; kBoth concatenates the degree
// block with a node-label one-hot block when the dataset carries labels.
SparseInt build_attributes(const GraphDataset& dataset, AttributeMode mode);

struct EgoGraph {
    Index root = 0;
    std::vector<Index> vertices;                // sorted ascending, includes root
    std::vector<std::pair<Index, Index>> edges; // induced, canonical (u <= v), sorted
};

// All vertices within BFS distance <= radius of root, plus the induced edges.
EgoGraph ego_graph(const Graph& g, Index root, Index radius);

// Vertex set of the ego graph only (what the decomposer needs per root).
std::vector<Index> ego_vertices(const Graph& g, Index root, Index radius);

} // namespace saen
