#include "saen/graph.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

namespace saen {

namespace {

std::string loc(const std::filesystem::path& file, std::size_t line) {
    return file.filename().string() + ":" + std::to_string(line);
}

// Reads one integer per line; tolerates CRLF and surrounding blanks.
std::vector<Index> read_int_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IngestError("missing input file: " + file.string());
    std::vector<Index> out;
    std::string row;
    std::size_t line_no = 0;
    while (std::getline(in, row)) {
        ++line_no;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        std::size_t a = row.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        std::size_t b = row.find_last_not_of(" \t");
        try {
            std::size_t used = 0;
            Index v = std::stoll(row.substr(a, b - a + 1), &used);
            if (used != b - a + 1) throw std::invalid_argument("trailing junk");
            out.push_back(v);
        } catch (const std::exception&) {
            throw FormatError("expected an integer at " + loc(file, line_no) + ": '" + row + "'");
        }
    }
    return out;
}

std::vector<std::pair<Index, Index>> read_edge_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IngestError("missing input file: " + file.string());
    std::vector<std::pair<Index, Index>> out;
    std::string row;
    std::size_t line_no = 0;
    while (std::getline(in, row)) {
        ++line_no;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (row.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream ss(row);
        Index i = 0, j = 0;
        char comma = 0;
        if (!(ss >> i >> comma >> j) || comma != ',')
            throw FormatError("expected 'i, j' at " + loc(file, line_no) + ": '" + row + "'");
        std::string rest;
        if (ss >> rest)
            throw FormatError("trailing data at " + loc(file, line_no) + ": '" + row + "'");
        out.emplace_back(i, j);
    }
    return out;
}

// Sorted-unique raw values -> contiguous ids starting at 0.
std::map<Index, Index> remap_sorted(const std::vector<Index>& raw) {
    std::map<Index, Index> m;
    for (Index v : raw) m.emplace(v, 0);
    Index next = 0;
    for (auto& [_, id] : m) id = next++;
    return m;
}

} // namespace

Graph make_graph(Index num_vertices, std::vector<std::pair<Index, Index>> edges,
                 std::vector<Index> node_labels) {
    Graph g;
    g.num_vertices = num_vertices;
    if (!node_labels.empty() && static_cast<Index>(node_labels.size()) != num_vertices)
        throw ArgumentError("make_graph: node label count does not match vertex count");
    g.node_labels = std::move(node_labels);
    for (auto& [u, v] : edges) {
        if (u < 0 || u >= num_vertices || v < 0 || v >= num_vertices)
            throw ArgumentError("make_graph: edge endpoint out of range");
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    g.adjacency.assign(num_vertices, {});
    for (auto [u, v] : g.edges) {
        g.adjacency[u].push_back(v);
        if (u != v) g.adjacency[v].push_back(u);
    }
    for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

Index GraphDataset::total_vertices() const {
    Index n = 0;
    for (const auto& g : graphs) n += g.num_vertices;
    return n;
}

GraphDataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
    const auto a_file = dir / (name + "_A.txt");
    const auto ind_file = dir / (name + "_graph_indicator.txt");
    const auto glab_file = dir / (name + "_graph_labels.txt");
    const auto nlab_file = dir / (name + "_node_labels.txt");

    const auto raw_graph_labels = read_int_lines(glab_file);
    const auto indicator = read_int_lines(ind_file);
    const auto raw_edges = read_edge_lines(a_file);

    const Index graph_count = static_cast<Index>(raw_graph_labels.size());
    const Index vertex_count = static_cast<Index>(indicator.size());

    // Global 1-indexed vertex id -> (graph, local id); locals are assigned in
    // global order within each graph.
    std::vector<Index> graph_of(vertex_count);
    std::vector<Index> local_of(vertex_count);
    std::vector<Index> sizes(graph_count, 0);
    for (Index k = 0; k < vertex_count; ++k) {
        const Index gid = indicator[k];
        if (gid < 1 || gid > graph_count)
            throw FormatError("graph indicator out of range at " + loc(ind_file, k + 1) + ": " +
                              std::to_string(gid));
        graph_of[k] = gid - 1;
        local_of[k] = sizes[gid - 1]++;
    }

    std::vector<std::vector<std::pair<Index, Index>>> edges_per_graph(graph_count);
    for (std::size_t e = 0; e < raw_edges.size(); ++e) {
        const auto [i, j] = raw_edges[e];
        if (i < 1 || i > vertex_count || j < 1 || j > vertex_count)
            throw FormatError("vertex id out of range at " + loc(a_file, e + 1) + ": " +
                              std::to_string(i) + ", " + std::to_string(j));
        if (graph_of[i - 1] != graph_of[j - 1])
            throw FormatError("edge crosses two graphs at " + loc(a_file, e + 1) + ": " +
                              std::to_string(i) + ", " + std::to_string(j));
        edges_per_graph[graph_of[i - 1]].emplace_back(local_of[i - 1], local_of[j - 1]);
    }

    std::vector<std::vector<Index>> labels_per_graph(graph_count);
    Index node_label_count = 0;
    if (std::filesystem::exists(nlab_file)) {
        const auto raw_node_labels = read_int_lines(nlab_file);
        if (static_cast<Index>(raw_node_labels.size()) != vertex_count)
            throw FormatError(nlab_file.filename().string() + " has " +
                              std::to_string(raw_node_labels.size()) + " lines, expected " +
                              std::to_string(vertex_count));
        const auto remap = remap_sorted(raw_node_labels);
        node_label_count = static_cast<Index>(remap.size());
        for (Index g = 0; g < graph_count; ++g) labels_per_graph[g].resize(sizes[g]);
        for (Index k = 0; k < vertex_count; ++k)
            labels_per_graph[graph_of[k]][local_of[k]] = remap.at(raw_node_labels[k]);
    }

    GraphDataset ds;
    ds.name = name;
    ds.node_label_count = node_label_count;
    const auto label_remap = remap_sorted(raw_graph_labels);
    ds.class_count = static_cast<Index>(label_remap.size());
    ds.labels.reserve(graph_count);
    for (Index v : raw_graph_labels) ds.labels.push_back(label_remap.at(v));
    ds.graphs.reserve(graph_count);
    for (Index g = 0; g < graph_count; ++g)
        ds.graphs.push_back(
            make_graph(sizes[g], std::move(edges_per_graph[g]), std::move(labels_per_graph[g])));
    return ds;
}

void write_tu_dataset(const GraphDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& name = dataset.name;
    std::ofstream a(dir / (name + "_A.txt"));
    std::ofstream ind(dir / (name + "_graph_indicator.txt"));
    std::ofstream glab(dir / (name + "_graph_labels.txt"));
    std::ofstream nlab;
    if (dataset.node_label_count > 0) nlab.open(dir / (name + "_node_labels.txt"));
    Index offset = 1;
    for (Index g = 0; g < dataset.size(); ++g) {
        const Graph& graph = dataset.graphs[g];
        glab << dataset.labels[g] << "\n";
        for (Index v = 0; v < graph.num_vertices; ++v) {
            ind << g + 1 << "\n";
            if (dataset.node_label_count > 0) nlab << graph.node_labels[v] << "\n";
        }
        for (auto [u, v] : graph.edges) a << offset + u << ", " << offset + v << "\n";
        offset += graph.num_vertices;
    }
    if (!a || !ind || !glab) throw IngestError("failed writing dataset files to " + dir.string());
}

AttributeMode attribute_mode_from_string(const std::string& s) {
    if (s == "degree") return AttributeMode::kDegree;
    if (s == "node-labels") return AttributeMode::kNodeLabels;
    if (s == "both") return AttributeMode::kBoth;
    throw ValidationError("unknown attribute mode: '" + s + "' (expected degree|node-labels|both)");
}

std::string to_string(AttributeMode mode) {
    switch (mode) {
    case AttributeMode::kDegree: return "degree";
    case AttributeMode::kNodeLabels: return "node-labels";
    case AttributeMode::kBoth: return "both";
    }
    return "degree";
}

SparseInt degree_attributes(const GraphDataset& dataset) {
    if (dataset.graphs.empty()) throw ArgumentError("degree_attributes: empty dataset");
    Index max_degree = 0;
    for (const auto& g : dataset.graphs)
        for (Index v = 0; v < g.num_vertices; ++v) max_degree = std::max(max_degree, g.degree(v));
    std::vector<SparseInt::Triplet> entries;
    entries.reserve(dataset.total_vertices());
    Index row = 0;
    for (const auto& g : dataset.graphs)
        for (Index v = 0; v < g.num_vertices; ++v) entries.push_back({row++, g.degree(v), 1});
    return SparseInt::from_triplets(row, max_degree + 1, std::move(entries));
}

SparseInt build_attributes(const GraphDataset& dataset, AttributeMode mode) {
    const bool has_labels = dataset.node_label_count > 0;
    if (mode == AttributeMode::kNodeLabels && !has_labels)
        throw ArgumentError("attribute mode 'node-labels' but dataset has no node labels");
    if (mode == AttributeMode::kDegree || (mode == AttributeMode::kBoth && !has_labels))
        return degree_attributes(dataset);

    std::vector<SparseInt::Triplet> entries;
    Index row = 0;
    for (const auto& g : dataset.graphs)
        for (Index v = 0; v < g.num_vertices; ++v) entries.push_back({row++, g.node_labels[v], 1});
    SparseInt labels = SparseInt::from_triplets(row, dataset.node_label_count, std::move(entries));
    if (mode == AttributeMode::kNodeLabels) return labels;
    const std::array mats{degree_attributes(dataset), std::move(labels)};
    return SparseInt::hconcat(mats);
}

std::vector<Index> ego_vertices(const Graph& g, Index root, Index radius) {
    if (root < 0 || root >= g.num_vertices) throw ArgumentError("ego_graph: root out of range");
    if (radius < 0) throw ArgumentError("ego_graph: negative radius");
    std::vector<Index> dist(g.num_vertices, -1);
    std::vector<Index> members;
    std::queue<Index> frontier;
    dist[root] = 0;
    frontier.push(root);
    members.push_back(root);
    while (!frontier.empty()) {
        const Index u = frontier.front();
        frontier.pop();
        if (dist[u] == radius) continue;
        for (Index w : g.adjacency[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                members.push_back(w);
                frontier.push(w);
            }
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

EgoGraph ego_graph(const Graph& g, Index root, Index radius) {
    EgoGraph ego;
    ego.root = root;
    ego.vertices = ego_vertices(g, root, radius);
    std::vector<char> member(g.num_vertices, 0);
    for (Index v : ego.vertices) member[v] = 1;
    for (Index u : ego.vertices)
        for (Index w : g.adjacency[u])
            if (member[w] && u <= w) ego.edges.emplace_back(u, w);
    std::sort(ego.edges.begin(), ego.edges.end());
    return ego;
}

} // namespace saen
