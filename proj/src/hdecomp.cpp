#include "saen/hdecomp.hpp"

#include <algorithm>
#include <fstream>

#include "saen/binio.hpp"

namespace saen {

namespace {
constexpr const char kMagic[] = "HDEC1\n";
} // namespace

HDecomposition egnn_decompose(const GraphDataset& dataset, const SparseInt& attributes,
                              const std::vector<Index>& radii) {
    if (radii.empty()) throw ArgumentError("egnn_decompose: radii list is empty");
    if (!std::is_sorted(radii.begin(), radii.end()) ||
        std::adjacent_find(radii.begin(), radii.end()) != radii.end())
        throw ArgumentError("egnn_decompose: radii must be strictly ascending");
    if (radii.front() < 0) throw ArgumentError("egnn_decompose: negative radius");
    if (attributes.rows() != dataset.total_vertices())
        throw ArgumentError("egnn_decompose: attribute rows do not match vertex count");

    const Index radius_count = static_cast<Index>(radii.size());
    const Index max_radius = radii.back();
    const Index vertex_count = dataset.total_vertices();
    const Index graph_count = dataset.size();
    const Index ego_count = vertex_count * radius_count;

    std::vector<SparseInt::Triplet> root_entries;
    std::vector<SparseInt::Triplet> elem_entries;
    std::vector<std::vector<SparseInt::Triplet>> top_entries(radius_count);
    root_entries.reserve(ego_count);

    Index vertex_offset = 0;
    Index ego_index = 0;
    std::vector<Index> dist;
    std::vector<Index> order;
    for (Index g = 0; g < graph_count; ++g) {
        const Graph& graph = dataset.graphs[g];
        for (Index root = 0; root < graph.num_vertices; ++root) {
            // One BFS per root up to the largest radius; each configured
            // radius then reads off its distance-bounded prefix.
            dist.assign(graph.num_vertices, -1);
            order.clear();
            dist[root] = 0;
            order.push_back(root);
            for (std::size_t head = 0; head < order.size(); ++head) {
                const Index u = order[head];
                if (dist[u] == max_radius) continue;
                for (Index w : graph.adjacency[u])
                    if (dist[w] < 0) {
                        dist[w] = dist[u] + 1;
                        order.push_back(w);
                    }
            }
            for (Index ri = 0; ri < radius_count; ++ri) {
                const Index r = radii[ri];
                root_entries.push_back({ego_index, vertex_offset + root, 1});
                for (Index u : order)
                    if (u != root && dist[u] <= r)
                        elem_entries.push_back({ego_index, vertex_offset + u, 1});
                top_entries[ri].push_back({g, ego_index, 1});
                ++ego_index;
            }
        }
        vertex_offset += graph.num_vertices;
    }

    HDecomposition h;
    h.level_sizes = {vertex_count, ego_count, graph_count};
    h.alphabets.resize(3);
    h.alphabets[0] = {0, {"atom"}};
    h.alphabets[1] = {1, {"root", "elem"}};
    h.alphabets[2].level = 2;
    for (Index r : radii) h.alphabets[2].types.push_back("r" + std::to_string(r));
    h.relations.resize(3);
    h.relations[1].push_back(
        {1, 0, SparseInt::from_triplets(ego_count, vertex_count, std::move(root_entries))});
    h.relations[1].push_back(
        {1, 1, SparseInt::from_triplets(ego_count, vertex_count, std::move(elem_entries))});
    for (Index ri = 0; ri < radius_count; ++ri)
        h.relations[2].push_back(
            {2, ri, SparseInt::from_triplets(graph_count, ego_count, std::move(top_entries[ri]))});
    h.attributes = attributes;
    h.top_index.resize(graph_count);
    for (Index g = 0; g < graph_count; ++g) h.top_index[g] = g;
    return h;
}

std::vector<Violation> validate_decomposition(const HDecomposition& h) {
    std::vector<Violation> out;
    const Index lcount = static_cast<Index>(h.level_sizes.size());
    if (lcount == 0) {
        out.push_back({0, -1, "no levels"});
        return out;
    }
    if (static_cast<Index>(h.alphabets.size()) != lcount)
        out.push_back({0, -1, "alphabet count does not match level count"});
    if (static_cast<Index>(h.relations.size()) != lcount)
        out.push_back({0, -1, "relation level count does not match level count"});
    if (h.attributes.rows() != h.level_sizes[0])
        out.push_back({0, -1, "attribute row count does not match |S_0|"});
    if (!h.alphabets.empty() && h.alphabets[0].size() != 1)
        out.push_back({0, -1, "bottom alphabet size must be 1"});
    if (static_cast<Index>(h.top_index.size()) != h.level_sizes.back())
        out.push_back({lcount - 1, -1, "top_index size does not match |S_L|"});

    for (Index l = 1; l < std::min(lcount, static_cast<Index>(h.relations.size())); ++l) {
        const auto& rels = h.relations[l];
        if (rels.empty()) {
            out.push_back({l, -1, "level has no relation matrices"});
            continue;
        }
        if (l < static_cast<Index>(h.alphabets.size()) &&
            static_cast<Index>(rels.size()) != h.alphabets[l].size())
            out.push_back({l, -1, "relation count does not match alphabet size"});
        bool shapes_ok = true;
        for (const auto& rel : rels) {
            if (rel.matrix.rows() != h.level_sizes[l]) {
                out.push_back({l, rel.mtype, "relation row count does not match |S_l|"});
                shapes_ok = false;
            }
            if (rel.matrix.cols() != h.level_sizes[l - 1]) {
                out.push_back({l, rel.mtype, "relation column count does not match |S_{l-1}|"});
                shapes_ok = false;
            }
            for (std::int64_t v : rel.matrix.values())
                if (v != 0 && v != 1) {
                    out.push_back({l, rel.mtype, "relation entries must be 0/1 before compression"});
                    break;
                }
        }
        if (!shapes_ok) continue;
        for (Index s = 0; s < h.level_sizes[l]; ++s) {
            Index parts = 0;
            for (const auto& rel : rels) parts += rel.matrix.row_nnz(s);
            if (parts == 0) out.push_back({l, s, "object has no parts"});
        }
    }
    return out;
}

Index hdecomposition_serialized_bytes(const HDecomposition& h) {
    const auto csr_bytes = [](const SparseInt& m) {
        return 8 * (3 + (m.rows() + 1) + 2 * m.nnz());
    };
    Index bytes = static_cast<Index>(sizeof(kMagic) - 1);
    bytes += 8 + 8 * static_cast<Index>(h.level_sizes.size());
    bytes += csr_bytes(h.attributes);
    for (Index l = 1; l <= h.levels(); ++l) {
        bytes += 8;
        for (const auto& rel : h.relations[l]) {
            bytes += 8 + static_cast<Index>(h.alphabets[l].types[rel.mtype].size());
            bytes += csr_bytes(rel.matrix);
        }
    }
    bytes += 8 + 8 * static_cast<Index>(h.top_index.size());
    return bytes;
}

DecompositionStats decomposition_stats(const HDecomposition& h) {
    DecompositionStats stats;
    stats.level_sizes = h.level_sizes;
    stats.attribute_nnz = h.attributes.nnz();
    stats.total_entries = stats.attribute_nnz;
    for (Index l = 1; l <= h.levels(); ++l)
        for (const auto& rel : h.relations[l]) {
            stats.relations.push_back({l, h.alphabets[l].types[rel.mtype], rel.matrix.nnz()});
            stats.total_entries += rel.matrix.nnz();
        }
    stats.serialized_bytes = hdecomposition_serialized_bytes(h);
    return stats;
}

namespace {

void write_csr(std::ostream& os, const SparseInt& m) {
    binio::write_u64(os, static_cast<std::uint64_t>(m.rows()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.cols()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.nnz()));
    for (Index v : m.row_ptr()) binio::write_i64(os, v);
    for (Index v : m.col_idx()) binio::write_i64(os, v);
    for (std::int64_t v : m.values()) binio::write_i64(os, v);
}

SparseInt read_csr(std::istream& is) {
    const Index rows = binio::read_i64(is);
    const Index cols = binio::read_i64(is);
    const Index nnz = binio::read_i64(is);
    if (rows < 0 || cols < 0 || nnz < 0 || rows > (1ll << 31) || cols > (1ll << 31) ||
        (cols > 0 && nnz > rows * cols))
        throw FormatError("corrupt CSR block: implausible shape");
    std::vector<Index> row_ptr(rows + 1);
    for (auto& v : row_ptr) v = binio::read_i64(is);
    std::vector<SparseInt::Triplet> entries(nnz);
    for (auto& e : entries) e.col = binio::read_i64(is);
    Index k = 0;
    for (Index r = 0; r < rows; ++r)
        for (Index p = row_ptr[r]; p < row_ptr[r + 1]; ++p) entries[k++].row = r;
    for (auto& e : entries) e.value = binio::read_i64(is);
    if (k != nnz) throw FormatError("corrupt CSR block: row pointers do not sum to nnz");
    return SparseInt::from_triplets(rows, cols, std::move(entries));
}

} // namespace

void save_hdecomposition(const HDecomposition& h, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    binio::write_magic(os, kMagic);
    binio::write_u64(os, h.level_sizes.size());
    for (Index v : h.level_sizes) binio::write_i64(os, v);
    write_csr(os, h.attributes);
    for (Index l = 1; l <= h.levels(); ++l) {
        binio::write_u64(os, h.relations[l].size());
        for (const auto& rel : h.relations[l]) {
            binio::write_string(os, h.alphabets[l].types[rel.mtype]);
            write_csr(os, rel.matrix);
        }
    }
    binio::write_u64(os, h.top_index.size());
    for (Index v : h.top_index) binio::write_i64(os, v);
    if (!os) throw IngestError("failed writing " + path.string());
}

namespace {

HDecomposition load_hdecomposition_impl(std::istream& is) {
    HDecomposition h;
    const Index lcount = binio::read_i64(is);
    if (lcount < 1 || lcount > 1024) throw FormatError("corrupt file: implausible level count");
    h.level_sizes.resize(lcount);
    for (auto& v : h.level_sizes) v = binio::read_i64(is);
    h.attributes = read_csr(is);
    h.alphabets.resize(lcount);
    h.alphabets[0] = {0, {"atom"}};
    h.relations.resize(lcount);
    for (Index l = 1; l < lcount; ++l) {
        const Index ntypes = binio::read_i64(is);
        if (ntypes < 1 || ntypes > (1 << 20))
            throw FormatError("corrupt file: implausible type count");
        h.alphabets[l].level = l;
        for (Index t = 0; t < ntypes; ++t) {
            h.alphabets[l].types.push_back(binio::read_string(is));
            h.relations[l].push_back({l, t, read_csr(is)});
        }
    }
    const Index top = binio::read_i64(is);
    if (top < 0 || top > (1ll << 31)) throw FormatError("corrupt file: implausible top size");
    h.top_index.resize(top);
    for (auto& v : h.top_index) v = binio::read_i64(is);
    return h;
}

} // namespace

HDecomposition load_hdecomposition(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IngestError("cannot open: " + path.string());
    binio::expect_magic(is, kMagic);
    try {
        return load_hdecomposition_impl(is);
    } catch (const ArgumentError& e) {
        throw FormatError("corrupt decomposition file " + path.string() + ": " + e.what());
    }
}

} // namespace saen
