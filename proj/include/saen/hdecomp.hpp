#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "saen/graph.hpp"
#include "saen/sparse.hpp"

namespace saen {

// Ordered membership-type ids for one level. n(0) = 1 by construction.
struct MembershipAlphabet {
    Index level = 0;
    std::vector<std::string> types;

    Index size() const { return static_cast<Index>(types.size()); }

    bool operator==(const MembershipAlphabet&) const = default;
};

// Part-of relation for one (level, membership type): |S_l| x |S_{l-1}|.
// Entries are 0/1 before compression and integer part counts after column
// compression.
struct RelationMatrix {
    Index level = 0;
    Index mtype = 0; // index into the level's alphabet
    SparseInt matrix;

    bool operator==(const RelationMatrix&) const = default;
};

// Hierarchy of disjoint object levels S_0..S_L with per-type part-of relations
// between consecutive levels and a categorical attribute matrix on S_0.
struct HDecomposition {
    std::vector<Index> level_sizes;                     // |S_0| .. |S_L|
    std::vector<MembershipAlphabet> alphabets;          // one per level; [0] is the atom singleton
    std::vector<std::vector<RelationMatrix>> relations; // relations[l], l >= 1; relations[0] empty
    SparseInt attributes;                               // |S_0| x p
    std::vector<Index> top_index;                       // S_L object -> dataset graph id

    Index levels() const { return static_cast<Index>(level_sizes.size()) - 1; }
    Index type_count(Index level) const { return alphabets[level].size(); }

    bool operator==(const HDecomposition&) const = default;
};

// The EGNN decomposition: S_0 = vertices, S_1 = ego graphs per
// (graph, root, radius) with part-of alphabet {root, elem}, S_2 = graphs with
// the radii as alphabet. Ego objects are ordered (graph, root, radius).
HDecomposition egnn_decompose(const GraphDataset& dataset, const SparseInt& attributes,
                              const std::vector<Index>& radii);

struct Violation {
    Index level = 0;
    Index object = -1; // -1 when the violation is not tied to one object
    std::string message;
};

// Checks every structural invariant; violations are returned as data.
std::vector<Violation> validate_decomposition(const HDecomposition& h);

struct RelationStats {
    Index level = 0;
    std::string mtype;
    Index nnz = 0;
};

struct DecompositionStats {
    std::vector<Index> level_sizes;
    std::vector<RelationStats> relations;
    Index attribute_nnz = 0;
    Index total_entries = 0;   // attribute nnz + relation nnz
    Index serialized_bytes = 0; // exact size of the HDEC1 encoding
};

DecompositionStats decomposition_stats(const HDecomposition& h);

// "HDEC1" binary serialization.
void save_hdecomposition(const HDecomposition& h, const std::filesystem::path& path);
HDecomposition load_hdecomposition(const std::filesystem::path& path);
Index hdecomposition_serialized_bytes(const HDecomposition& h);

} // namespace saen
