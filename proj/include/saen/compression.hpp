#pragma once

#include <filesystem>
#include <vector>

#include "saen/dense.hpp"
#include "saen/hdecomp.hpp"
#include "saen/sparse.hpp"

namespace saen {

// Compression matrix C (m x n, entries 1/k over each equivalence class of
// size k) and decompression matrix D (n x m, one 1 per row). C is the
// pseudo-inverse of D obtained by normalizing the rows of D^T, so C*D = I
// holds exactly in rational arithmetic.
struct CompressionPair {
    SparseRational C;
    SparseInt D;
    Index class_count = 0;    // m
    Index original_count = 0; // n
    std::vector<Index> class_of;        // row -> equivalence class
    std::vector<Index> representatives; // class -> first-occurrence row

    bool is_identity() const { return class_count == original_count; }
};

// Groups identical rows of M (exact equality on the canonical sparse form);
// class representatives are ordered by first occurrence.
CompressionPair compute_cd(const SparseInt& m);

// C * M. Exact; rows within a class are identical, so the averaged rows stay
// integer. Kept as the literal matrix-form check next to the cheap
// representative-row path the compressor uses.
SparseRational compress_rows_exact(const CompressionPair& pair, const SparseInt& m);

struct CompressedDecomposition {
    std::vector<Index> level_sizes_comp;
    SparseInt x_comp;
    std::vector<std::vector<RelationMatrix>> relations_comp; // same layout as HDecomposition
    std::vector<CompressionPair> stack;                      // per level 0..L
    std::vector<MembershipAlphabet> alphabets;               // carried from the input
    std::vector<Index> top_index;                            // original S_L object -> graph id

    Index levels() const { return static_cast<Index>(level_sizes_comp.size()) - 1; }
};

// Level-by-level domain compression: collapse bottom objects with identical
// attribute rows, then at each level column-compress every relation by
// D_{l-1}, group identical rows of the stacked column-compressed matrix, and
// row-compress with C_l.
CompressedDecomposition domain_compress(const HDecomposition& h);

// D_l * H_comp: row i of the output is the compressed row of i's class.
DenseMatrix decompress_representations(const DenseMatrix& h_comp, const CompressionPair& pair);
DenseMatrix decompress_representations(const DenseMatrix& h_comp, const SparseInt& d);

struct LevelRatio {
    Index level = 0;
    Index original_size = 0;
    Index compressed_size = 0;
    double size_ratio = 1.0;
};

struct CompressionReport {
    std::vector<LevelRatio> levels;
    Index original_entries = 0;
    Index compressed_entries = 0; // x_comp + compressed relation entries
    double entry_ratio = 1.0;
    Index original_bytes = 0;   // HDEC1 encoding
    Index compressed_bytes = 0; // HDECC1 encoding
    double byte_ratio = 1.0;
};

CompressionReport compression_report(const HDecomposition& h, const CompressedDecomposition& c);

// Exact reconstruction identities (rational arithmetic); returns human-readable
// violations, empty when everything checks out.
std::vector<std::string> verify_compression_exact(const HDecomposition& h,
                                                  const CompressedDecomposition& c);

// "HDECC1" binary serialization; C and D are stored as
// (row, col, numerator, denominator) quadruples.
void save_compressed(const CompressedDecomposition& c, const std::filesystem::path& path);
CompressedDecomposition load_compressed(const std::filesystem::path& path);
Index compressed_serialized_bytes(const CompressedDecomposition& c);

} // namespace saen
