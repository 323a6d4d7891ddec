#include "saen/compression.hpp"

#include <fstream>
#include <unordered_map>

#include "saen/binio.hpp"

namespace saen {

namespace {

constexpr const char kMagic[] = "HDECC1\n";

std::uint64_t hash_row(const SparseInt& m, Index r) {
    // FNV-1a over the (col, value) stream; the sorted canonical row form makes
    // this a well-defined row fingerprint.
    std::uint64_t h = 1469598103934665603ull;
    const auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    auto cs = m.row_cols(r);
    auto vs = m.row_vals(r);
    for (std::size_t k = 0; k < cs.size(); ++k) {
        mix(static_cast<std::uint64_t>(cs[k]));
        mix(static_cast<std::uint64_t>(vs[k]));
    }
    return h;
}

} // namespace

CompressionPair compute_cd(const SparseInt& m) {
    const Index n = m.rows();
    CompressionPair pair;
    pair.original_count = n;
    pair.class_of.resize(n);

    std::unordered_map<std::uint64_t, std::vector<Index>> buckets;
    buckets.reserve(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
        auto& bucket = buckets[hash_row(m, r)];
        Index cls = -1;
        for (Index candidate : bucket) {
            // Hash collisions are confirmed by full row equality.
            if (m.rows_equal(pair.representatives[candidate], r)) {
                cls = candidate;
                break;
            }
        }
        if (cls < 0) {
            cls = static_cast<Index>(pair.representatives.size());
            pair.representatives.push_back(r);
            bucket.push_back(cls);
        }
        pair.class_of[r] = cls;
    }
    pair.class_count = static_cast<Index>(pair.representatives.size());

    std::vector<Index> class_sizes(pair.class_count, 0);
    for (Index cls : pair.class_of) class_sizes[cls]++;

    std::vector<SparseInt::Triplet> d_entries;
    std::vector<SparseRational::Triplet> c_entries;
    d_entries.reserve(n);
    c_entries.reserve(n);
    for (Index r = 0; r < n; ++r) {
        const Index cls = pair.class_of[r];
        d_entries.push_back({r, cls, 1});
        c_entries.push_back({cls, r, Rational(1, class_sizes[cls])});
    }
    pair.D = SparseInt::from_triplets(n, pair.class_count, std::move(d_entries));
    pair.C = SparseRational::from_triplets(pair.class_count, n, std::move(c_entries));
    return pair;
}

SparseRational compress_rows_exact(const CompressionPair& pair, const SparseInt& m) {
    return multiply(pair.C, m);
}

CompressedDecomposition domain_compress(const HDecomposition& h) {
    const Index levels = h.levels();
    CompressedDecomposition c;
    c.alphabets = h.alphabets;
    c.top_index = h.top_index;
    c.stack.resize(levels + 1);
    c.relations_comp.resize(levels + 1);
    c.level_sizes_comp.resize(levels + 1);

    c.stack[0] = compute_cd(h.attributes);
    c.x_comp = h.attributes.take_rows(c.stack[0].representatives);
    c.level_sizes_comp[0] = c.stack[0].class_count;

    for (Index l = 1; l <= levels; ++l) {
        const CompressionPair& prev = c.stack[l - 1];
        std::vector<SparseInt> col_comp;
        col_comp.reserve(h.relations[l].size());
        for (const auto& rel : h.relations[l])
            col_comp.push_back(rel.matrix.remap_columns(prev.class_count, prev.class_of));
        const SparseInt stacked = SparseInt::hconcat(col_comp);
        c.stack[l] = compute_cd(stacked);
        c.level_sizes_comp[l] = c.stack[l].class_count;
        for (std::size_t t = 0; t < col_comp.size(); ++t)
            c.relations_comp[l].push_back(
                {l, static_cast<Index>(t), col_comp[t].take_rows(c.stack[l].representatives)});
    }
    return c;
}

DenseMatrix decompress_representations(const DenseMatrix& h_comp, const CompressionPair& pair) {
    if (h_comp.rows() != pair.class_count)
        throw ArgumentError("decompress_representations: row count does not match class count");
    DenseMatrix out(pair.original_count, h_comp.cols());
    for (Index r = 0; r < pair.original_count; ++r) {
        auto src = h_comp.row(pair.class_of[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

DenseMatrix decompress_representations(const DenseMatrix& h_comp, const SparseInt& d) {
    if (h_comp.rows() != d.cols())
        throw ArgumentError("decompress_representations: shape mismatch");
    DenseMatrix out(d.rows(), h_comp.cols());
    for (Index r = 0; r < d.rows(); ++r) {
        auto cs = d.row_cols(r);
        auto vs = d.row_vals(r);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            auto src = h_comp.row(cs[k]);
            auto dst = out.row(r);
            for (Index j = 0; j < h_comp.cols(); ++j) dst[j] += static_cast<double>(vs[k]) * src[j];
        }
    }
    return out;
}

CompressionReport compression_report(const HDecomposition& h, const CompressedDecomposition& c) {
    if (c.levels() != h.levels())
        throw ArgumentError("compression_report: level count mismatch");
    for (Index l = 0; l <= h.levels(); ++l)
        if (c.stack[l].original_count != h.level_sizes[l])
            throw ArgumentError("compression_report: compression was not produced from this input");

    CompressionReport report;
    for (Index l = 0; l <= h.levels(); ++l) {
        LevelRatio lr;
        lr.level = l;
        lr.original_size = h.level_sizes[l];
        lr.compressed_size = c.level_sizes_comp[l];
        lr.size_ratio = lr.original_size == 0
                            ? 1.0
                            : static_cast<double>(lr.compressed_size) / lr.original_size;
        report.levels.push_back(lr);
    }

    report.original_entries = h.attributes.nnz();
    for (Index l = 1; l <= h.levels(); ++l)
        for (const auto& rel : h.relations[l]) report.original_entries += rel.matrix.nnz();
    // Stored entries cover the decomposition matrices themselves; the C/D
    // stack is accounted for by the serialized byte counts.
    report.compressed_entries = c.x_comp.nnz();
    for (Index l = 1; l <= c.levels(); ++l)
        for (const auto& rel : c.relations_comp[l]) report.compressed_entries += rel.matrix.nnz();
    report.entry_ratio = report.original_entries == 0
                             ? 1.0
                             : static_cast<double>(report.compressed_entries) /
                                   static_cast<double>(report.original_entries);

    report.original_bytes = hdecomposition_serialized_bytes(h);
    report.compressed_bytes = compressed_serialized_bytes(c);
    report.byte_ratio = static_cast<double>(report.compressed_bytes) /
                        static_cast<double>(report.original_bytes);
    return report;
}

std::vector<std::string> verify_compression_exact(const HDecomposition& h,
                                                  const CompressedDecomposition& c) {
    std::vector<std::string> violations;
    for (Index l = 0; l <= h.levels(); ++l) {
        const auto& pair = c.stack[l];
        if (multiply(pair.C, pair.D) != identity_csr<Rational>(pair.class_count))
            violations.push_back("level " + std::to_string(l) + ": C*D != I");
        for (std::int64_t v : pair.D.values())
            if (v != 1) violations.push_back("level " + std::to_string(l) + ": D entry != 1");
        for (Index r = 0; r < pair.D.rows(); ++r)
            if (pair.D.row_nnz(r) != 1)
                violations.push_back("level " + std::to_string(l) + ": D row " + std::to_string(r) +
                                     " does not have exactly one entry");
    }
    // D_0 * X^comp = X
    if (multiply(c.stack[0].D, c.x_comp) != h.attributes)
        violations.push_back("level 0: D*X^comp != X");
    // C_0 * X = X^comp
    if (multiply(c.stack[0].C, h.attributes) != c.x_comp.cast<Rational>())
        violations.push_back("level 0: C*X != X^comp");
    for (Index l = 1; l <= h.levels(); ++l) {
        for (std::size_t t = 0; t < h.relations[l].size(); ++t) {
            const SparseInt col_comp = h.relations[l][t].matrix.remap_columns(
                c.stack[l - 1].class_count, c.stack[l - 1].class_of);
            // R^comp = C_l * R * D_{l-1}
            if (multiply(c.stack[l].C, col_comp) != c.relations_comp[l][t].matrix.cast<Rational>())
                violations.push_back("level " + std::to_string(l) + " type " + std::to_string(t) +
                                     ": C*R*D != R^comp");
            // D_l * R^comp = R * D_{l-1}
            if (multiply(c.stack[l].D, c.relations_comp[l][t].matrix) != col_comp)
                violations.push_back("level " + std::to_string(l) + " type " + std::to_string(t) +
                                     ": D*R^comp != R*D");
        }
    }
    return violations;
}

namespace {

void write_csr_int(std::ostream& os, const SparseInt& m) {
    binio::write_u64(os, static_cast<std::uint64_t>(m.rows()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.cols()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.nnz()));
    for (Index v : m.row_ptr()) binio::write_i64(os, v);
    for (Index v : m.col_idx()) binio::write_i64(os, v);
    for (std::int64_t v : m.values()) binio::write_i64(os, v);
}

SparseInt read_csr_int(std::istream& is) {
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

// (row, col, numerator, denominator) quadruples.
template <typename T>
void write_quadruples(std::ostream& os, const CsrMatrix<T>& m) {
    binio::write_u64(os, static_cast<std::uint64_t>(m.rows()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.cols()));
    binio::write_u64(os, static_cast<std::uint64_t>(m.nnz()));
    for (Index r = 0; r < m.rows(); ++r) {
        auto cs = m.row_cols(r);
        auto vs = m.row_vals(r);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            binio::write_i64(os, r);
            binio::write_i64(os, cs[k]);
            if constexpr (std::is_same_v<T, Rational>) {
                binio::write_i64(os, vs[k].num);
                binio::write_i64(os, vs[k].den);
            } else {
                binio::write_i64(os, vs[k]);
                binio::write_i64(os, 1);
            }
        }
    }
}

template <typename T>
CsrMatrix<T> read_quadruples(std::istream& is) {
    const Index rows = binio::read_i64(is);
    const Index cols = binio::read_i64(is);
    const Index nnz = binio::read_i64(is);
    if (rows < 0 || cols < 0 || nnz < 0 || rows > (1ll << 31) || cols > (1ll << 31) ||
        (cols > 0 && nnz > rows * cols))
        throw FormatError("corrupt quadruple block: implausible shape");
    std::vector<typename CsrMatrix<T>::Triplet> entries;
    entries.reserve(nnz);
    for (Index k = 0; k < nnz; ++k) {
        const Index r = binio::read_i64(is);
        const Index c = binio::read_i64(is);
        const std::int64_t num = binio::read_i64(is);
        const std::int64_t den = binio::read_i64(is);
        if constexpr (std::is_same_v<T, Rational>) {
            entries.push_back({r, c, Rational(num, den)});
        } else {
            if (den != 1) throw FormatError("expected integer entry in D quadruple");
            entries.push_back({r, c, num});
        }
    }
    return CsrMatrix<T>::from_triplets(rows, cols, std::move(entries));
}

Index quadruple_bytes(Index nnz) { return 8 * (3 + 4 * nnz); }

} // namespace

Index compressed_serialized_bytes(const CompressedDecomposition& c) {
    const auto csr_bytes = [](const SparseInt& m) {
        return 8 * (3 + (m.rows() + 1) + 2 * m.nnz());
    };
    Index bytes = static_cast<Index>(sizeof(kMagic) - 1);
    bytes += 8 + 8 * static_cast<Index>(c.level_sizes_comp.size());
    bytes += csr_bytes(c.x_comp);
    for (Index l = 1; l <= c.levels(); ++l) {
        bytes += 8;
        for (const auto& rel : c.relations_comp[l]) {
            bytes += 8 + static_cast<Index>(c.alphabets[l].types[rel.mtype].size());
            bytes += csr_bytes(rel.matrix);
        }
    }
    for (const auto& pair : c.stack)
        bytes += quadruple_bytes(pair.C.nnz()) + quadruple_bytes(pair.D.nnz());
    bytes += 8 + 8 * static_cast<Index>(c.top_index.size());
    return bytes;
}

void save_compressed(const CompressedDecomposition& c, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    binio::write_magic(os, kMagic);
    binio::write_u64(os, c.level_sizes_comp.size());
    for (Index v : c.level_sizes_comp) binio::write_i64(os, v);
    write_csr_int(os, c.x_comp);
    for (Index l = 1; l <= c.levels(); ++l) {
        binio::write_u64(os, c.relations_comp[l].size());
        for (const auto& rel : c.relations_comp[l]) {
            binio::write_string(os, c.alphabets[l].types[rel.mtype]);
            write_csr_int(os, rel.matrix);
        }
    }
    for (const auto& pair : c.stack) {
        write_quadruples(os, pair.C);
        write_quadruples(os, pair.D);
    }
    binio::write_u64(os, c.top_index.size());
    for (Index v : c.top_index) binio::write_i64(os, v);
    if (!os) throw IngestError("failed writing " + path.string());
}

namespace {

CompressedDecomposition load_compressed_impl(std::istream& is) {
    CompressedDecomposition c;
    const Index lcount = binio::read_i64(is);
    if (lcount < 1 || lcount > 1024) throw FormatError("corrupt file: implausible level count");
    c.level_sizes_comp.resize(lcount);
    for (auto& v : c.level_sizes_comp) v = binio::read_i64(is);
    c.x_comp = read_csr_int(is);
    c.alphabets.resize(lcount);
    c.alphabets[0] = {0, {"atom"}};
    c.relations_comp.resize(lcount);
    for (Index l = 1; l < lcount; ++l) {
        const Index ntypes = binio::read_i64(is);
        if (ntypes < 1 || ntypes > (1 << 20))
            throw FormatError("corrupt file: implausible type count");
        c.alphabets[l].level = l;
        for (Index t = 0; t < ntypes; ++t) {
            c.alphabets[l].types.push_back(binio::read_string(is));
            c.relations_comp[l].push_back({l, t, read_csr_int(is)});
        }
    }
    c.stack.resize(lcount);
    for (auto& pair : c.stack) {
        pair.C = read_quadruples<Rational>(is);
        pair.D = read_quadruples<std::int64_t>(is);
        pair.class_count = pair.C.rows();
        pair.original_count = pair.C.cols();
        pair.class_of.assign(pair.original_count, -1);
        for (Index r = 0; r < pair.D.rows(); ++r) {
            if (pair.D.row_nnz(r) != 1) throw FormatError("corrupt D matrix: row must have one entry");
            pair.class_of[r] = pair.D.row_cols(r)[0];
        }
        pair.representatives.assign(pair.class_count, -1);
        for (Index r = pair.original_count - 1; r >= 0; --r)
            pair.representatives[pair.class_of[r]] = r;
    }
    const Index top = binio::read_i64(is);
    if (top < 0 || top > (1ll << 31)) throw FormatError("corrupt file: implausible top size");
    c.top_index.resize(top);
    for (auto& v : c.top_index) v = binio::read_i64(is);
    return c;
}

} // namespace

CompressedDecomposition load_compressed(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IngestError("cannot open: " + path.string());
    binio::expect_magic(is, kMagic);
    try {
        return load_compressed_impl(is);
    } catch (const ArgumentError& e) {
        throw FormatError("corrupt compressed file " + path.string() + ": " + e.what());
    }
}

} // namespace saen
