#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "saen/hdecomp.hpp"

using namespace saen;
using namespace saen::testing;

TEST_SUITE_BEGIN("hdecomp");

namespace {

const SparseInt& relation(const HDecomposition& h, Index level, Index mtype) {
    return h.relations[level][mtype].matrix;
}

} // namespace

TEST_CASE("triangle with radii {0}: shapes and part counts") {
    const auto h = decompose_with_degrees(single_graph_dataset(triangle()), {0});
    CHECK(h.level_sizes == std::vector<Index>{3, 3, 1});
    CHECK(h.alphabets[1].types == std::vector<std::string>{"root", "elem"});
    CHECK(h.alphabets[2].types == std::vector<std::string>{"r0"});
    // each radius-0 ego graph has exactly one root part and no elem parts
    for (Index e = 0; e < 3; ++e) {
        CHECK(relation(h, 1, 0).row_nnz(e) == 1);
        CHECK(relation(h, 1, 1).row_nnz(e) == 0);
    }
    // R_{2,0} is one row of three ones
    CHECK(relation(h, 2, 0).row_nnz(0) == 3);
    for (std::int64_t v : relation(h, 2, 0).values()) CHECK(v == 1);
    CHECK(h.top_index == std::vector<Index>{0});
}

TEST_CASE("triangle with radii {0,1}: six egos, radius-1 egos have two elems") {
    const auto h = decompose_with_degrees(single_graph_dataset(triangle()), {0, 1});
    CHECK(h.level_sizes == std::vector<Index>{3, 6, 1});
    // Objects are ordered (root, radius): even rows are r=0 egos, odd rows r=1.
    for (Index e = 0; e < 6; ++e) {
        CHECK(relation(h, 1, 0).row_nnz(e) == 1);
        const auto members = ego_vertices_oracle(triangle(), e / 2, e % 2);
        CHECK(relation(h, 1, 1).row_nnz(e) == static_cast<Index>(members.size()) - 1);
    }
}

TEST_CASE("ego memberships match the brute-force oracle on P5 and random graphs") {
    std::mt19937_64 rng(23);
    std::vector<GraphDataset> cases;
    cases.push_back(single_graph_dataset(path(5)));
    for (int i = 0; i < 8; ++i) cases.push_back(random_dataset(rng, 2, 12));
    for (const auto& ds : cases) {
        const std::vector<Index> radii{0, 1};
        const auto h = decompose_with_degrees(ds, radii);
        Index offset = 0;
        Index ego = 0;
        for (Index g = 0; g < ds.size(); ++g) {
            const Graph& graph = ds.graphs[g];
            for (Index root = 0; root < graph.num_vertices; ++root) {
                for (std::size_t ri = 0; ri < radii.size(); ++ri, ++ego) {
                    const auto members = ego_vertices_oracle(graph, root, radii[ri]);
                    REQUIRE(relation(h, 1, 0).row_nnz(ego) == 1);
                    CHECK(relation(h, 1, 0).row_cols(ego)[0] == offset + root);
                    std::vector<Index> elems;
                    for (Index m : members)
                        if (m != root) elems.push_back(offset + m);
                    const auto got = relation(h, 1, 1).row_cols(ego);
                    CHECK(std::vector<Index>(got.begin(), got.end()) == elems);
                }
            }
            offset += graph.num_vertices;
        }
    }
}

TEST_CASE("row and column sum invariants") {
    std::mt19937_64 rng(29);
    const GraphDataset ds = random_dataset(rng, 4, 15);
    const std::vector<Index> radii{0, 1, 2};
    const auto h = decompose_with_degrees(ds, radii);
    const auto& root_rel = relation(h, 1, 0);

    // every ego graph has exactly one root
    for (Index e = 0; e < h.level_sizes[1]; ++e) CHECK(root_rel.row_nnz(e) == 1);

    // each vertex roots at most |radii| ego graphs
    std::vector<Index> col_sums(h.level_sizes[0], 0);
    for (Index e = 0; e < root_rel.rows(); ++e)
        for (Index c : root_rel.row_cols(e)) col_sums[c]++;
    for (Index s : col_sums) CHECK(s == static_cast<Index>(radii.size()));

    // each row of R_{2,r} sums to the graph's vertex count
    for (std::size_t ri = 0; ri < radii.size(); ++ri)
        for (Index g = 0; g < ds.size(); ++g)
            CHECK(relation(h, 2, static_cast<Index>(ri)).row_nnz(g) ==
                  ds.graphs[g].num_vertices);
}

TEST_CASE("decomposition is equivariant under vertex relabeling") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const GraphDataset ds = random_dataset(rng, 1, 12);
        const Graph& g = ds.graphs[0];
        std::vector<Index> perm(g.num_vertices);
        for (Index v = 0; v < g.num_vertices; ++v) perm[v] = v;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::pair<Index, Index>> mapped;
        for (auto [u, v] : g.edges) mapped.emplace_back(perm[u], perm[v]);
        GraphDataset permuted = ds;
        permuted.graphs[0] = make_graph(g.num_vertices, std::move(mapped));

        const auto ha = decompose_with_degrees(ds, {0, 1});
        const auto hb = decompose_with_degrees(permuted, {0, 1});
        CHECK(ha.level_sizes == hb.level_sizes);
        const auto row_sums = [](const SparseInt& m) {
            std::vector<Index> out;
            for (Index r = 0; r < m.rows(); ++r) out.push_back(m.row_nnz(r));
            std::sort(out.begin(), out.end());
            return out;
        };
        const auto col_sums = [](const SparseInt& m) {
            std::vector<Index> out(m.cols(), 0);
            for (Index r = 0; r < m.rows(); ++r)
                for (Index c : m.row_cols(r)) out[c]++;
            std::sort(out.begin(), out.end());
            return out;
        };
        for (Index l = 1; l <= 2; ++l)
            for (std::size_t t = 0; t < ha.relations[l].size(); ++t) {
                CHECK(row_sums(ha.relations[l][t].matrix) == row_sums(hb.relations[l][t].matrix));
                CHECK(col_sums(ha.relations[l][t].matrix) == col_sums(hb.relations[l][t].matrix));
            }
    }
}

TEST_CASE("egnn_decompose argument validation") {
    const auto ds = single_graph_dataset(triangle());
    const auto x = degree_attributes(ds);
    CHECK_THROWS_AS(egnn_decompose(ds, x, {}), ArgumentError);
    CHECK_THROWS_AS(egnn_decompose(ds, x, {1, 0}), ArgumentError);
    CHECK_THROWS_AS(egnn_decompose(ds, x, {0, 0}), ArgumentError);
    CHECK_THROWS_AS(egnn_decompose(ds, x, {-1, 0}), ArgumentError);
    CHECK_THROWS_AS(egnn_decompose(ds, SparseInt(2, 3), {0}), ArgumentError);
}

TEST_CASE("validate_decomposition") {
    auto h = decompose_with_degrees(toy_triangles_vs_paths(6), {0, 1});
    CHECK(validate_decomposition(h).empty());

    SUBCASE("zero-part ego object is reported with coordinates") {
        // Rebuild level-1 relations with the last ego's parts removed.
        for (auto& rel : h.relations[1]) {
            std::vector<SparseInt::Triplet> entries;
            for (Index r = 0; r + 1 < rel.matrix.rows(); ++r)
                for (std::size_t k = 0; k < rel.matrix.row_cols(r).size(); ++k)
                    entries.push_back({r, rel.matrix.row_cols(r)[k], rel.matrix.row_vals(r)[k]});
            rel.matrix =
                SparseInt::from_triplets(rel.matrix.rows(), rel.matrix.cols(), std::move(entries));
        }
        const auto violations = validate_decomposition(h);
        REQUIRE(!violations.empty());
        bool found = false;
        for (const auto& v : violations)
            if (v.level == 1 && v.object == h.level_sizes[1] - 1) found = true;
        CHECK(found);
    }
    SUBCASE("wrong column count is a shape violation") {
        h.relations[1][0].matrix = SparseInt(h.level_sizes[1], h.level_sizes[0] + 3);
        const auto violations = validate_decomposition(h);
        bool found = false;
        for (const auto& v : violations)
            if (v.level == 1 && v.message.find("column count") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("non-binary entries are rejected pre-compression") {
        SparseInt::Triplet t{0, 0, 2};
        h.relations[2][0].matrix =
            SparseInt::from_triplets(h.level_sizes[2], h.level_sizes[1], {t});
        const auto violations = validate_decomposition(h);
        bool found = false;
        for (const auto& v : violations)
            if (v.message.find("0/1") != std::string::npos) found = true;
        CHECK(found);
    }
}

TEST_CASE("decomposition_stats") {
    SUBCASE("triangle radii {0}") {
        const auto h = decompose_with_degrees(single_graph_dataset(triangle()), {0});
        const auto stats = decomposition_stats(h);
        CHECK(stats.level_sizes == std::vector<Index>{3, 3, 1});
        REQUIRE(stats.relations.size() == 3);
        CHECK(stats.relations[0].mtype == "root");
        CHECK(stats.relations[0].nnz == 3);
        CHECK(stats.relations[1].mtype == "elem");
        CHECK(stats.relations[1].nnz == 0);
        CHECK(stats.relations[2].mtype == "r0");
        CHECK(stats.relations[2].nnz == 3);
        CHECK(stats.total_entries == 3 + 3 + 0 + 3); // attributes + root + elem + top
        CHECK(stats.serialized_bytes == hdecomposition_serialized_bytes(h));
    }
    SUBCASE("empty dataset gives all-zero stats") {
        GraphDataset empty;
        empty.name = "empty";
        const auto h = egnn_decompose(empty, SparseInt(0, 0), {0});
        const auto stats = decomposition_stats(h);
        CHECK(stats.level_sizes == std::vector<Index>{0, 0, 0});
        CHECK(stats.total_entries == 0);
        CHECK(stats.attribute_nnz == 0);
    }
    SUBCASE("P5 radii {0,1}: nonzero counts match the ego enumeration oracle") {
        const Graph g = path(5);
        const auto h = decompose_with_degrees(single_graph_dataset(g), {0, 1});
        const auto stats = decomposition_stats(h);
        Index expected_elems = 0;
        for (Index root = 0; root < 5; ++root)
            for (Index r : {0, 1})
                expected_elems += static_cast<Index>(ego_vertices_oracle(g, root, r).size()) - 1;
        CHECK(stats.relations[0].nnz == 10);             // one root per (root, radius)
        CHECK(stats.relations[1].nnz == expected_elems); // elem memberships
    }
}

TEST_CASE("HDEC1 serialization round-trip") {
    const auto h = decompose_with_degrees(toy_triangles_vs_paths(8), {0, 1});
    const auto dir = fresh_temp_dir("hdec");
    const auto file = dir / "toy.hdec";
    save_hdecomposition(h, file);
    CHECK(static_cast<Index>(std::filesystem::file_size(file)) ==
          hdecomposition_serialized_bytes(h));
    const HDecomposition back = load_hdecomposition(file);
    CHECK(back == h);

    SUBCASE("bad magic is rejected") {
        const auto bogus = dir / "bogus.hdec";
        std::ofstream os(bogus, std::ios::binary);
        os << "NOTHDEC garbage";
        os.close();
        CHECK_THROWS_AS(load_hdecomposition(bogus), FormatError);
    }

    SUBCASE("truncated files fail cleanly at any cut point") {
        std::ifstream in(file, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<std::size_t> cut(0, bytes.size() - 1);
        for (int trial = 0; trial < 40; ++trial) {
            const auto stub = dir / ("cut_" + std::to_string(trial) + ".hdec");
            std::ofstream os(stub, std::ios::binary);
            os.write(bytes.data(), static_cast<std::streamsize>(cut(rng)));
            os.close();
            CHECK_THROWS_AS(load_hdecomposition(stub), FormatError);
        }
    }
}

TEST_SUITE_END();
