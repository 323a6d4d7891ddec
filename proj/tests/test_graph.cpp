#include <doctest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "saen/graph.hpp"

using namespace saen;
using namespace saen::testing;

TEST_SUITE_BEGIN("graph");

namespace {

void write_lines(const std::filesystem::path& file, const std::vector<std::string>& lines) {
    std::ofstream os(file);
    for (const auto& line : lines) os << line << "\n";
}

// Triangle + single edge, labels {1, 2}.
std::filesystem::path write_two_graph_fixture(const std::string& tag) {
    const auto dir = fresh_temp_dir(tag);
    write_lines(dir / "tiny_A.txt", {"1, 2", "2, 3", "1, 3", "4, 5"});
    write_lines(dir / "tiny_graph_indicator.txt", {"1", "1", "1", "2", "2"});
    write_lines(dir / "tiny_graph_labels.txt", {"1", "2"});
    return dir;
}

} // namespace

TEST_CASE("parse_tu_dataset reads the synthetic two-graph fixture") {
    const auto dir = write_two_graph_fixture("parse");
    const GraphDataset ds = parse_tu_dataset(dir, "tiny");
    CHECK(ds.size() == 2);
    CHECK(ds.graphs[0].num_vertices == 3);
    CHECK(ds.graphs[1].num_vertices == 2);
    CHECK(ds.labels == std::vector<Index>{0, 1});
    CHECK(ds.class_count == 2);
    CHECK(ds.graphs[0].edges ==
          std::vector<std::pair<Index, Index>>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(ds.graphs[1].edges == std::vector<std::pair<Index, Index>>{{0, 1}});
}

TEST_CASE("parse_tu_dataset tolerates CRLF, double-direction edges and node labels") {
    const auto dir = fresh_temp_dir("crlf");
    {
        std::ofstream os(dir / "d_A.txt", std::ios::binary);
        os << "1, 2\r\n2, 1\r\n2,3\r\n";
        std::ofstream ind(dir / "d_graph_indicator.txt", std::ios::binary);
        ind << "1\r\n1\r\n1\r\n";
        std::ofstream lab(dir / "d_graph_labels.txt", std::ios::binary);
        lab << "7\r\n";
        std::ofstream nl(dir / "d_node_labels.txt", std::ios::binary);
        nl << "5\r\n9\r\n5\r\n";
    }
    const GraphDataset ds = parse_tu_dataset(dir, "d");
    CHECK(ds.graphs[0].edges == std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}});
    CHECK(ds.node_label_count == 2);
    CHECK(ds.graphs[0].node_labels == std::vector<Index>{0, 1, 0}); // 5 -> 0, 9 -> 1
    CHECK(ds.class_count == 1);
}

TEST_CASE("parse_tu_dataset error paths") {
    const auto dir = write_two_graph_fixture("errors");

    SUBCASE("missing file names the file") {
        CHECK_THROWS_WITH_AS(parse_tu_dataset(dir, "nothere"),
                             doctest::Contains("nothere_graph_labels.txt"), IngestError);
    }
    SUBCASE("vertex id out of range reports the line") {
        write_lines(dir / "tiny_A.txt", {"1, 2", "2, 9"});
        CHECK_THROWS_WITH_AS(parse_tu_dataset(dir, "tiny"), doctest::Contains("tiny_A.txt:2"),
                             FormatError);
    }
    SUBCASE("edge crossing two graphs reports the line") {
        write_lines(dir / "tiny_A.txt", {"1, 2", "3, 4"});
        CHECK_THROWS_WITH_AS(parse_tu_dataset(dir, "tiny"),
                             doctest::Contains("edge crosses two graphs at tiny_A.txt:2"),
                             FormatError);
    }
    SUBCASE("malformed edge line") {
        write_lines(dir / "tiny_A.txt", {"1 2"});
        CHECK_THROWS_AS(parse_tu_dataset(dir, "tiny"), FormatError);
    }
    SUBCASE("indicator out of range reports the line") {
        write_lines(dir / "tiny_graph_indicator.txt", {"1", "1", "1", "2", "3"});
        CHECK_THROWS_WITH_AS(parse_tu_dataset(dir, "tiny"),
                             doctest::Contains("tiny_graph_indicator.txt:5"), FormatError);
    }
}

TEST_CASE("parse -> serialize -> parse round-trips the dataset") {
    const auto dir = write_two_graph_fixture("roundtrip");
    const GraphDataset ds = parse_tu_dataset(dir, "tiny");
    const auto out = fresh_temp_dir("roundtrip_out");
    write_tu_dataset(ds, out);
    CHECK(parse_tu_dataset(out, "tiny") == ds);

    // And again with node labels in play.
    GraphDataset labeled = all_distinct_dataset();
    const auto out2 = fresh_temp_dir("roundtrip_lab");
    write_tu_dataset(labeled, out2);
    CHECK(parse_tu_dataset(out2, "distinct") == labeled);
}

TEST_CASE("degree_attributes one-hot rows") {
    SUBCASE("triangle: all rows one-hot at degree 2") {
        const auto x = degree_attributes(single_graph_dataset(triangle()));
        CHECK(x.rows() == 3);
        CHECK(x.cols() == 3);
        for (Index r = 0; r < 3; ++r) {
            REQUIRE(x.row_nnz(r) == 1);
            CHECK(x.row_cols(r)[0] == 2);
            CHECK(x.row_vals(r)[0] == 1);
        }
    }
    SUBCASE("star K1,3: center at 3, leaves at 1") {
        const auto x = degree_attributes(single_graph_dataset(star(3)));
        CHECK(x.cols() == 4);
        CHECK(x.row_cols(0)[0] == 3);
        for (Index leaf = 1; leaf <= 3; ++leaf) CHECK(x.row_cols(leaf)[0] == 1);
    }
    SUBCASE("path P3: 1, 2, 1") {
        const auto x = degree_attributes(single_graph_dataset(path(3)));
        CHECK(x.row_cols(0)[0] == 1);
        CHECK(x.row_cols(1)[0] == 2);
        CHECK(x.row_cols(2)[0] == 1);
    }
    SUBCASE("empty dataset is rejected") {
        CHECK_THROWS_AS(degree_attributes(GraphDataset{}), ArgumentError);
    }
}

TEST_CASE("degree one-hot column equals an independent degree count") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const GraphDataset ds = random_dataset(rng, 3);
        const auto x = degree_attributes(ds);
        Index row = 0;
        for (const auto& g : ds.graphs)
            for (Index v = 0; v < g.num_vertices; ++v, ++row) {
                Index count = 0; // recount incidences from the raw edge list
                for (auto [a, b] : g.edges) count += (a == v) + (b == v);
                REQUIRE(x.row_nnz(row) == 1);
                CHECK(x.row_cols(row)[0] == count);
            }
    }
}

TEST_CASE("build_attributes modes") {
    GraphDataset ds = all_distinct_dataset(); // six vertices, labels 0..5
    const auto both = build_attributes(ds, AttributeMode::kBoth);
    CHECK(both.cols() == 3 + 6); // degrees 0..2 plus 6 label columns
    CHECK(both.row_nnz(0) == 2);
    const auto labels_only = build_attributes(ds, AttributeMode::kNodeLabels);
    CHECK(labels_only.cols() == 6);
    CHECK(labels_only.row_cols(1)[0] == 1);
    const GraphDataset unlabeled = single_graph_dataset(path(3));
    CHECK(build_attributes(unlabeled, AttributeMode::kBoth) ==
          degree_attributes(unlabeled)); // falls back when no labels exist
    CHECK_THROWS_AS(build_attributes(unlabeled, AttributeMode::kNodeLabels), ArgumentError);
}

TEST_CASE("ego_graph basics") {
    SUBCASE("radius 0 is the root alone") {
        std::mt19937_64 rng(3);
        const Graph g = random_graph(rng);
        const EgoGraph ego = ego_graph(g, 0, 0);
        CHECK(ego.vertices == std::vector<Index>{0});
        CHECK(ego.edges.empty());
        CHECK(ego.root == 0);
    }
    SUBCASE("triangle radius 1 covers everything") {
        const Graph g = triangle();
        for (Index root = 0; root < 3; ++root) {
            const EgoGraph ego = ego_graph(g, root, 1);
            CHECK(ego.vertices == std::vector<Index>{0, 1, 2});
            CHECK(ego.edges.size() == 3);
        }
    }
    SUBCASE("P5 root v2 radius 1: derived from the distance oracle") {
        const Graph g = path(5);
        CHECK(ego_vertices_oracle(g, 2, 1) == std::vector<Index>{1, 2, 3});
        const EgoGraph ego = ego_graph(g, 2, 1);
        CHECK(ego.vertices == std::vector<Index>{1, 2, 3});
        CHECK(ego.edges == std::vector<std::pair<Index, Index>>{{1, 2}, {2, 3}});
    }
    SUBCASE("invalid root") {
        CHECK_THROWS_AS(ego_graph(triangle(), 5, 1), ArgumentError);
        CHECK_THROWS_AS(ego_graph(triangle(), 0, -1), ArgumentError);
    }
}

TEST_CASE("ego_graph monotonicity and component capture") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const Graph g = random_graph(rng, 14);
        const auto dist = all_pairs_distances(g);
        std::uniform_int_distribution<Index> pick(0, g.num_vertices - 1);
        const Index root = pick(rng);
        std::vector<Index> previous;
        for (Index r = 0; r <= g.num_vertices; ++r) {
            const auto members = ego_vertices(g, root, r);
            CHECK(members == ego_vertices_oracle(g, root, r));
            CHECK(std::includes(members.begin(), members.end(), previous.begin(), previous.end()));
            previous = members;
        }
        // r >= diameter: the whole connected component of the root.
        std::vector<Index> component;
        for (Index v = 0; v < g.num_vertices; ++v)
            if (dist[root][v] >= 0) component.push_back(v);
        CHECK(previous == component);
    }
}

TEST_CASE("make_graph validates and canonicalizes") {
    CHECK_THROWS_AS(make_graph(2, {{0, 5}}), ArgumentError);
    const Graph g = make_graph(3, {{2, 0}, {0, 2}, {1, 0}});
    CHECK(g.edges == std::vector<std::pair<Index, Index>>{{0, 1}, {0, 2}});
    CHECK(g.degree(0) == 2);
}

TEST_SUITE_END();
