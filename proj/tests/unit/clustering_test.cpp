#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "facetlm/clustering.hpp"
#include "facetlm/error.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

using namespace facetlm;

namespace {

std::vector<std::string> ids(CorpusIndex const& index, std::vector<DocIndex> const& docs)
{
    std::vector<std::string> out;
    for (auto d : docs) {
        out.push_back(index.document(d).id);
    }
    return out;
}

std::string serialize(ClusterSet const& set, CorpusIndex const& index)
{
    std::ostringstream out;
    write_clusters(set, index, out);
    return out.str();
}

TEST(NearestNeighbors, HandCorpus)
{
    auto index = fixtures::index_of({{"d1", "a a"}, {"d2", "a b"}, {"d3", "b b"}});
    auto nn = nearest_neighbors(0, index, SmoothingSpec{}, 2);
    EXPECT_EQ(ids(index, nn), (std::vector<std::string>{"d2", "d3"}));
    EXPECT_TRUE(nearest_neighbors(0, index, SmoothingSpec{}, 0).empty());
    EXPECT_THROW((void)nearest_neighbors(0, index, SmoothingSpec{}, 3), ConfigError);
}

TEST(NearestNeighbors, VerbatimDuplicateIsNearest)
{
    auto index = fixtures::index_of({{"x", "a b c c"}, {"y", "a b"}, {"xdup", "a b c c"}, {"z", "c"}});
    // Under the default prior these tiny documents all sit near the collection model.
    SmoothingSpec light;
    light.mu = 1.0;
    auto nn = nearest_neighbors(0, index, light, 1);
    EXPECT_EQ(ids(index, nn), std::vector<std::string>{"xdup"});
}

TEST(NearestNeighbors, TiesBreakByDocumentId)
{
    auto index = fixtures::index_of({{"b", "x"}, {"c", "y"}, {"a", "y"}, {"basis", "z"}});
    auto nn = nearest_neighbors(3, index, SmoothingSpec{}, 3);
    // No candidate contains "z" and all have length 1, so all are equally far.
    EXPECT_EQ(ids(index, nn), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(BuildClusters, SingletonsForKOne)
{
    auto index = fixtures::index_of({{"d1", "a"}, {"d2", "b"}, {"d3", "a b"}});
    auto set = build_clusters(index, 1, SmoothingSpec{});
    ASSERT_EQ(set.size(), 3U);
    for (DocIndex d = 0; d < 3; ++d) {
        EXPECT_EQ(set.cluster_of(d).members, std::vector<DocIndex>{d});
    }
    EXPECT_EQ(serialize(set, index), "#facetlm-clusters k=1 fingerprint=" + index.fingerprint_hex()
                                         + "\nd1\td1\nd2\td2\nd3\td3\n");
}

TEST(BuildClusters, KAtLeastCorpusSizeTakesEverything)
{
    auto index = fixtures::index_of({{"d1", "a"}, {"d2", "b"}, {"d3", "a b"}});
    for (std::size_t k : {3U, 40U}) {
        auto set = build_clusters(index, k, SmoothingSpec{});
        for (auto const& c : set.clusters()) {
            auto sorted = c.members;
            std::sort(sorted.begin(), sorted.end());
            EXPECT_EQ(sorted, (std::vector<DocIndex>{0, 1, 2}));
            EXPECT_EQ(c.members.front(), c.basis);
        }
    }
    EXPECT_THROW((void)build_clusters(index, 0, SmoothingSpec{}), ConfigError);
}

TEST(BuildClusters, NearDuplicatesOverlap)
{
    auto index = fixtures::index_of(
        {{"a1", "oil oil spill"}, {"a2", "oil spill spill"}, {"b1", "vote vote poll"}, {"b2", "poll vote poll"}});
    auto set = build_clusters(index, 2, SmoothingSpec{});
    std::vector<int> memberships(index.num_docs(), 0);
    for (auto const& c : set.clusters()) {
        for (auto d : c.members) {
            ++memberships[d];
        }
    }
    EXPECT_GE(*std::max_element(memberships.begin(), memberships.end()), 2);
    for (int m : memberships) {
        EXPECT_GE(m, 1);
    }
}

TEST(BuildClusters, MatchesExhaustiveOracle)
{
    std::mt19937_64 rng(101);
    oracle::Smoothing osmooth[3];
    SmoothingSpec smooth[3];
    osmooth[1].method = oracle::Method::jm;
    smooth[1].method = SmoothingMethod::jelinek_mercer;
    osmooth[2].method = oracle::Method::ad;
    smooth[2].method = SmoothingMethod::absolute_discounting;
    for (int trial = 0; trial < 20; ++trial) {
        auto corpus = synthetic::random_corpus(rng);
        auto index = corpus.index();
        auto ref = corpus.oracle();
        for (std::size_t k : {1U, 2U, 5U}) {
            for (int s = 0; s < 3; ++s) {
                auto set = build_clusters(index, k, smooth[s]);
                auto expected = oracle::clusters(ref, k, osmooth[s]);
                ASSERT_EQ(set.size(), expected.size());
                for (std::size_t b = 0; b < expected.size(); ++b) {
                    std::vector<std::string> want;
                    for (auto d : expected[b]) {
                        want.push_back(ref.docs[d].id);
                    }
                    EXPECT_EQ(ids(index, set.cluster_of(static_cast<DocIndex>(b)).members), want)
                        << "trial " << trial << " k " << k << " smoothing " << s;
                }
            }
        }
    }
}

TEST(BuildClusters, Deterministic)
{
    std::mt19937_64 rng(4);
    auto corpus = synthetic::random_corpus(rng);
    auto index = corpus.index();
    EXPECT_EQ(serialize(build_clusters(index, 5, SmoothingSpec{}), index),
              serialize(build_clusters(index, 5, SmoothingSpec{}), index));
}

TEST(ClusterFile, RoundTripIsByteIdentical)
{
    fixtures::TempDir dir;
    auto index = fixtures::index_of({{"d1", "a a b"}, {"d2", "b b"}, {"d3", "a c"}});
    auto set = build_clusters(index, 2, SmoothingSpec{});
    save_clusters(set, index, dir / "c.tsv");
    auto loaded = load_clusters(dir / "c.tsv", index);
    EXPECT_EQ(loaded, set);
    EXPECT_EQ(serialize(loaded, index), fixtures::read_file(dir / "c.tsv"));
}

TEST(ClusterFile, FingerprintMismatch)
{
    auto index = fixtures::index_of({{"d1", "a a b"}, {"d2", "b b"}, {"d3", "a c"}});
    auto other = fixtures::index_of({{"d1", "a a b"}, {"d2", "b b"}});
    auto text = serialize(build_clusters(index, 2, SmoothingSpec{}), index);
    std::istringstream in(text);
    EXPECT_THROW((void)read_clusters(in, other, "c.tsv"), MismatchError);
    auto set = build_clusters(index, 2, SmoothingSpec{});
    EXPECT_THROW(set.check_compatible(other), MismatchError);
}

std::string with_header(CorpusIndex const& index, std::size_t k, std::string const& body)
{
    return "#facetlm-clusters k=" + std::to_string(k) + " fingerprint=" + index.fingerprint_hex() + "\n" + body;
}

TEST(ClusterFile, ValidationErrorsNameTheLine)
{
    auto index = fixtures::index_of({{"d1", "a"}, {"d2", "b"}, {"d3", "a b"}});
    auto expect_line = [&](std::string const& text, std::size_t line) {
        std::istringstream in(text);
        try {
            (void)read_clusters(in, index, "c.tsv");
            FAIL() << "expected FormatError for:\n" << text;
        } catch (FormatError const& e) {
            EXPECT_EQ(e.line(), line) << e.what();
        }
    };
    expect_line(with_header(index, 2, "d1\td1,d3\nd2\td2,d9\nd3\td3,d1\n"), 3);
    expect_line(with_header(index, 2, "d1\td1,d3\nd2\td2,d1\n"), 4);
    expect_line(with_header(index, 2, "d1\td1,d3\nd1\td1,d2\nd3\td3,d1\n"), 3);
    expect_line(with_header(index, 2, "d1\td3,d1\n"), 2);
    expect_line(with_header(index, 2, "d1\td1\n"), 2);
    expect_line(with_header(index, 2, "d1\td1,d1\n"), 2);
    expect_line("#facetlm-clusters k=x fingerprint=" + index.fingerprint_hex() + "\n", 1);
    expect_line("garbage\n", 1);
}

}  // namespace
