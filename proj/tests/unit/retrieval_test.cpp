#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "equivalence.hpp"
#include "facetlm/error.hpp"
#include "facetlm/retrieval.hpp"
#include "fixtures.hpp"

using namespace facetlm;

namespace {

std::vector<oracle::Counts> random_queries(std::mt19937_64& rng, int count)
{
    std::vector<oracle::Counts> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(synthetic::random_query(rng));
    }
    return out;
}

void expect_clean(equivalence::GridResult const& r)
{
    EXPECT_GT(r.comparisons, 0U);
    for (std::size_t i = 0; i < std::min<std::size_t>(r.failures.size(), 10); ++i) {
        ADD_FAILURE() << r.failures[i];
    }
}

TEST(Oracle, LanguageModelRepresentation)
{
    std::mt19937_64 rng(2024);
    equivalence::GridResult r;
    for (int c = 0; c < 6; ++c) {
        auto corpus = synthetic::random_corpus(rng);
        equivalence::check_corpus(corpus, random_queries(rng, 3), {1, 3}, {2, 0}, {0.3}, Representation::lm, 1000,
                                  r, "corpus " + std::to_string(c));
    }
    expect_clean(r);
}

TEST(Oracle, TfIdfRepresentation)
{
    std::mt19937_64 rng(77);
    equivalence::GridResult r;
    for (int c = 0; c < 6; ++c) {
        auto corpus = synthetic::random_corpus(rng);
        equivalence::check_corpus(corpus, random_queries(rng, 3), {1, 4}, {2, 0}, {0.0, 0.5}, Representation::tfidf,
                                  1000, r, "corpus " + std::to_string(c));
    }
    expect_clean(r);
}

TEST(Oracle, ShortResultLists)
{
    std::mt19937_64 rng(9);
    equivalence::GridResult r;
    for (int c = 0; c < 6; ++c) {
        auto corpus = synthetic::random_corpus(rng);
        equivalence::check_corpus(corpus, random_queries(rng, 3), {2, 5}, {1, 4, 0}, {0.6}, Representation::lm, 4, r,
                                  "corpus " + std::to_string(c));
    }
    expect_clean(r);
}

TEST(AlgorithmSpec, Defaults)
{
    AlgorithmSpec spec;
    EXPECT_EQ(spec.n, 1000U);
    EXPECT_EQ(spec.lambda, 0.6);
    EXPECT_EQ(AlgorithmSpec::default_m(Algorithm::basis_select), 1000U);
    EXPECT_EQ(AlgorithmSpec::default_m(Algorithm::set_select), 1000U);
    EXPECT_EQ(AlgorithmSpec::default_m(Algorithm::bag_select), 1000U);
    EXPECT_EQ(AlgorithmSpec::default_m(Algorithm::uniform_aspect_x), 10000U);
    EXPECT_EQ(AlgorithmSpec::default_m(Algorithm::aspect_x), 10000U);
    EXPECT_EQ(AlgorithmSpec::default_m(Algorithm::interpolation), 10000U);
    EXPECT_FALSE(AlgorithmSpec::default_rerank(Algorithm::lm));
    EXPECT_FALSE(AlgorithmSpec::default_rerank(Algorithm::basis_select));
    EXPECT_FALSE(AlgorithmSpec::default_rerank(Algorithm::set_select));
    EXPECT_TRUE(AlgorithmSpec::default_rerank(Algorithm::bag_select));
    EXPECT_TRUE(AlgorithmSpec::default_rerank(Algorithm::uniform_aspect_x));
    EXPECT_TRUE(AlgorithmSpec::default_rerank(Algorithm::aspect_x));
    EXPECT_FALSE(AlgorithmSpec::default_rerank(Algorithm::interpolation));
    spec.lambda = 1.2;
    EXPECT_THROW(spec.validate(), ConfigError);
    EXPECT_EQ(parse_algorithm("aspect-x"), Algorithm::aspect_x);
    EXPECT_THROW((void)parse_algorithm("bm25"), ConfigError);
}

TEST(RankClusters, HandCorpus)
{
    auto index = fixtures::index_of({{"d1", "a a"}, {"d2", "a b"}, {"d3", "b b"}});
    auto clusters = build_clusters(index, 2, SmoothingSpec{});
    auto q = fixtures::query(index, "a");
    auto ranked = rank_clusters(q, clusters, index, SmoothingSpec{}, 10);
    ASSERT_EQ(ranked.size(), 3U);
    // Cluster scores for a one-term query are p_c(a); compute each directly.
    std::vector<double> pa;
    for (auto const& c : clusters.clusters()) {
        pa.push_back(induce_cluster_lm(c, index, SmoothingSpec{}).prob(*index.term_id("a")));
    }
    auto best = std::max_element(pa.begin(), pa.end()) - pa.begin();
    EXPECT_EQ(ranked.front().basis, static_cast<DocIndex>(best));
    EXPECT_NEAR(ranked.front().score, pa[static_cast<std::size_t>(best)], 1e-12);
    EXPECT_EQ(rank_clusters(q, clusters, index, SmoothingSpec{}, 1).size(), 1U);
}

TEST(RankClusters, SingleCluster)
{
    auto index = fixtures::index_of({{"only", "a b"}});
    auto clusters = build_clusters(index, 40, SmoothingSpec{});
    auto ranked = rank_clusters(fixtures::query(index, "b"), clusters, index, SmoothingSpec{}, 5);
    ASSERT_EQ(ranked.size(), 1U);
    EXPECT_EQ(ranked[0].basis, 0U);
}

struct SmallWorld {
    synthetic::CountCorpus corpus;
    CorpusIndex index;
    ClusterSet clusters;

    explicit SmallWorld(std::uint64_t seed, std::size_t k = 3)
        : corpus(make(seed)), index(corpus.index()), clusters(build_clusters(index, k, SmoothingSpec{}))
    {}

    static synthetic::CountCorpus make(std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        return synthetic::random_corpus(rng, 40, 20);
    }
};

TEST(Retrieval, InterpolationAtOneIsLanguageModel)
{
    SmallWorld w(31);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        auto q = synthetic::resolve_counts("q", synthetic::random_query(rng, 20), w.index);
        AlgorithmSpec lm;
        std::vector<RankedList> a{r.run(lm, q)};
        std::ostringstream sa;
        write_run(sa, a, "tag");
        // m = 1 leaves most documents outside every top cluster.
        for (std::optional<std::size_t> m : {std::optional<std::size_t>{1}, std::optional<std::size_t>{}}) {
            AlgorithmSpec interp;
            interp.name = Algorithm::interpolation;
            interp.lambda = 1.0;
            interp.m = m;
            std::vector<RankedList> b{r.run(interp, q)};
            std::ostringstream sb;
            write_run(sb, b, "tag");
            EXPECT_EQ(sa.str(), sb.str());
        }
    }
}

TEST(Retrieval, AspectXIsInterpolationAtZero)
{
    SmallWorld w(32);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 10; ++i) {
        auto q = synthetic::resolve_counts("q", synthetic::random_query(rng, 20), w.index);
        AlgorithmSpec aspect;
        aspect.name = Algorithm::aspect_x;
        AlgorithmSpec interp;
        interp.name = Algorithm::interpolation;
        interp.lambda = 0.0;
        RetrievalTrace ta;
        RetrievalTrace ti;
        (void)r.run(aspect, q, &ta);
        (void)r.run(interp, q, &ti);
        ASSERT_EQ(ta.docs.size(), ti.docs.size());
        std::map<DocIndex, double> interp_scores;
        for (auto const& d : ti.docs) {
            interp_scores[d.doc] = d.pre_rerank_score;
        }
        for (auto const& d : ta.docs) {
            ASSERT_TRUE(interp_scores.count(d.doc));
            EXPECT_TRUE(equivalence::close(d.pre_rerank_score, interp_scores[d.doc], 1e-9));
        }
    }
}

TEST(Retrieval, FacetConstraintAndBagMultiplicity)
{
    SmallWorld w(33, 4);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        auto q = synthetic::resolve_counts("q", synthetic::random_query(rng, 20), w.index);
        for (auto algo : kAllAlgorithms) {
            if (algo == Algorithm::lm) {
                continue;
            }
            AlgorithmSpec spec;
            spec.name = algo;
            spec.m = 6;
            RetrievalTrace trace;
            (void)r.run(spec, q, &trace);
            std::set<DocIndex> top;
            for (std::size_t c = 0; c < trace.clusters_used; ++c) {
                top.insert(trace.top_clusters[c].basis);
            }
            for (auto const& d : trace.docs) {
                if (algo == Algorithm::interpolation && d.facets.empty()) {
                    // Scored by its own language model alone.
                    EXPECT_NEAR(d.pre_rerank_score, spec.lambda * d.doc_score, 1e-15);
                    continue;
                }
                ASSERT_FALSE(d.facets.empty());
                for (auto basis : d.facets) {
                    EXPECT_TRUE(top.count(basis));
                    auto const& members = w.clusters.cluster_of(basis).members;
                    EXPECT_NE(std::find(members.begin(), members.end(), d.doc), members.end());
                    if (algo == Algorithm::basis_select) {
                        EXPECT_EQ(basis, d.doc);
                    }
                }
                if (algo == Algorithm::bag_select) {
                    double ratio = d.pre_rerank_score / d.doc_score;
                    EXPECT_NEAR(ratio, static_cast<double>(d.facets.size()), 1e-9);
                    EXPECT_NEAR(ratio, std::round(ratio), 1e-9);
                }
            }
        }
    }
}

TEST(Retrieval, SelectionKeepsBaselineOrder)
{
    SmallWorld w(34);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        auto q = synthetic::resolve_counts("q", synthetic::random_query(rng, 20), w.index);
        auto baseline = r.run(AlgorithmSpec{}, q);
        for (auto algo : {Algorithm::basis_select, Algorithm::set_select}) {
            AlgorithmSpec spec;
            spec.name = algo;
            spec.m = 3;
            auto selected = r.run(spec, q);
            std::set<std::string> ids;
            for (auto const& e : selected.entries) {
                ids.insert(e.doc_id);
            }
            std::vector<std::string> restricted;
            for (auto const& e : baseline.entries) {
                if (ids.count(e.doc_id)) {
                    restricted.push_back(e.doc_id);
                }
            }
            std::vector<std::string> got;
            for (auto const& e : selected.entries) {
                got.push_back(e.doc_id);
            }
            EXPECT_EQ(got, restricted);
        }
    }
}

TEST(Retrieval, InterpolationIsAffineInLambda)
{
    SmallWorld w(35);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    auto q = synthetic::resolve_counts("q", {{"t0", 1}, {"t2", 1}}, w.index);
    auto scores_at = [&](double lambda) {
        AlgorithmSpec spec;
        spec.name = Algorithm::interpolation;
        spec.lambda = lambda;
        RetrievalTrace trace;
        (void)r.run(spec, q, &trace);
        std::map<DocIndex, double> out;
        for (auto const& d : trace.docs) {
            out[d.doc] = d.pre_rerank_score;
        }
        return out;
    };
    auto s0 = scores_at(0.0);
    auto s1 = scores_at(1.0);
    auto doc_scores = r.document_scores(q, Representation::lm);
    for (double lambda : {0.25, 0.6, 0.9}) {
        for (auto const& [d, v] : scores_at(lambda)) {
            EXPECT_NEAR(v, lambda * s1[d] + (1 - lambda) * s0[d], 1e-12);
            EXPECT_NEAR(s1[d], doc_scores[d], 1e-15);
        }
    }
}

TEST(Retrieval, RerankKeepsSetAndOrdersByDocumentScore)
{
    SmallWorld w(36);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 10; ++i) {
        auto q = synthetic::resolve_counts("q", synthetic::random_query(rng, 20), w.index);
        AlgorithmSpec spec;
        spec.name = Algorithm::aspect_x;
        spec.rerank = false;
        auto plain = r.run(spec, q);
        auto reranked = r.rerank(plain, q, Representation::lm);
        std::multiset<std::string> before;
        std::multiset<std::string> after;
        for (auto const& e : plain.entries) {
            before.insert(e.doc_id);
        }
        for (auto const& e : reranked.entries) {
            after.insert(e.doc_id);
        }
        EXPECT_EQ(before, after);
        spec.rerank = true;
        auto built_in = r.run(spec, q);
        EXPECT_FALSE(equivalence::compare(built_in, [&] {
                         std::vector<oracle::Entry> v;
                         for (auto const& e : reranked.entries) {
                             v.push_back({e.doc_id, e.score});
                         }
                         return v;
                     }()));
        auto again = r.rerank(reranked, q, Representation::lm);
        EXPECT_FALSE(equivalence::compare(again, [&] {
                         std::vector<oracle::Entry> v;
                         for (auto const& e : reranked.entries) {
                             v.push_back({e.doc_id, e.score});
                         }
                         return v;
                     }()));
    }
}

TEST(Retrieval, RerankReversesInvertedScores)
{
    // d_far has the better cluster support but the worse own score for "a".
    auto index = fixtures::index_of({{"d_near", "a a a b"}, {"d_far", "a b b b"}});
    auto q = fixtures::query(index, "a");
    RankedList list{"q", {{"d_far", 0.9, 1}, {"d_near", 0.1, 2}}};
    auto out = rerank_by_doc_lm(list, q, index, SmoothingSpec{});
    ASSERT_EQ(out.entries.size(), 2U);
    EXPECT_EQ(out.entries[0].doc_id, "d_near");
    EXPECT_EQ(out.entries[1].doc_id, "d_far");
    EXPECT_GT(out.entries[0].score, out.entries[1].score);
}

TEST(Retrieval, EmptyQueryGivesEmptyList)
{
    SmallWorld w(37);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    auto q = synthetic::resolve_counts("q", {{"nothing", 2}}, w.index);
    for (auto algo : kAllAlgorithms) {
        AlgorithmSpec spec;
        spec.name = algo;
        RetrievalTrace trace;
        EXPECT_TRUE(r.run(spec, q, &trace).entries.empty());
        EXPECT_TRUE(trace.empty_query);
    }
}

TEST(Retrieval, ClusterAlgorithmsNeedClusters)
{
    auto index = fixtures::two_docs();
    Retriever r(index, SmoothingSpec{});
    AlgorithmSpec spec;
    spec.name = Algorithm::set_select;
    EXPECT_THROW((void)r.run(spec, fixtures::query(index, "a")), ConfigError);
}

TEST(Retrieval, ListInvariants)
{
    SmallWorld w(38);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 5; ++i) {
        auto q = synthetic::resolve_counts("q", synthetic::random_query(rng, 20), w.index);
        for (auto algo : kAllAlgorithms) {
            AlgorithmSpec spec;
            spec.name = algo;
            spec.n = 7;
            auto list = r.run(spec, q);
            EXPECT_LE(list.entries.size(), 7U);
            std::set<std::string> seen;
            for (std::size_t j = 0; j < list.entries.size(); ++j) {
                EXPECT_EQ(list.entries[j].rank, j + 1);
                EXPECT_TRUE(seen.insert(list.entries[j].doc_id).second);
                if (j > 0) {
                    auto const& prev = list.entries[j - 1];
                    auto const& cur = list.entries[j];
                    EXPECT_TRUE(prev.score > cur.score || (prev.score == cur.score && prev.doc_id < cur.doc_id));
                }
            }
        }
    }
}

TEST(BatchSearch, MatchesIndividualRunsInInputOrder)
{
    SmallWorld w(39);
    Retriever r(w.index, SmoothingSpec{}, &w.clusters);
    std::mt19937_64 rng(10);
    std::vector<Query> queries;
    for (int i = 0; i < 50; ++i) {
        Query q;
        q.id = "q" + std::to_string(50 - i);
        for (auto const& [t, n] : synthetic::random_query(rng, 20)) {
            q.term_counts[t] = static_cast<std::uint32_t>(n);
            q.length += static_cast<std::uint64_t>(n);
        }
        queries.push_back(q);
    }
    AlgorithmSpec spec;
    spec.name = Algorithm::interpolation;
    auto batch = batch_search(spec, queries, r);
    ASSERT_EQ(batch.lists.size(), 50U);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        EXPECT_EQ(batch.lists[i].query_id, queries[i].id);
        auto single = r.run(spec, resolve(queries[i], w.index));
        ASSERT_EQ(single.entries.size(), batch.lists[i].entries.size());
        for (std::size_t j = 0; j < single.entries.size(); ++j) {
            EXPECT_EQ(single.entries[j].doc_id, batch.lists[i].entries[j].doc_id);
            EXPECT_EQ(single.entries[j].score, batch.lists[i].entries[j].score);
        }
    }
    std::ostringstream run;
    write_run(run, batch.lists, "t");
    std::istringstream in(run.str());
    auto parsed = read_run(in, "run");
    std::size_t non_empty = 0;
    for (auto const& l : batch.lists) {
        non_empty += l.entries.empty() ? 0 : 1;
    }
    EXPECT_EQ(parsed.lists.size(), non_empty);
    EXPECT_TRUE(batch_search(spec, {}, r).lists.empty());
}

TEST(RunFile, ExactFormatAndRoundTrip)
{
    std::vector<RankedList> lists{{"q1", {{"d3", 0.5, 1}, {"d1", 0.25, 2}}}, {"q2", {{"d2", 1.0 / 3.0, 1}}}};
    std::ostringstream out;
    write_run(out, lists, "exp");
    EXPECT_EQ(out.str(), "q1 Q0 d3 1 0.500000 exp\nq1 Q0 d1 2 0.250000 exp\nq2 Q0 d2 1 0.333333 exp\n");
    std::istringstream in(out.str());
    auto run = read_run(in, "r");
    EXPECT_EQ(run.tag, "exp");
    ASSERT_EQ(run.lists.size(), 2U);
    EXPECT_EQ(run.find("q2")->entries[0].doc_id, "d2");
    EXPECT_EQ(run.find("q3"), nullptr);
}

TEST(RunFile, MalformedLinesNameTheLine)
{
    auto expect_line = [](std::string const& text, std::size_t line) {
        std::istringstream in(text);
        try {
            (void)read_run(in, "r");
            FAIL() << text;
        } catch (FormatError const& e) {
            EXPECT_EQ(e.line(), line);
        }
    };
    expect_line("q1 Q0 d1 1 0.5 t\nq1 Q0 d2 x 0.4 t\n", 2);
    expect_line("q1 Q0 d1 1 0.5\n", 1);
    expect_line("q1 Q0 d1 2 0.5 t\nq1 Q0 d2 1 0.4 t\n", 2);
    expect_line("q1 Q0 d1 1 0.5 t\nq1 Q0 d1 2 0.4 t\n", 2);
}

}  // namespace
