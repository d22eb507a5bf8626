#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facetlm/clustering.hpp"
#include "facetlm/corpus.hpp"
#include "facetlm/smoothing.hpp"

namespace facetlm {

enum class Algorithm { lm, basis_select, set_select, bag_select, uniform_aspect_x, aspect_x, interpolation };

inline constexpr std::array<Algorithm, 7> kAllAlgorithms = {
    Algorithm::lm,       Algorithm::basis_select,     Algorithm::set_select,   Algorithm::bag_select,
    Algorithm::uniform_aspect_x, Algorithm::aspect_x, Algorithm::interpolation,
};

[[nodiscard]] std::string_view to_string(Algorithm a);
/// Accepts the enum names with '_' or '-'.
[[nodiscard]] Algorithm parse_algorithm(std::string_view name);

/// How p_d(q), p_c(q) and p_c(d) are computed.
enum class Representation { lm, tfidf };

[[nodiscard]] std::string_view to_string(Representation r);
[[nodiscard]] Representation parse_representation(std::string_view name);

struct AlgorithmSpec {
    Algorithm name = Algorithm::lm;
    /// Clusters retrieved. Unset means 1000 for the selection algorithms and
    /// 10000 for the aspect and interpolation algorithms.
    std::optional<std::size_t> m;
    std::size_t n = 1000;
    /// Weight on p_d(q); interpolation only.
    double lambda = 0.6;
    /// Unset means: re-rank for bag_select, uniform_aspect_x and aspect_x.
    std::optional<bool> rerank;
    Representation representation = Representation::lm;
    /// Divide the aspect sum by the sum of p_c(d) over the facet set.
    bool normalize_cluster_posteriors = false;

    [[nodiscard]] static std::size_t default_m(Algorithm a);
    [[nodiscard]] static bool default_rerank(Algorithm a);

    [[nodiscard]] std::size_t configured_m() const { return m.value_or(default_m(name)); }
    [[nodiscard]] bool effective_rerank() const { return rerank.value_or(default_rerank(name)); }
    [[nodiscard]] bool uses_clusters() const noexcept { return name != Algorithm::lm; }

    void validate() const;
};

struct RankedEntry {
    std::string doc_id;
    double score = 0.0;
    std::size_t rank = 0;
};

/// Scores non-increasing, ties by ascending document id, ranks from 1.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;
};

struct ScoredCluster {
    DocIndex basis;
    double score;
};

/// Optional instrumentation filled by Retriever::run().
struct RetrievalTrace {
    struct Doc {
        DocIndex doc;
        /// Bases of the top clusters containing the document, in cluster rank order.
        std::vector<DocIndex> facets;
        double pre_rerank_score;
        double doc_score;
    };
    bool empty_query = false;
    std::vector<ScoredCluster> top_clusters;
    /// Leading entries of top_clusters that were consulted.
    std::size_t clusters_used = 0;
    /// In final rank order.
    std::vector<Doc> docs;
};

/// Retrieval over one index, smoothing setting and (optional) cluster set.
/// Cluster-derived statistics are computed on first use. All member
/// functions are const and safe to call concurrently.
class Retriever {
  public:
    /// Throws MismatchError if `clusters` was built for another corpus.
    Retriever(CorpusIndex const& index, SmoothingSpec spec, ClusterSet const* clusters = nullptr);
    ~Retriever();
    Retriever(Retriever const&) = delete;
    Retriever& operator=(Retriever const&) = delete;

    [[nodiscard]] RankedList
    run(AlgorithmSpec const& algo, ResolvedQuery const& query, RetrievalTrace* trace = nullptr) const;

    /// p_d(q) (or tf.idf inner products) for every document; all zero for an empty query.
    [[nodiscard]] std::vector<double> document_scores(ResolvedQuery const& query, Representation rep) const;

    /// p_c(q) for every cluster, indexed by basis.
    [[nodiscard]] std::vector<double> cluster_scores(ResolvedQuery const& query, Representation rep) const;

    /// Clusters by descending score, ties by basis id, truncated to m.
    [[nodiscard]] std::vector<ScoredCluster>
    rank_clusters(ResolvedQuery const& query, std::size_t m, Representation rep) const;

    /// p_c(d) for members[slot] of the cluster with this basis.
    [[nodiscard]] double cluster_affinity(DocIndex basis, std::size_t slot, Representation rep) const;

    /// Same documents, reordered by document score; scores replaced.
    [[nodiscard]] RankedList rerank(RankedList const& list, ResolvedQuery const& query, Representation rep) const;

    [[nodiscard]] CorpusIndex const& index() const noexcept { return m_index; }
    [[nodiscard]] ClusterSet const* clusters() const noexcept { return m_clusters; }
    [[nodiscard]] SmoothingSpec const& smoothing() const noexcept { return m_spec; }

  private:
    struct ClusterModels;
    ClusterModels const& models() const;
    [[nodiscard]] RankedList to_list(std::string const& query_id, std::span<DocIndex const> docs,
                                     std::span<double const> scores) const;
    void sort_by_score(std::vector<DocIndex>& docs, std::span<double const> scores) const;

    CorpusIndex const& m_index;
    SmoothingSpec m_spec;
    ClusterSet const* m_clusters;
    mutable std::once_flag m_models_once;
    mutable std::unique_ptr<ClusterModels> m_models;
};

[[nodiscard]] std::vector<ScoredCluster> rank_clusters(ResolvedQuery const& query, ClusterSet const& clusters,
                                                       CorpusIndex const& index, SmoothingSpec const& spec,
                                                       std::size_t m);

[[nodiscard]] RankedList run_algorithm(AlgorithmSpec const& algo, ResolvedQuery const& query,
                                       CorpusIndex const& index, ClusterSet const* clusters,
                                       SmoothingSpec const& spec);

[[nodiscard]] RankedList rerank_by_doc_lm(RankedList const& list, ResolvedQuery const& query,
                                          CorpusIndex const& index, SmoothingSpec const& spec,
                                          Representation rep = Representation::lm);

struct BatchResult {
    std::vector<RankedList> lists;
    /// Queries with no in-vocabulary terms; they yield empty lists.
    std::vector<std::string> empty_queries;
    std::uint64_t dropped_tokens = 0;
};

/// run() over every query, in input order.
[[nodiscard]] BatchResult
batch_search(AlgorithmSpec const& algo, std::span<Query const> queries, Retriever const& retriever);

/// `<qid> Q0 <docid> <rank> <score:%.6f> <runtag>` per entry.
void write_run(std::ostream& out, std::span<RankedList const> lists, std::string_view runtag);
void save_run(std::filesystem::path const& path, std::span<RankedList const> lists, std::string_view runtag);

struct Run {
    std::string tag;
    /// In order of first appearance.
    std::vector<RankedList> lists;

    [[nodiscard]] RankedList const* find(std::string_view query_id) const;
};

[[nodiscard]] Run read_run(std::istream& in, std::string const& source);
[[nodiscard]] Run load_run(std::filesystem::path const& path);

}  // namespace facetlm
