#include "facetlm/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "facetlm/error.hpp"
#include "facetlm/language_model.hpp"
#include "facetlm/tfidf.hpp"
#include "parallel.hpp"
#include "ranking.hpp"

namespace facetlm {

std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::lm: return "lm";
    case Algorithm::basis_select: return "basis_select";
    case Algorithm::set_select: return "set_select";
    case Algorithm::bag_select: return "bag_select";
    case Algorithm::uniform_aspect_x: return "uniform_aspect_x";
    case Algorithm::aspect_x: return "aspect_x";
    case Algorithm::interpolation: return "interpolation";
    }
    return "lm";
}

Algorithm parse_algorithm(std::string_view name)
{
    std::string normalized(name);
    std::replace(normalized.begin(), normalized.end(), '-', '_');
    for (auto a : kAllAlgorithms) {
        if (to_string(a) == normalized) {
            return a;
        }
    }
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Representation r)
{
    return r == Representation::tfidf ? "tfidf" : "lm";
}

Representation parse_representation(std::string_view name)
{
    if (name == "lm") {
        return Representation::lm;
    }
    if (name == "tfidf") {
        return Representation::tfidf;
    }
    throw ConfigError("unknown representation '" + std::string(name) + "' (expected lm|tfidf)");
}

std::size_t AlgorithmSpec::default_m(Algorithm a)
{
    switch (a) {
    case Algorithm::uniform_aspect_x:
    case Algorithm::aspect_x:
    case Algorithm::interpolation: return 10000;
    default: return 1000;
    }
}

bool AlgorithmSpec::default_rerank(Algorithm a)
{
    return a == Algorithm::bag_select || a == Algorithm::uniform_aspect_x || a == Algorithm::aspect_x;
}

void AlgorithmSpec::validate() const
{
    if (n < 1) {
        throw ConfigError("N (documents to retrieve) must be >= 1");
    }
    if (m && *m < 1) {
        throw ConfigError("m (clusters to retrieve) must be >= 1");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("interpolation lambda must lie in [0, 1]");
    }
}

struct Retriever::ClusterModels {
    std::vector<SourceShape> shapes;
    /// (cluster basis, member slot) for every cluster containing the document.
    std::vector<std::vector<std::pair<DocIndex, std::uint32_t>>> memberships;
    /// [representation][cluster][slot]
    std::array<std::vector<std::vector<double>>, 2> affinity;
};

Retriever::Retriever(CorpusIndex const& index, SmoothingSpec spec, ClusterSet const* clusters)
    : m_index(index), m_spec(spec), m_clusters(clusters)
{
    m_spec.validate();
    if (m_clusters != nullptr) {
        m_clusters->check_compatible(m_index);
    }
}

Retriever::~Retriever() = default;

Retriever::ClusterModels const& Retriever::models() const
{
    if (m_clusters == nullptr) {
        throw ConfigError("this algorithm needs a cluster set");
    }
    std::call_once(m_models_once, [this] {
        auto models = std::make_unique<ClusterModels>();
        auto const& stats = m_index.stats();
        auto const count = m_clusters->size();
        models->shapes.resize(count);
        models->memberships.resize(m_index.num_docs());
        for (auto& per_rep : models->affinity) {
            per_rep.resize(count);
        }
        std::vector<TfIdfVector> doc_vectors;
        doc_vectors.reserve(m_index.num_docs());
        for (auto const& doc : m_index.documents()) {
            doc_vectors.push_back(make_tfidf(doc.terms, stats));
        }
        detail::parallel_for(count, [&](std::size_t c) {
            auto const& cluster = m_clusters->clusters()[c];
            std::vector<std::span<TermCount const>> parts;
            for (auto d : cluster.members) {
                parts.emplace_back(m_index.document(d).terms);
            }
            UnigramLM lm(merge_counts(parts), stats, m_spec);
            auto cluster_vector = make_tfidf(lm.counts(), stats);
            models->shapes[c] = lm.shape();
            auto& lm_aff = models->affinity[static_cast<std::size_t>(Representation::lm)][c];
            auto& tfidf_aff = models->affinity[static_cast<std::size_t>(Representation::tfidf)][c];
            lm_aff.reserve(cluster.members.size());
            tfidf_aff.reserve(cluster.members.size());
            for (auto d : cluster.members) {
                lm_aff.push_back(kl_score(m_index.document(d).terms, lm));
                tfidf_aff.push_back(tfidf_score(cluster_vector, doc_vectors[d]));
            }
        });
        for (auto const& cluster : m_clusters->clusters()) {
            for (std::uint32_t slot = 0; slot < cluster.members.size(); ++slot) {
                models->memberships[cluster.members[slot]].emplace_back(cluster.basis, slot);
            }
        }
        m_models = std::move(models);
    });
    return *m_models;
}

std::vector<double> Retriever::document_scores(ResolvedQuery const& query, Representation rep) const
{
    std::vector<double> scores(m_index.num_docs(), 0.0);
    if (query.empty()) {
        return scores;
    }
    if (rep == Representation::lm) {
        auto logs = document_log_scores(query.terms, m_index, m_spec);
        std::transform(logs.begin(), logs.end(), scores.begin(), [](double x) { return std::exp(x); });
        return scores;
    }
    auto const& stats = m_index.stats();
    for (auto const& tc : query.terms) {
        double wq = tfidf_weight(tc.count, stats, tc.term);
        for (auto const& p : m_index.postings(tc.term)) {
            scores[p.doc] += wq * tfidf_weight(p.count, stats, tc.term);
        }
    }
    return scores;
}

std::vector<double> Retriever::cluster_scores(ResolvedQuery const& query, Representation rep) const
{
    auto const& mdl = models();
    auto const count = m_clusters->size();
    std::vector<double> scores(count, 0.0);
    if (query.empty()) {
        return scores;
    }
    // freq(w, c) for each query term, gathered through document postings.
    std::vector<std::vector<SourceCount>> occurrences(query.terms.size());
    std::vector<std::uint64_t> accum(count, 0);
    std::vector<DocIndex> touched;
    for (std::size_t i = 0; i < query.terms.size(); ++i) {
        for (auto const& p : m_index.postings(query.terms[i].term)) {
            for (auto const& [basis, slot] : mdl.memberships[p.doc]) {
                if (accum[basis] == 0) {
                    touched.push_back(basis);
                }
                accum[basis] += p.count;
            }
        }
        std::sort(touched.begin(), touched.end());
        occurrences[i].reserve(touched.size());
        for (auto c : touched) {
            occurrences[i].push_back({c, accum[c]});
            accum[c] = 0;
        }
        touched.clear();
    }
    if (rep == Representation::lm) {
        auto logs = kl_log_scores(query.terms, occurrences, mdl.shapes, m_index.stats(), m_spec);
        std::transform(logs.begin(), logs.end(), scores.begin(), [](double x) { return std::exp(x); });
        return scores;
    }
    auto const& stats = m_index.stats();
    for (std::size_t i = 0; i < query.terms.size(); ++i) {
        auto const term = query.terms[i].term;
        double wq = tfidf_weight(query.terms[i].count, stats, term);
        for (auto const& occ : occurrences[i]) {
            scores[occ.source] += wq * tfidf_weight(occ.count, stats, term);
        }
    }
    return scores;
}

std::vector<ScoredCluster> Retriever::rank_clusters(ResolvedQuery const& query, std::size_t m, Representation rep) const
{
    auto scores = cluster_scores(query, rep);
    std::vector<ScoredCluster> ranked;
    if (query.empty()) {
        return ranked;
    }
    ranked.reserve(scores.size());
    for (DocIndex c = 0; c < scores.size(); ++c) {
        ranked.push_back({c, scores[c]});
    }
    auto better = [&](ScoredCluster const& a, ScoredCluster const& b) {
        auto const ka = detail::tie_key(a.score);
        auto const kb = detail::tie_key(b.score);
        if (ka != kb) {
            return ka > kb;
        }
        return m_index.lexical_rank(a.basis) < m_index.lexical_rank(b.basis);
    };
    auto const keep = std::min(m, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
    ranked.resize(keep);
    return ranked;
}

double Retriever::cluster_affinity(DocIndex basis, std::size_t slot, Representation rep) const
{
    return models().affinity[static_cast<std::size_t>(rep)].at(basis).at(slot);
}

void Retriever::sort_by_score(std::vector<DocIndex>& docs, std::span<double const> scores) const
{
    std::sort(docs.begin(), docs.end(), [&](DocIndex a, DocIndex b) {
        auto const ka = detail::tie_key(scores[a]);
        auto const kb = detail::tie_key(scores[b]);
        if (ka != kb) {
            return ka > kb;
        }
        return m_index.lexical_rank(a) < m_index.lexical_rank(b);
    });
}

RankedList Retriever::to_list(std::string const& query_id, std::span<DocIndex const> docs,
                              std::span<double const> scores) const
{
    RankedList list;
    list.query_id = query_id;
    list.entries.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        list.entries.push_back({m_index.document(docs[i]).id, scores[docs[i]], i + 1});
    }
    return list;
}

RankedList Retriever::run(AlgorithmSpec const& algo, ResolvedQuery const& query, RetrievalTrace* trace) const
{
    algo.validate();
    if (trace != nullptr) {
        *trace = RetrievalTrace{};
        trace->empty_query = query.empty();
    }
    if (algo.uses_clusters()) {
        (void)models();
    }
    if (query.empty()) {
        return RankedList{query.id, {}};
    }

    auto const rep = algo.representation;
    auto const n_docs = m_index.num_docs();
    auto const doc_scores = document_scores(query, rep);
    std::vector<double> scores(n_docs, 0.0);
    std::vector<DocIndex> candidates;
    std::vector<std::vector<DocIndex>> facets;
    if (trace != nullptr) {
        facets.resize(n_docs);
    }

    if (algo.name == Algorithm::lm) {
        for (DocIndex d = 0; d < n_docs; ++d) {
            if (doc_scores[d] > 0.0) {
                scores[d] = doc_scores[d];
                candidates.push_back(d);
            }
        }
    } else {
        auto const& mdl = models();
        auto const configured_m = algo.configured_m();
        auto top = rank_clusters(query, configured_m, rep);
        std::size_t used = top.size();
        std::vector<std::uint32_t> multiplicity(n_docs, 0);
        std::vector<double> aspect_sum(n_docs, 0.0);
        std::vector<double> posterior_mass(n_docs, 0.0);

        auto record_facet = [&](DocIndex d, DocIndex basis) {
            if (trace != nullptr) {
                facets[d].push_back(basis);
            }
        };

        switch (algo.name) {
        case Algorithm::basis_select: {
            // Stop at the first cluster that brings the N-th non-zero document.
            std::size_t count = 0;
            used = 0;
            for (std::size_t i = 0; i < top.size() && count < algo.n; ++i) {
                ++used;
                auto d = top[i].basis;
                if (doc_scores[d] > 0.0) {
                    scores[d] = doc_scores[d];
                    ++count;
                }
                record_facet(d, d);
            }
            break;
        }
        case Algorithm::set_select: {
            // First-in first-out over ranked clusters; within the last admitted
            // cluster, members closest to its basis go first.
            std::vector<bool> admitted(n_docs, false);
            std::size_t count = 0;
            used = 0;
            for (std::size_t i = 0; i < top.size() && count < algo.n; ++i) {
                ++used;
                for (auto d : m_clusters->cluster_of(top[i].basis).members) {
                    if (count >= algo.n) {
                        break;
                    }
                    if (!admitted[d] && doc_scores[d] > 0.0) {
                        admitted[d] = true;
                        ++count;
                        scores[d] = doc_scores[d];
                    }
                }
            }
            if (trace != nullptr) {
                for (std::size_t i = 0; i < used; ++i) {
                    for (auto d : m_clusters->cluster_of(top[i].basis).members) {
                        if (admitted[d]) {
                            record_facet(d, top[i].basis);
                        }
                    }
                }
            }
            break;
        }
        default: {
            for (std::size_t i = 0; i < used; ++i) {
                auto const& cluster = m_clusters->cluster_of(top[i].basis);
                auto const& affinity = mdl.affinity[static_cast<std::size_t>(rep)][cluster.basis];
                for (std::size_t slot = 0; slot < cluster.members.size(); ++slot) {
                    auto d = cluster.members[slot];
                    ++multiplicity[d];
                    record_facet(d, cluster.basis);
                    switch (algo.name) {
                    case Algorithm::uniform_aspect_x: aspect_sum[d] += top[i].score; break;
                    case Algorithm::aspect_x:
                    case Algorithm::interpolation:
                        aspect_sum[d] += top[i].score * affinity[slot];
                        posterior_mass[d] += affinity[slot];
                        break;
                    default: break;
                    }
                }
            }
            for (DocIndex d = 0; d < n_docs; ++d) {
                // A document outside every top cluster still has its own term under interpolation.
                if (multiplicity[d] == 0 && algo.name != Algorithm::interpolation) {
                    continue;
                }
                double sum = aspect_sum[d];
                if (algo.normalize_cluster_posteriors && posterior_mass[d] > 0.0) {
                    sum /= posterior_mass[d];
                }
                switch (algo.name) {
                case Algorithm::bag_select: scores[d] = doc_scores[d] * multiplicity[d]; break;
                case Algorithm::uniform_aspect_x:
                case Algorithm::aspect_x: scores[d] = sum; break;
                case Algorithm::interpolation:
                    scores[d] = algo.lambda * doc_scores[d] + (1.0 - algo.lambda) * sum;
                    break;
                default: break;
                }
            }
            break;
        }
        }
        for (DocIndex d = 0; d < n_docs; ++d) {
            if (scores[d] > 0.0) {
                candidates.push_back(d);
            }
        }
        if (trace != nullptr) {
            trace->top_clusters = std::move(top);
            trace->clusters_used = used;
        }
    }

    sort_by_score(candidates, scores);
    if (candidates.size() > algo.n) {
        candidates.resize(algo.n);
    }
    std::vector<double> pre_rerank;
    if (trace != nullptr) {
        pre_rerank = scores;
    }
    if (algo.effective_rerank()) {
        sort_by_score(candidates, doc_scores);
        scores = doc_scores;
    }
    if (trace != nullptr) {
        trace->docs.reserve(candidates.size());
        for (auto d : candidates) {
            trace->docs.push_back({d, std::move(facets[d]), pre_rerank[d], doc_scores[d]});
        }
    }
    return to_list(query.id, candidates, scores);
}

RankedList Retriever::rerank(RankedList const& list, ResolvedQuery const& query, Representation rep) const
{
    auto const doc_scores = document_scores(query, rep);
    std::vector<DocIndex> docs;
    docs.reserve(list.entries.size());
    for (auto const& e : list.entries) {
        auto d = m_index.find_document(e.doc_id);
        if (!d) {
            throw ConfigError("ranked list refers to unknown document '" + e.doc_id + "'");
        }
        docs.push_back(*d);
    }
    sort_by_score(docs, doc_scores);
    return to_list(list.query_id, docs, doc_scores);
}

std::vector<ScoredCluster> rank_clusters(ResolvedQuery const& query, ClusterSet const& clusters,
                                         CorpusIndex const& index, SmoothingSpec const& spec, std::size_t m)
{
    if (m < 1) {
        throw ConfigError("m must be >= 1");
    }
    Retriever retriever(index, spec, &clusters);
    return retriever.rank_clusters(query, m, Representation::lm);
}

RankedList run_algorithm(AlgorithmSpec const& algo, ResolvedQuery const& query, CorpusIndex const& index,
                         ClusterSet const* clusters, SmoothingSpec const& spec)
{
    Retriever retriever(index, spec, clusters);
    return retriever.run(algo, query);
}

RankedList rerank_by_doc_lm(RankedList const& list, ResolvedQuery const& query, CorpusIndex const& index,
                            SmoothingSpec const& spec, Representation rep)
{
    Retriever retriever(index, spec);
    return retriever.rerank(list, query, rep);
}

BatchResult batch_search(AlgorithmSpec const& algo, std::span<Query const> queries, Retriever const& retriever)
{
    algo.validate();
    BatchResult result;
    result.lists.resize(queries.size());
    std::vector<ResolvedQuery> resolved;
    resolved.reserve(queries.size());
    for (auto const& q : queries) {
        resolved.push_back(resolve(q, retriever.index()));
        result.dropped_tokens += resolved.back().dropped;
        if (resolved.back().empty()) {
            result.empty_queries.push_back(q.id);
        }
    }
    if (algo.uses_clusters() && retriever.index().num_docs() > 0) {
        // Build shared cluster statistics before fanning out.
        (void)retriever.cluster_affinity(0, 0, algo.representation);
    }
    detail::parallel_for(queries.size(), [&](std::size_t i) { result.lists[i] = retriever.run(algo, resolved[i]); });
    return result;
}

}  // namespace facetlm
