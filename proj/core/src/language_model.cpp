#include "facetlm/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "facetlm/error.hpp"

namespace facetlm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SourceShape shape_of(std::span<TermCount const> counts)
{
    SourceShape shape;
    for (auto const& tc : counts) {
        shape.length += tc.count;
    }
    shape.unique_terms = counts.size();
    return shape;
}

std::uint64_t target_length(std::span<TermCount const> target)
{
    std::uint64_t len = 0;
    for (auto const& tc : target) {
        len += tc.count;
    }
    return len;
}

}  // namespace

UnigramLM::UnigramLM(std::vector<TermCount> counts, CorpusStats const& stats, SmoothingSpec spec)
    : m_counts(std::move(counts)), m_shape(shape_of(m_counts)), m_stats(&stats), m_spec(spec)
{
    m_spec.validate();
    if (m_shape.length == 0) {
        throw ConfigError("cannot induce a language model from an empty text");
    }
    for (auto const& tc : m_counts) {
        if (tc.term >= stats.vocabulary_size()) {
            throw ConfigError("term id " + std::to_string(tc.term) + " outside the vocabulary");
        }
    }
}

std::uint64_t UnigramLM::count(TermId term) const
{
    auto it = std::lower_bound(m_counts.begin(), m_counts.end(), term,
                               [](TermCount const& tc, TermId t) { return tc.term < t; });
    return it != m_counts.end() && it->term == term ? it->count : 0;
}

double UnigramLM::prob(TermId term) const
{
    if (term >= m_stats->vocabulary_size()) {
        throw ConfigError("term id " + std::to_string(term) + " outside the vocabulary");
    }
    return smoothed_probability(m_spec, count(term), m_shape, m_stats->collection_prob(term));
}

double UnigramLM::log_prob(TermId term) const
{
    return std::log(prob(term));
}

UnigramLM induce_doc_lm(Document const& doc, CorpusStats const& stats, SmoothingSpec const& spec)
{
    return UnigramLM(doc.terms, stats, spec);
}

std::vector<TermCount> merge_counts(std::span<std::span<TermCount const> const> parts)
{
    std::vector<TermCount> all;
    for (auto part : parts) {
        all.insert(all.end(), part.begin(), part.end());
    }
    std::sort(all.begin(), all.end(), [](auto const& a, auto const& b) { return a.term < b.term; });
    std::vector<TermCount> merged;
    for (auto const& tc : all) {
        if (!merged.empty() && merged.back().term == tc.term) {
            merged.back().count += tc.count;
        } else {
            merged.push_back(tc);
        }
    }
    return merged;
}

UnigramLM induce_cluster_lm(std::span<DocIndex const> members, CorpusIndex const& index, SmoothingSpec const& spec)
{
    std::vector<std::span<TermCount const>> parts;
    parts.reserve(members.size());
    for (auto d : members) {
        if (d >= index.num_docs()) {
            throw ConfigError("cluster member " + std::to_string(d) + " is not in the index");
        }
        parts.emplace_back(index.document(d).terms);
    }
    return UnigramLM(merge_counts(parts), index.stats(), spec);
}

double kl_log_score(std::span<TermCount const> target, UnigramLM const& lm)
{
    auto const len = static_cast<double>(target_length(target));
    if (len == 0.0) {
        throw ConfigError("KL score of an empty target");
    }
    double divergence = 0.0;
    for (auto const& tc : target) {
        double p = static_cast<double>(tc.count) / len;
        double q = lm.prob(tc.term);
        if (q <= 0.0) {
            return kNegInf;
        }
        divergence += p * (std::log(p) - std::log(q));
    }
    return -divergence;
}

double kl_score(std::span<TermCount const> target, UnigramLM const& lm)
{
    if (target_length(target) == 0) {
        return 0.0;
    }
    return std::exp(kl_log_score(target, lm));
}

double kl_divergence(std::span<double const> p, std::span<double const> q)
{
    if (p.size() != q.size()) {
        throw ConfigError("kl_divergence: distributions differ in length");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            throw Error("kl_divergence: q has zero mass on the support of p");
        }
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

std::vector<double> kl_log_scores(std::span<TermCount const> target,
                                  std::span<std::vector<SourceCount> const> occurrences,
                                  std::span<SourceShape const> sources, CorpusStats const& stats,
                                  SmoothingSpec const& spec)
{
    if (occurrences.size() != target.size()) {
        throw ConfigError("kl_log_scores: one occurrence list per target term required");
    }
    auto const len = static_cast<double>(target_length(target));
    if (len == 0.0) {
        throw ConfigError("KL score of an empty target");
    }

    // -D = sum_w p(w) ln p_s(w) - H. Unseen terms contribute
    // p(w) (ln a_s + ln pC(w)); seen terms add a correction on top of that.
    double entropy_term = 0.0;
    double background = 0.0;
    std::vector<double> weight(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        weight[i] = static_cast<double>(target[i].count) / len;
        entropy_term += weight[i] * std::log(weight[i]);
        background += weight[i] * std::log(stats.collection_prob(target[i].term));
    }

    std::vector<double> log_alpha(sources.size());
    bool any_zero_alpha = false;
    for (std::size_t s = 0; s < sources.size(); ++s) {
        double a = unseen_coefficient(spec, sources[s]);
        any_zero_alpha = any_zero_alpha || a <= 0.0;
        log_alpha[s] = a > 0.0 ? std::log(a) : kNegInf;
    }

    std::vector<double> correction(sources.size(), 0.0);
    // Sources without unseen mass (Jelinek-Mercer at lambda = 1) score from
    // their seen terms alone, and only when they contain every target term.
    std::vector<double> seen_only;
    std::vector<std::uint32_t> matched;
    if (any_zero_alpha) {
        seen_only.assign(sources.size(), 0.0);
        matched.assign(sources.size(), 0);
    }
    for (std::size_t i = 0; i < target.size(); ++i) {
        double pc = stats.collection_prob(target[i].term);
        double log_pc = std::log(pc);
        for (auto const& occ : occurrences[i]) {
            double log_seen = std::log(smoothed_probability(spec, occ.count, sources[occ.source], pc));
            if (any_zero_alpha && log_alpha[occ.source] == kNegInf) {
                seen_only[occ.source] += weight[i] * log_seen;
                ++matched[occ.source];
            } else {
                correction[occ.source] += weight[i] * (log_seen - log_alpha[occ.source] - log_pc);
            }
        }
    }

    std::vector<double> scores(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
        if (log_alpha[s] == kNegInf) {
            scores[s] = matched[s] == target.size() ? seen_only[s] - entropy_term : kNegInf;
        } else {
            scores[s] = correction[s] + background + log_alpha[s] - entropy_term;
        }
    }
    return scores;
}

std::vector<SourceShape> document_shapes(CorpusIndex const& index)
{
    std::vector<SourceShape> shapes;
    shapes.reserve(index.num_docs());
    for (auto const& doc : index.documents()) {
        shapes.push_back({doc.length, doc.terms.size()});
    }
    return shapes;
}

std::vector<double> document_log_scores(std::span<TermCount const> target, CorpusIndex const& index,
                                        SmoothingSpec const& spec)
{
    std::vector<std::vector<SourceCount>> occurrences(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        auto postings = index.postings(target[i].term);
        occurrences[i].reserve(postings.size());
        for (auto const& p : postings) {
            occurrences[i].push_back({p.doc, p.count});
        }
    }
    auto shapes = document_shapes(index);
    return kl_log_scores(target, occurrences, shapes, index.stats(), spec);
}

}  // namespace facetlm
