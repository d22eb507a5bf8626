#pragma once

#include <span>
#include <vector>

#include "facetlm/corpus.hpp"
#include "facetlm/smoothing.hpp"

namespace facetlm {

/// Smoothed unigram model induced from a bag of term counts. Holds a pointer
/// to the collection statistics, which must outlive the model.
class UnigramLM {
  public:
    UnigramLM(std::vector<TermCount> counts, CorpusStats const& stats, SmoothingSpec spec);

    /// Throws ConfigError for terms outside the vocabulary.
    [[nodiscard]] double prob(TermId term) const;
    [[nodiscard]] double log_prob(TermId term) const;
    [[nodiscard]] std::uint64_t count(TermId term) const;

    [[nodiscard]] SourceShape shape() const noexcept { return m_shape; }
    [[nodiscard]] std::span<TermCount const> counts() const noexcept { return m_counts; }
    [[nodiscard]] SmoothingSpec const& spec() const noexcept { return m_spec; }
    [[nodiscard]] CorpusStats const& stats() const noexcept { return *m_stats; }

  private:
    std::vector<TermCount> m_counts;
    SourceShape m_shape;
    CorpusStats const* m_stats;
    SmoothingSpec m_spec;
};

[[nodiscard]] inline double smoothed_prob(UnigramLM const& lm, TermId term)
{
    return lm.prob(term);
}

[[nodiscard]] UnigramLM induce_doc_lm(Document const& doc, CorpusStats const& stats, SmoothingSpec const& spec);

/// Model of the concatenation of `members`. Throws ConfigError on an unknown document.
[[nodiscard]] UnigramLM
induce_cluster_lm(std::span<DocIndex const> members, CorpusIndex const& index, SmoothingSpec const& spec);

/// Sum of term counts over several sorted count vectors.
[[nodiscard]] std::vector<TermCount> merge_counts(std::span<std::span<TermCount const> const> parts);

/// -D(p_ML_target || lm) in nats, or -inf when the model gives a target term
/// zero mass. Requires a non-empty target.
[[nodiscard]] double kl_log_score(std::span<TermCount const> target, UnigramLM const& lm);

/// exp(-D(p_ML_target || lm)) in (0, 1]; 0 for an empty target.
[[nodiscard]] double kl_score(std::span<TermCount const> target, UnigramLM const& lm);
[[nodiscard]] inline double kl_score(ResolvedQuery const& query, UnigramLM const& lm)
{
    return kl_score(query.terms, lm);
}
[[nodiscard]] inline double kl_score(Document const& doc, UnigramLM const& lm)
{
    return kl_score(doc.terms, lm);
}

/// D(p || q) = sum p ln(p / q) over dense distributions of equal length.
/// Throws Error when q has no mass where p does.
[[nodiscard]] double kl_divergence(std::span<double const> p, std::span<double const> q);

/// One source (document or cluster) containing a target term.
struct SourceCount {
    std::uint32_t source;
    std::uint64_t count;
};

/// -D(p_ML_target || model_s) for every source s at once. `occurrences[i]`
/// lists the sources containing target term i with their counts; every other
/// source contributes through its unseen mass only. Cost is linear in the
/// number of sources plus the occurrence lists.
[[nodiscard]] std::vector<double> kl_log_scores(std::span<TermCount const> target,
                                                std::span<std::vector<SourceCount> const> occurrences,
                                                std::span<SourceShape const> sources, CorpusStats const& stats,
                                                SmoothingSpec const& spec);

/// kl_log_scores() with every indexed document as a source.
[[nodiscard]] std::vector<double>
document_log_scores(std::span<TermCount const> target, CorpusIndex const& index, SmoothingSpec const& spec);

[[nodiscard]] std::vector<SourceShape> document_shapes(CorpusIndex const& index);

}  // namespace facetlm
