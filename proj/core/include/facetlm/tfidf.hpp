#pragma once

#include <span>
#include <utility>
#include <vector>

#include "facetlm/corpus.hpp"

namespace facetlm {

/// Sparse log-tf.idf vector, weight(t) = ln(1 + freq(t)) * ln(N / df(t)),
/// sorted by term id.
struct TfIdfVector {
    std::vector<std::pair<TermId, double>> weights;
};

[[nodiscard]] double tfidf_weight(std::uint64_t freq, CorpusStats const& stats, TermId term);

[[nodiscard]] TfIdfVector make_tfidf(std::span<TermCount const> counts, CorpusStats const& stats);

/// Inner product over shared terms.
[[nodiscard]] double tfidf_score(TfIdfVector const& query, TfIdfVector const& item);

}  // namespace facetlm
