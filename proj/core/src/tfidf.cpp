#include "facetlm/tfidf.hpp"

#include <cmath>

namespace facetlm {

double tfidf_weight(std::uint64_t freq, CorpusStats const& stats, TermId term)
{
    auto const df = stats.doc_freq[term];
    return std::log(1.0 + static_cast<double>(freq))
        * std::log(static_cast<double>(stats.num_docs) / static_cast<double>(df));
}

TfIdfVector make_tfidf(std::span<TermCount const> counts, CorpusStats const& stats)
{
    TfIdfVector v;
    v.weights.reserve(counts.size());
    for (auto const& tc : counts) {
        if (tc.count > 0 && stats.doc_freq[tc.term] > 0) {
            v.weights.emplace_back(tc.term, tfidf_weight(tc.count, stats, tc.term));
        }
    }
    return v;
}

double tfidf_score(TfIdfVector const& query, TfIdfVector const& item)
{
    double sum = 0.0;
    auto qi = query.weights.begin();
    auto ii = item.weights.begin();
    while (qi != query.weights.end() && ii != item.weights.end()) {
        if (qi->first < ii->first) {
            ++qi;
        } else if (ii->first < qi->first) {
            ++ii;
        } else {
            sum += qi->second * ii->second;
            ++qi;
            ++ii;
        }
    }
    return sum;
}

}  // namespace facetlm
