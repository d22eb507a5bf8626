#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "facetlm/corpus.hpp"
#include "facetlm/language_model.hpp"
#include "facetlm/smoothing.hpp"

namespace facetlm {

/// A document and its nearest neighbours. members[0] is the basis; the rest
/// are ordered by ascending divergence from it, ties by document id.
struct Cluster {
    DocIndex basis = 0;
    std::vector<DocIndex> members;

    friend bool operator==(Cluster const&, Cluster const&) = default;
};

/// Query-independent overlapping clusters, one per document, stored by basis.
class ClusterSet {
  public:
    ClusterSet(std::vector<Cluster> clusters, std::size_t k, std::uint64_t corpus_fingerprint,
               std::optional<SmoothingSpec> built_with = std::nullopt);

    [[nodiscard]] std::span<Cluster const> clusters() const noexcept { return m_clusters; }
    [[nodiscard]] Cluster const& cluster_of(DocIndex basis) const { return m_clusters.at(basis); }
    [[nodiscard]] std::size_t size() const noexcept { return m_clusters.size(); }
    [[nodiscard]] std::size_t k() const noexcept { return m_k; }
    [[nodiscard]] std::uint64_t corpus_fingerprint() const noexcept { return m_fingerprint; }
    /// Known for sets built in-process; not recorded in cluster files.
    [[nodiscard]] std::optional<SmoothingSpec> const& built_with() const noexcept { return m_built_with; }

    /// Throws MismatchError if the set does not belong to `index`.
    void check_compatible(CorpusIndex const& index) const;

    friend bool operator==(ClusterSet const& a, ClusterSet const& b)
    {
        return a.m_k == b.m_k && a.m_fingerprint == b.m_fingerprint && a.m_clusters == b.m_clusters;
    }

  private:
    std::vector<Cluster> m_clusters;
    std::size_t m_k;
    std::uint64_t m_fingerprint;
    std::optional<SmoothingSpec> m_built_with;
};

/// The `count` documents other than `basis` with the smallest
/// D(p_ML_basis || p_d'), ascending, ties by document id.
/// Throws ConfigError when count > num_docs - 1.
[[nodiscard]] std::vector<DocIndex>
nearest_neighbors(DocIndex basis, CorpusIndex const& index, SmoothingSpec const& spec, std::size_t count);

/// One cluster of min(k, num_docs) documents per document. Throws ConfigError for k < 1.
[[nodiscard]] ClusterSet build_clusters(CorpusIndex const& index, std::size_t k, SmoothingSpec const& spec);

[[nodiscard]] inline UnigramLM induce_cluster_lm(Cluster const& cluster, CorpusIndex const& index,
                                                 SmoothingSpec const& spec)
{
    return induce_cluster_lm(std::span<DocIndex const>(cluster.members), index, spec);
}

/// Header `#facetlm-clusters k=<k> fingerprint=<hex>`, then
/// `<basis id><TAB><member id>,<member id>,...` per cluster in corpus order.
void write_clusters(ClusterSet const& set, CorpusIndex const& index, std::ostream& out);
void save_clusters(ClusterSet const& set, CorpusIndex const& index, std::filesystem::path const& path);

/// Validates the header, the fingerprint against `index`, and every record.
[[nodiscard]] ClusterSet load_clusters(std::filesystem::path const& path, CorpusIndex const& index);
[[nodiscard]] ClusterSet read_clusters(std::istream& in, CorpusIndex const& index, std::string const& source);

}  // namespace facetlm
