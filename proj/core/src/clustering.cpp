#include "facetlm/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "facetlm/error.hpp"
#include "parallel.hpp"
#include "ranking.hpp"

namespace facetlm {

ClusterSet::ClusterSet(std::vector<Cluster> clusters, std::size_t k, std::uint64_t corpus_fingerprint,
                       std::optional<SmoothingSpec> built_with)
    : m_clusters(std::move(clusters)), m_k(k), m_fingerprint(corpus_fingerprint), m_built_with(built_with)
{
    if (k < 1) {
        throw ConfigError("cluster size k must be >= 1");
    }
}

void ClusterSet::check_compatible(CorpusIndex const& index) const
{
    if (m_fingerprint != index.fingerprint()) {
        throw MismatchError("clusters were built for corpus fingerprint " + to_hex(m_fingerprint)
                            + " but the index has fingerprint " + index.fingerprint_hex());
    }
    if (m_clusters.size() != index.num_docs()) {
        throw MismatchError("cluster set has " + std::to_string(m_clusters.size()) + " clusters for "
                            + std::to_string(index.num_docs()) + " documents");
    }
}

std::vector<DocIndex>
nearest_neighbors(DocIndex basis, CorpusIndex const& index, SmoothingSpec const& spec, std::size_t count)
{
    if (basis >= index.num_docs()) {
        throw ConfigError("basis document " + std::to_string(basis) + " is not in the index");
    }
    if (count + 1 > index.num_docs()) {
        throw ConfigError("cannot take " + std::to_string(count) + " neighbours in a corpus of "
                          + std::to_string(index.num_docs()) + " documents");
    }
    if (count == 0) {
        return {};
    }
    // Larger log score means smaller divergence.
    auto scores = document_log_scores(index.document(basis).terms, index, spec);
    for (auto& s : scores) {
        s = detail::tie_key(s);
    }
    std::vector<DocIndex> candidates;
    candidates.reserve(index.num_docs() - 1);
    for (DocIndex d = 0; d < index.num_docs(); ++d) {
        if (d != basis) {
            candidates.push_back(d);
        }
    }
    auto closer = [&](DocIndex a, DocIndex b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return index.lexical_rank(a) < index.lexical_rank(b);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count), candidates.end(),
                      closer);
    candidates.resize(count);
    return candidates;
}

ClusterSet build_clusters(CorpusIndex const& index, std::size_t k, SmoothingSpec const& spec)
{
    if (k < 1) {
        throw ConfigError("cluster size k must be >= 1");
    }
    spec.validate();
    auto const size = std::min(k, index.num_docs());
    std::vector<Cluster> clusters(index.num_docs());
    detail::parallel_for(index.num_docs(), [&](std::size_t i) {
        auto basis = static_cast<DocIndex>(i);
        auto& cluster = clusters[i];
        cluster.basis = basis;
        cluster.members.reserve(size);
        cluster.members.push_back(basis);
        for (auto d : nearest_neighbors(basis, index, spec, size - 1)) {
            cluster.members.push_back(d);
        }
    });
    return ClusterSet(std::move(clusters), k, index.fingerprint(), spec);
}

void write_clusters(ClusterSet const& set, CorpusIndex const& index, std::ostream& out)
{
    set.check_compatible(index);
    out << "#facetlm-clusters k=" << set.k() << " fingerprint=" << to_hex(set.corpus_fingerprint()) << '\n';
    for (auto const& cluster : set.clusters()) {
        out << index.document(cluster.basis).id << '\t';
        for (std::size_t i = 0; i < cluster.members.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << index.document(cluster.members[i]).id;
        }
        out << '\n';
    }
}

void save_clusters(ClusterSet const& set, CorpusIndex const& index, std::filesystem::path const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write cluster file: " + path.string());
    }
    write_clusters(set, index, out);
    if (!out) {
        throw IoError("failed writing cluster file: " + path.string());
    }
}

ClusterSet read_clusters(std::istream& in, CorpusIndex const& index, std::string const& source)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(source, 1, "empty cluster file");
    }
    std::size_t k = 0;
    std::string fingerprint;
    {
        std::istringstream header(line);
        std::string magic;
        std::string k_field;
        std::string fp_field;
        std::string extra;
        header >> magic >> k_field >> fp_field;
        if (magic != "#facetlm-clusters" || k_field.rfind("k=", 0) != 0 || fp_field.rfind("fingerprint=", 0) != 0
            || (header >> extra)) {
            throw FormatError(source, 1, "expected '#facetlm-clusters k=<k> fingerprint=<hex>'");
        }
        try {
            std::size_t used = 0;
            k = std::stoul(k_field.substr(2), &used);
            if (used != k_field.size() - 2) {
                throw std::invalid_argument("k");
            }
        } catch (std::exception const&) {
            throw FormatError(source, 1, "malformed k value '" + k_field + "'");
        }
        if (k < 1) {
            throw FormatError(source, 1, "k must be >= 1");
        }
        fingerprint = fp_field.substr(12);
    }
    if (fingerprint != index.fingerprint_hex()) {
        throw MismatchError(source + ": clusters were built for corpus fingerprint " + fingerprint
                            + " but the index has fingerprint " + index.fingerprint_hex());
    }

    auto const expected_size = std::min(k, index.num_docs());
    std::vector<Cluster> clusters(index.num_docs());
    std::vector<bool> seen(index.num_docs(), false);
    std::size_t line_no = 1;
    std::size_t records = 0;
    auto lookup = [&](std::string_view id) {
        auto d = index.find_document(id);
        if (!d) {
            throw FormatError(source, line_no, "unknown document id '" + std::string(id) + "'");
        }
        return *d;
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError(source, line_no, "expected <basis id><TAB><member ids>");
        }
        auto basis = lookup(std::string_view(line).substr(0, tab));
        if (seen[basis]) {
            throw FormatError(source, line_no, "second cluster for basis '" + line.substr(0, tab) + "'");
        }
        seen[basis] = true;
        Cluster cluster{basis, {}};
        std::string_view rest = std::string_view(line).substr(tab + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            auto comma = rest.find(',', start);
            auto id = rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            cluster.members.push_back(lookup(id));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (cluster.members.size() != expected_size) {
            throw FormatError(source, line_no, "cluster has " + std::to_string(cluster.members.size())
                                                   + " members, expected " + std::to_string(expected_size));
        }
        if (cluster.members.front() != basis) {
            throw FormatError(source, line_no, "first member must be the basis document");
        }
        auto sorted = cluster.members;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw FormatError(source, line_no, "duplicate member in cluster");
        }
        clusters[basis] = std::move(cluster);
        ++records;
    }
    if (records != index.num_docs()) {
        throw FormatError(source, line_no + 1, "file ends after " + std::to_string(records) + " clusters, expected "
                                                   + std::to_string(index.num_docs()));
    }
    return ClusterSet(std::move(clusters), k, index.fingerprint());
}

ClusterSet load_clusters(std::filesystem::path const& path, CorpusIndex const& index)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open cluster file: " + path.string());
    }
    return read_clusters(in, index, path.string());
}

}  // namespace facetlm
