#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facetlm/tokenizer.hpp"

namespace facetlm {

using TermId = std::uint32_t;
using DocIndex = std::uint32_t;

/// freq(term, item) for one item; vectors of these are kept sorted by term.
struct TermCount {
    TermId term;
    std::uint32_t count;

    friend bool operator==(TermCount const&, TermCount const&) = default;
};

struct Document {
    std::string id;
    std::vector<TermCount> terms;
    std::uint64_t length = 0;
};

/// A query in surface form; terms are resolved against an index with resolve().
struct Query {
    std::string id;
    std::map<std::string, std::uint32_t> term_counts;
    std::uint64_t length = 0;

    /// Queries that tokenize to nothing are kept and produce empty rankings.
    [[nodiscard]] bool empty() const noexcept { return length == 0; }
};

/// A query restricted to the index vocabulary. Out-of-vocabulary tokens are
/// dropped; `dropped` counts them.
struct ResolvedQuery {
    std::string id;
    std::vector<TermCount> terms;
    std::uint64_t length = 0;
    std::uint64_t dropped = 0;

    [[nodiscard]] bool empty() const noexcept { return length == 0; }
};

struct Posting {
    DocIndex doc;
    std::uint32_t count;
};

/// Collection-wide statistics, indexed by TermId.
struct CorpusStats {
    std::vector<std::uint64_t> collection_counts;
    std::vector<std::uint32_t> doc_freq;
    std::uint64_t total_tokens = 0;
    std::size_t num_docs = 0;

    /// Maximum-likelihood collection model p_ML_C(t).
    [[nodiscard]] double collection_prob(TermId t) const
    {
        return static_cast<double>(collection_counts[t]) / static_cast<double>(total_tokens);
    }
    [[nodiscard]] std::size_t vocabulary_size() const noexcept { return collection_counts.size(); }
};

struct RawDocument {
    std::string id;
    std::string text;
};

struct DocumentCounts {
    std::string id;
    std::map<std::string, std::uint32_t> counts;
};

/// Tokenized documents, vocabulary, postings and statistics. Immutable once
/// built; safe for concurrent readers.
///
/// Term ids follow byte-wise lexicographic order of the term strings and
/// documents keep their input order, so equal input gives an equal index.
class CorpusIndex {
  public:
    /// Documents with no terms are skipped and counted in skipped_empty().
    /// Throws FormatError on empty, duplicate, or unusable ids (ids may not
    /// contain whitespace or commas).
    [[nodiscard]] static CorpusIndex
    build(std::vector<DocumentCounts> docs, TokenizationConfig config, std::size_t skipped_before = 0);

    [[nodiscard]] static CorpusIndex from_texts(std::span<RawDocument const> docs, TokenizationConfig const& config);

    [[nodiscard]] std::size_t num_docs() const noexcept { return m_documents.size(); }
    [[nodiscard]] std::vector<Document> const& documents() const noexcept { return m_documents; }
    [[nodiscard]] Document const& document(DocIndex d) const { return m_documents.at(d); }
    [[nodiscard]] CorpusStats const& stats() const noexcept { return m_stats; }
    [[nodiscard]] TokenizationConfig const& config() const noexcept { return m_config; }
    [[nodiscard]] std::vector<std::string> const& vocabulary() const noexcept { return m_vocabulary; }
    [[nodiscard]] std::string const& term(TermId t) const { return m_vocabulary.at(t); }
    [[nodiscard]] std::optional<TermId> term_id(std::string_view term) const;
    [[nodiscard]] std::span<Posting const> postings(TermId t) const { return m_postings.at(t); }
    [[nodiscard]] std::optional<DocIndex> find_document(std::string_view id) const;

    /// Position of the document id in lexicographic order; used for tie-breaking.
    [[nodiscard]] std::uint32_t lexical_rank(DocIndex d) const { return m_lexical_rank[d]; }

    [[nodiscard]] std::size_t skipped_empty() const noexcept { return m_skipped_empty; }

    /// FNV-1a 64 over the canonical serialized form (config, vocabulary, documents).
    [[nodiscard]] std::uint64_t fingerprint() const noexcept { return m_fingerprint; }
    [[nodiscard]] std::string fingerprint_hex() const;

    CorpusIndex(CorpusIndex&&) noexcept = default;
    CorpusIndex& operator=(CorpusIndex&&) noexcept = default;
    // The lookup tables hold views into the owned strings.
    CorpusIndex(CorpusIndex const&) = delete;
    CorpusIndex& operator=(CorpusIndex const&) = delete;
    ~CorpusIndex() = default;

  private:
    CorpusIndex() = default;

    TokenizationConfig m_config;
    std::vector<std::string> m_vocabulary;
    std::unordered_map<std::string_view, TermId> m_term_ids;
    std::vector<Document> m_documents;
    std::unordered_map<std::string_view, DocIndex> m_doc_ids;
    std::vector<std::uint32_t> m_lexical_rank;
    std::vector<std::vector<Posting>> m_postings;
    CorpusStats m_stats;
    std::size_t m_skipped_empty = 0;
    std::uint64_t m_fingerprint = 0;
};

[[nodiscard]] std::string to_hex(std::uint64_t value);

/// Counts the tokens of `text` under `config`.
[[nodiscard]] std::map<std::string, std::uint32_t> count_terms(std::string_view text, TokenizationConfig const& config);

/// JSON-lines corpus: `{"id": "...", "text": "..."}` per line.
[[nodiscard]] CorpusIndex ingest_corpus(std::filesystem::path const& path, TokenizationConfig const& config);

/// `<qid><TAB><query text>` per line; file order is preserved.
[[nodiscard]] std::vector<Query> ingest_queries(std::filesystem::path const& path, TokenizationConfig const& config);

[[nodiscard]] Query make_query(std::string id, std::string_view text, TokenizationConfig const& config);

[[nodiscard]] ResolvedQuery resolve(Query const& query, CorpusIndex const& index);

/// Flat text serialization of an index. See README for the layout.
void write_index(CorpusIndex const& index, std::ostream& out);
void save_index(CorpusIndex const& index, std::filesystem::path const& path);
[[nodiscard]] CorpusIndex load_index(std::filesystem::path const& path);

namespace detail {
    /// The fingerprinted part of the serialized index.
    void write_index_body(CorpusIndex const& index, std::ostream& out);
    [[nodiscard]] std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
}  // namespace detail

}  // namespace facetlm
