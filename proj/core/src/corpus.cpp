#include "facetlm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "facetlm/error.hpp"

namespace facetlm {
namespace {

bool usable_id(std::string_view id)
{
    if (id.empty()) {
        return false;
    }
    return std::none_of(id.begin(), id.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == ',';
    });
}

}  // namespace

std::string to_hex(std::uint64_t value)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

namespace detail {
    std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed)
    {
        std::uint64_t h = seed;
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
}  // namespace detail

CorpusIndex CorpusIndex::build(std::vector<DocumentCounts> docs, TokenizationConfig config, std::size_t skipped_before)
{
    config.validate();
    CorpusIndex index;
    index.m_config = std::move(config);
    index.m_skipped_empty = skipped_before;

    std::set<std::string_view> seen_ids;
    std::set<std::string> vocabulary;
    for (auto const& doc : docs) {
        if (!usable_id(doc.id)) {
            throw FormatError("corpus", 0, "document id '" + doc.id + "' is empty or contains whitespace/comma");
        }
        if (!seen_ids.insert(doc.id).second) {
            throw FormatError("corpus", 0, "duplicate document id '" + doc.id + "'");
        }
        for (auto const& [term, count] : doc.counts) {
            if (count > 0) {
                vocabulary.insert(term);
            }
        }
    }

    index.m_vocabulary.assign(vocabulary.begin(), vocabulary.end());
    for (TermId t = 0; t < index.m_vocabulary.size(); ++t) {
        index.m_term_ids.emplace(index.m_vocabulary[t], t);
    }

    auto& stats = index.m_stats;
    stats.collection_counts.assign(index.m_vocabulary.size(), 0);
    stats.doc_freq.assign(index.m_vocabulary.size(), 0);
    index.m_postings.resize(index.m_vocabulary.size());

    for (auto& raw : docs) {
        Document doc;
        doc.id = std::move(raw.id);
        for (auto const& [term, count] : raw.counts) {
            if (count == 0) {
                continue;
            }
            // std::map iteration is sorted, and term ids follow the same order
            doc.terms.push_back({index.m_term_ids.at(term), count});
            doc.length += count;
        }
        if (doc.length == 0) {
            ++index.m_skipped_empty;
            continue;
        }
        auto d = static_cast<DocIndex>(index.m_documents.size());
        for (auto const& tc : doc.terms) {
            stats.collection_counts[tc.term] += tc.count;
            stats.doc_freq[tc.term] += 1;
            index.m_postings[tc.term].push_back({d, tc.count});
        }
        stats.total_tokens += doc.length;
        index.m_documents.push_back(std::move(doc));
    }
    stats.num_docs = index.m_documents.size();

    for (DocIndex d = 0; d < index.m_documents.size(); ++d) {
        index.m_doc_ids.emplace(index.m_documents[d].id, d);
    }
    std::vector<DocIndex> order(index.m_documents.size());
    std::iota(order.begin(), order.end(), DocIndex{0});
    std::sort(order.begin(), order.end(), [&](DocIndex a, DocIndex b) {
        return index.m_documents[a].id < index.m_documents[b].id;
    });
    index.m_lexical_rank.resize(order.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) {
        index.m_lexical_rank[order[r]] = r;
    }

    std::ostringstream body;
    detail::write_index_body(index, body);
    index.m_fingerprint = detail::fnv1a(body.str());
    return index;
}

CorpusIndex CorpusIndex::from_texts(std::span<RawDocument const> docs, TokenizationConfig const& config)
{
    std::vector<DocumentCounts> counted;
    counted.reserve(docs.size());
    for (auto const& doc : docs) {
        counted.push_back({doc.id, count_terms(doc.text, config)});
    }
    return build(std::move(counted), config);
}

std::optional<TermId> CorpusIndex::term_id(std::string_view term) const
{
    if (auto it = m_term_ids.find(term); it != m_term_ids.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::optional<DocIndex> CorpusIndex::find_document(std::string_view id) const
{
    if (auto it = m_doc_ids.find(id); it != m_doc_ids.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::string CorpusIndex::fingerprint_hex() const
{
    return to_hex(m_fingerprint);
}

std::map<std::string, std::uint32_t> count_terms(std::string_view text, TokenizationConfig const& config)
{
    std::map<std::string, std::uint32_t> counts;
    for (auto& token : tokenize(text, config)) {
        ++counts[std::move(token)];
    }
    return counts;
}

CorpusIndex ingest_corpus(std::filesystem::path const& path, TokenizationConfig const& config)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus file: " + path.string());
    }
    std::vector<DocumentCounts> docs;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (nlohmann::json::parse_error const& e) {
            throw FormatError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object() || !record.contains("id") || !record.contains("text") || !record["id"].is_string()
            || !record["text"].is_string()) {
            throw FormatError(path.string(), line_no, "expected {\"id\": <string>, \"text\": <string>}");
        }
        auto id = record["id"].get<std::string>();
        if (!usable_id(id)) {
            throw FormatError(path.string(), line_no, "document id '" + id + "' is empty or contains whitespace/comma");
        }
        if (!ids.insert(id).second) {
            throw FormatError(path.string(), line_no, "duplicate document id '" + id + "'");
        }
        docs.push_back({std::move(id), count_terms(record["text"].get<std::string>(), config)});
    }
    return CorpusIndex::build(std::move(docs), config);
}

Query make_query(std::string id, std::string_view text, TokenizationConfig const& config)
{
    Query q;
    q.id = std::move(id);
    q.term_counts = count_terms(text, config);
    for (auto const& [term, count] : q.term_counts) {
        q.length += count;
    }
    return q;
}

std::vector<Query> ingest_queries(std::filesystem::path const& path, TokenizationConfig const& config)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open query file: " + path.string());
    }
    std::vector<Query> queries;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError(path.string(), line_no, "expected <qid><TAB><query text>");
        }
        auto id = line.substr(0, tab);
        if (!usable_id(id)) {
            throw FormatError(path.string(), line_no, "query id '" + id + "' is empty or contains whitespace/comma");
        }
        if (!ids.insert(id).second) {
            throw FormatError(path.string(), line_no, "duplicate query id '" + id + "'");
        }
        queries.push_back(make_query(std::move(id), std::string_view(line).substr(tab + 1), config));
    }
    return queries;
}

ResolvedQuery resolve(Query const& query, CorpusIndex const& index)
{
    ResolvedQuery r;
    r.id = query.id;
    for (auto const& [term, count] : query.term_counts) {
        if (auto t = index.term_id(term)) {
            r.terms.push_back({*t, count});
            r.length += count;
        } else {
            r.dropped += count;
        }
    }
    std::sort(r.terms.begin(), r.terms.end(), [](auto const& a, auto const& b) { return a.term < b.term; });
    return r;
}

}  // namespace facetlm
