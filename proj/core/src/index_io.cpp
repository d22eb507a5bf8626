#include <charconv>
#include <fstream>
#include <sstream>

#include "facetlm/corpus.hpp"
#include "facetlm/error.hpp"

// Layout (tab separated, one record per line):
//
//   #facetlm-index v1 fingerprint=<hex16> skipped=<n>
//   config  lowercase=<0|1>  min_token_len=<n>  stem=<none|porter>  stopwords=<n>
//   stopword  <word>                      (sorted)
//   term  <term>  <collection count>  <doc freq>      (one per term id)
//   doc  <id>  <length>  <term id>:<count>,...        (corpus order)
//
// The fingerprint is FNV-1a 64 over every line after the header.

namespace facetlm {
namespace {

constexpr std::string_view kMagic = "#facetlm-index v1";

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        parts.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

template <typename T>
bool parse_number(std::string_view text, T& out)
{
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string_view field_value(std::string_view field, std::string_view key)
{
    if (field.size() <= key.size() || field.substr(0, key.size()) != key || field[key.size()] != '=') {
        return {};
    }
    return field.substr(key.size() + 1);
}

}  // namespace

namespace detail {
    void write_index_body(CorpusIndex const& index, std::ostream& out)
    {
        auto const& config = index.config();
        out << "config\tlowercase=" << (config.lowercase ? 1 : 0) << "\tmin_token_len=" << config.min_token_len
            << "\tstem=" << to_string(config.stem) << "\tstopwords=" << config.stopwords.size() << '\n';
        for (auto const& w : config.stopwords) {
            out << "stopword\t" << w << '\n';
        }
        auto const& stats = index.stats();
        for (TermId t = 0; t < index.vocabulary().size(); ++t) {
            out << "term\t" << index.term(t) << '\t' << stats.collection_counts[t] << '\t' << stats.doc_freq[t] << '\n';
        }
        for (auto const& doc : index.documents()) {
            out << "doc\t" << doc.id << '\t' << doc.length << '\t';
            bool first = true;
            for (auto const& tc : doc.terms) {
                if (!first) {
                    out << ',';
                }
                first = false;
                out << tc.term << ':' << tc.count;
            }
            out << '\n';
        }
    }
}  // namespace detail

void write_index(CorpusIndex const& index, std::ostream& out)
{
    out << kMagic << " fingerprint=" << index.fingerprint_hex() << " skipped=" << index.skipped_empty() << '\n';
    detail::write_index_body(index, out);
}

void save_index(CorpusIndex const& index, std::filesystem::path const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write index file: " + path.string());
    }
    write_index(index, out);
    if (!out) {
        throw IoError("failed writing index file: " + path.string());
    }
}

CorpusIndex load_index(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open index file: " + path.string());
    }
    auto const source = path.string();
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw FormatError(source, 1, "empty index file");
    }
    auto header = split(line, ' ');
    if (header.size() != 4 || std::string(header[0]) + " " + std::string(header[1]) != kMagic) {
        throw FormatError(source, 1, "not a facetlm index (bad header)");
    }
    auto expected_fp = std::string(field_value(header[2], "fingerprint"));
    std::size_t skipped = 0;
    if (expected_fp.size() != 16 || !parse_number(field_value(header[3], "skipped"), skipped)) {
        throw FormatError(source, 1, "malformed header fields");
    }

    TokenizationConfig config;
    std::size_t stopword_count = 0;
    bool have_config = false;
    std::vector<std::string> terms;
    std::vector<DocumentCounts> docs;

    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split(line, '\t');
        auto const kind = fields[0];
        auto fail = [&](std::string const& what) { throw FormatError(source, line_no, what); };
        if (kind == "config") {
            int lower = 0;
            std::string_view stem;
            if (fields.size() != 5 || !parse_number(field_value(fields[1], "lowercase"), lower)
                || !parse_number(field_value(fields[2], "min_token_len"), config.min_token_len)
                || (stem = field_value(fields[3], "stem")).empty()
                || !parse_number(field_value(fields[4], "stopwords"), stopword_count)) {
                fail("malformed config record");
            }
            config.lowercase = lower != 0;
            try {
                config.stem = parse_stemmer(stem);
            } catch (ConfigError const& e) {
                fail(e.what());
            }
            have_config = true;
        } else if (kind == "stopword") {
            if (fields.size() != 2 || !have_config) {
                fail("malformed stopword record");
            }
            config.stopwords.emplace(fields[1]);
        } else if (kind == "term") {
            std::uint64_t cf = 0;
            std::uint32_t df = 0;
            if (fields.size() != 4 || fields[1].empty() || !parse_number(fields[2], cf) || !parse_number(fields[3], df)) {
                fail("malformed term record");
            }
            terms.emplace_back(fields[1]);
        } else if (kind == "doc") {
            std::uint64_t length = 0;
            if (fields.size() != 4 || !parse_number(fields[2], length)) {
                fail("malformed doc record");
            }
            DocumentCounts doc{std::string(fields[1]), {}};
            std::uint64_t total = 0;
            for (auto entry : split(fields[3], ',')) {
                auto colon = entry.find(':');
                TermId t = 0;
                std::uint32_t count = 0;
                if (colon == std::string_view::npos || !parse_number(entry.substr(0, colon), t)
                    || !parse_number(entry.substr(colon + 1), count) || t >= terms.size() || count == 0) {
                    fail("malformed posting '" + std::string(entry) + "'");
                }
                doc.counts[terms[t]] = count;
                total += count;
            }
            if (total != length) {
                fail("document length does not match its term counts");
            }
            docs.push_back(std::move(doc));
        } else {
            fail("unknown record type '" + std::string(kind) + "'");
        }
    }
    if (!have_config || config.stopwords.size() != stopword_count) {
        throw FormatError(source, line_no, "missing or incomplete config section");
    }

    auto index = CorpusIndex::build(std::move(docs), std::move(config), skipped);
    if (index.fingerprint_hex() != expected_fp) {
        throw FormatError(source, 0, "fingerprint mismatch (file truncated or edited): header says " + expected_fp
                                         + ", content hashes to " + index.fingerprint_hex());
    }
    return index;
}

}  // namespace facetlm
