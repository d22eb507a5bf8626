#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace facetlm {

enum class Stemmer { none, porter };

[[nodiscard]] std::string_view to_string(Stemmer s);
[[nodiscard]] Stemmer parse_stemmer(std::string_view name);

using StopwordSet = std::set<std::string, std::less<>>;

/// Preprocessing applied identically to documents and queries.
struct TokenizationConfig {
    bool lowercase = true;
    /// Tokens shorter than this many bytes are dropped.
    int min_token_len = 1;
    StopwordSet stopwords;
    Stemmer stem = Stemmer::none;

    /// Throws ConfigError when min_token_len < 1.
    void validate() const;

    friend bool operator==(TokenizationConfig const&, TokenizationConfig const&) = default;
};

/// Splits on non-alphanumeric bytes, then lowercases, removes stopwords,
/// applies the length filter and stems, in that order. Bytes >= 0x80 are
/// treated as word characters so UTF-8 sequences are never split.
[[nodiscard]] std::vector<std::string> tokenize(std::string_view text, TokenizationConfig const& config);

/// One term per line; blank lines are ignored.
[[nodiscard]] StopwordSet load_stopwords(std::filesystem::path const& path);

}  // namespace facetlm
