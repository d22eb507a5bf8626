#include "facetlm/tokenizer.hpp"

#include <fstream>

#include "facetlm/error.hpp"
#include "facetlm/porter.hpp"

namespace facetlm {
namespace {

bool is_word_byte(unsigned char c)
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::string_view to_string(Stemmer s)
{
    return s == Stemmer::porter ? "porter" : "none";
}

Stemmer parse_stemmer(std::string_view name)
{
    if (name == "none") {
        return Stemmer::none;
    }
    if (name == "porter") {
        return Stemmer::porter;
    }
    throw ConfigError("unknown stemmer '" + std::string(name) + "' (expected none|porter)");
}

void TokenizationConfig::validate() const
{
    if (min_token_len < 1) {
        throw ConfigError("min_token_len must be >= 1, got " + std::to_string(min_token_len));
    }
}

std::vector<std::string> tokenize(std::string_view text, TokenizationConfig const& config)
{
    config.validate();
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && !is_word_byte(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        std::size_t start = pos;
        while (pos < text.size() && is_word_byte(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (start == pos) {
            break;
        }
        std::string token(text.substr(start, pos - start));
        if (config.lowercase) {
            for (auto& c : token) {
                if (c >= 'A' && c <= 'Z') {
                    c = static_cast<char>(c - 'A' + 'a');
                }
            }
        }
        if (config.stopwords.contains(token)) {
            continue;
        }
        if (token.size() < static_cast<std::size_t>(config.min_token_len)) {
            continue;
        }
        if (config.stem == Stemmer::porter) {
            token = porter_stem(token);
        }
        tokens.push_back(std::move(token));
    }
    return tokens;
}

StopwordSet load_stopwords(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open stopword file: " + path.string());
    }
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        auto last = line.find_last_not_of(" \t\r");
        words.emplace(line.substr(first, last - first + 1));
    }
    return words;
}

}  // namespace facetlm
