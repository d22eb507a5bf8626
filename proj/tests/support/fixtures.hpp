#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <unistd.h>
#include <vector>

#include "facetlm/corpus.hpp"

namespace fixtures {

inline facetlm::CorpusIndex index_of(std::initializer_list<std::pair<char const*, char const*>> docs,
                                     facetlm::TokenizationConfig const& config = {})
{
    std::vector<facetlm::RawDocument> raw;
    for (auto const& [id, text] : docs) {
        raw.push_back({id, text});
    }
    return facetlm::CorpusIndex::from_texts(raw, config);
}

/// The two-document corpus {d1: "a a b", d2: "b b"}.
inline facetlm::CorpusIndex two_docs()
{
    return index_of({{"d1", "a a b"}, {"d2", "b b"}});
}

inline facetlm::ResolvedQuery query(facetlm::CorpusIndex const& index, std::string const& text,
                                    std::string id = "q")
{
    return facetlm::resolve(facetlm::make_query(std::move(id), text, index.config()), index);
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        m_path = std::filesystem::temp_directory_path()
                 / ("facetlm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(m_path);
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(TempDir const&) = delete;
    TempDir& operator=(TempDir const&) = delete;

    [[nodiscard]] std::filesystem::path const& path() const { return m_path; }
    [[nodiscard]] std::filesystem::path operator/(std::string const& name) const { return m_path / name; }

    std::filesystem::path write(std::string const& name, std::string const& content) const
    {
        auto p = m_path / name;
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }

  private:
    std::filesystem::path m_path;
};

inline std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
