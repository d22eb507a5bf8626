#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "facetlm/error.hpp"
#include "facetlm/retrieval.hpp"

namespace facetlm {

void write_run(std::ostream& out, std::span<RankedList const> lists, std::string_view runtag)
{
    fmt::memory_buffer buf;
    for (auto const& list : lists) {
        for (auto const& e : list.entries) {
            fmt::format_to(std::back_inserter(buf), "{} Q0 {} {} {:.6f} {}\n", list.query_id, e.doc_id, e.rank,
                           e.score, runtag);
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
    }
}

void save_run(std::filesystem::path const& path, std::span<RankedList const> lists, std::string_view runtag)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write run file: " + path.string());
    }
    write_run(out, lists, runtag);
    if (!out) {
        throw IoError("failed writing run file: " + path.string());
    }
}

RankedList const* Run::find(std::string_view query_id) const
{
    for (auto const& list : lists) {
        if (list.query_id == query_id) {
            return &list;
        }
    }
    return nullptr;
}

Run read_run(std::istream& in, std::string const& source)
{
    Run run;
    std::unordered_map<std::string, std::size_t> position;
    std::unordered_map<std::string, std::unordered_set<std::string>> seen_docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string qid;
        std::string q0;
        std::string doc;
        std::string rank_text;
        std::string score_text;
        std::string tag;
        std::string extra;
        if (!(fields >> qid)) {
            continue;
        }
        if (!(fields >> q0 >> doc >> rank_text >> score_text >> tag) || (fields >> extra)) {
            throw FormatError(source, line_no, "expected '<qid> Q0 <docid> <rank> <score> <runtag>'");
        }
        std::size_t rank = 0;
        double score = 0.0;
        try {
            std::size_t used = 0;
            rank = std::stoul(rank_text, &used);
            if (used != rank_text.size()) {
                throw std::invalid_argument("rank");
            }
            score = std::stod(score_text, &used);
            if (used != score_text.size()) {
                throw std::invalid_argument("score");
            }
        } catch (std::exception const&) {
            throw FormatError(source, line_no, "malformed rank or score");
        }
        if (run.tag.empty()) {
            run.tag = tag;
        }
        auto [it, inserted] = position.try_emplace(qid, run.lists.size());
        if (inserted) {
            run.lists.push_back(RankedList{qid, {}});
        }
        auto& list = run.lists[it->second];
        if (!list.entries.empty() && rank <= list.entries.back().rank) {
            throw FormatError(source, line_no, "ranks must increase within a query");
        }
        if (!seen_docs[qid].insert(doc).second) {
            throw FormatError(source, line_no, "document '" + doc + "' listed twice for query '" + qid + "'");
        }
        list.entries.push_back({std::move(doc), score, rank});
    }
    return run;
}

Run load_run(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open run file: " + path.string());
    }
    return read_run(in, path.string());
}

}  // namespace facetlm
