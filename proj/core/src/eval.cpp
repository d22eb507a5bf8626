#include "facetlm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "facetlm/error.hpp"

namespace facetlm {

void Qrels::add(std::string const& query_id, std::string const& doc_id, int label)
{
    m_judged_queries.insert(query_id);
    if (label > 0) {
        m_relevant[query_id].insert(doc_id);
    }
}

bool Qrels::is_relevant(std::string_view query_id, std::string_view doc_id) const
{
    auto it = m_relevant.find(query_id);
    return it != m_relevant.end() && it->second.contains(doc_id);
}

std::size_t Qrels::relevant_count(std::string_view query_id) const
{
    auto it = m_relevant.find(query_id);
    return it == m_relevant.end() ? 0 : it->second.size();
}

std::vector<std::string> Qrels::query_ids() const
{
    return {m_judged_queries.begin(), m_judged_queries.end()};
}

Qrels read_qrels(std::istream& in, std::string const& source)
{
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string qid;
        std::string iteration;
        std::string doc;
        std::string label_text;
        std::string extra;
        if (!(fields >> qid)) {
            continue;
        }
        if (!(fields >> iteration >> doc >> label_text) || (fields >> extra)) {
            throw FormatError(source, line_no, "expected '<qid> 0 <docid> <rel>'");
        }
        int label = 0;
        try {
            std::size_t used = 0;
            label = std::stoi(label_text, &used);
            if (used != label_text.size()) {
                throw std::invalid_argument("label");
            }
        } catch (std::exception const&) {
            throw FormatError(source, line_no, "malformed relevance label '" + label_text + "'");
        }
        qrels.add(qid, doc, label);
    }
    return qrels;
}

Qrels load_qrels(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open qrels file: " + path.string());
    }
    return read_qrels(in, path.string());
}

namespace {

/// 1-based ranks of the relevant documents in the list.
std::vector<std::size_t> relevant_ranks(RankedList const& list, Qrels const& qrels)
{
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        if (qrels.is_relevant(list.query_id, list.entries[i].doc_id)) {
            ranks.push_back(i + 1);
        }
    }
    return ranks;
}

}  // namespace

std::optional<double> average_precision(RankedList const& list, Qrels const& qrels)
{
    auto const total = qrels.relevant_count(list.query_id);
    if (total == 0) {
        return std::nullopt;
    }
    auto ranks = relevant_ranks(list, qrels);
    double sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        sum += static_cast<double>(i + 1) / static_cast<double>(ranks[i]);
    }
    return sum / static_cast<double>(total);
}

std::optional<std::array<double, kRecallLevels>>
interpolated_precision(RankedList const& list, Qrels const& qrels)
{
    auto const total = qrels.relevant_count(list.query_id);
    if (total == 0) {
        return std::nullopt;
    }
    std::array<double, kRecallLevels> levels{};
    std::size_t found = 0;
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        if (!qrels.is_relevant(list.query_id, list.entries[i].doc_id)) {
            continue;
        }
        // Precision only peaks at relevant documents, so other cutoffs can be skipped.
        ++found;
        double precision = static_cast<double>(found) / static_cast<double>(i + 1);
        for (std::size_t j = 0; j < kRecallLevels; ++j) {
            if ((kRecallLevels - 1) * found >= j * total) {
                levels[j] = std::max(levels[j], precision);
            }
        }
    }
    return levels;
}

std::optional<double> recall_at_n(RankedList const& list, Qrels const& qrels)
{
    auto const total = qrels.relevant_count(list.query_id);
    if (total == 0) {
        return std::nullopt;
    }
    return static_cast<double>(relevant_ranks(list, qrels).size()) / static_cast<double>(total);
}

EvalReport evaluate_run(Run const& run, Qrels const& qrels)
{
    EvalReport report;
    report.run_tag = run.tag;
    for (auto const& list : run.lists) {
        auto ap = average_precision(list, qrels);
        if (!ap) {
            report.excluded.push_back(list.query_id);
            continue;
        }
        QueryMetrics m;
        m.query_id = list.query_id;
        m.average_precision = *ap;
        m.interpolated = *interpolated_precision(list, qrels);
        m.recall = *recall_at_n(list, qrels);
        m.relevant = qrels.relevant_count(list.query_id);
        m.relevant_retrieved = relevant_ranks(list, qrels).size();
        report.queries.push_back(std::move(m));
    }
    std::sort(report.queries.begin(), report.queries.end(),
              [](QueryMetrics const& a, QueryMetrics const& b) { return a.query_id < b.query_id; });
    if (report.queries.empty()) {
        return report;
    }
    auto const n = static_cast<double>(report.queries.size());
    for (auto const& q : report.queries) {
        report.mean_average_precision += q.average_precision;
        report.mean_precision_at_0 += q.precision_at_0();
        report.mean_recall += q.recall;
        report.relevant_retrieved += q.relevant_retrieved;
        report.relevant += q.relevant;
        for (std::size_t j = 0; j < kRecallLevels; ++j) {
            report.mean_interpolated[j] += q.interpolated[j];
        }
    }
    report.mean_average_precision /= n;
    report.mean_precision_at_0 /= n;
    report.mean_recall /= n;
    for (auto& v : report.mean_interpolated) {
        v /= n;
    }
    return report;
}

WilcoxonResult wilcoxon_two_sided(std::span<std::pair<double, double> const> pairs)
{
    if (pairs.empty()) {
        throw ConfigError("wilcoxon test needs at least one pair");
    }
    std::vector<double> diffs;
    for (auto const& [a, b] : pairs) {
        if (a != b) {
            diffs.push_back(a - b);
        }
    }
    WilcoxonResult result;
    result.nonzero = diffs.size();
    if (diffs.empty()) {
        result.all_zero = true;
        result.p_value = 1.0;
        return result;
    }
    std::sort(diffs.begin(), diffs.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });

    // Doubled average ranks are integers.
    auto const n = diffs.size();
    std::vector<std::size_t> doubled(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[j]) == std::abs(diffs[i])) {
            ++j;
        }
        // Ranks i+1..j average to (i+1+j)/2.
        for (std::size_t t = i; t < j; ++t) {
            doubled[t] = i + 1 + j;
        }
        auto const t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    std::size_t w_plus2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (diffs[i] > 0) {
            w_plus2 += doubled[i];
        }
    }
    result.w_plus = static_cast<double>(w_plus2) / 2.0;

    if (n <= kExactWilcoxonLimit) {
        result.exact = true;
        std::size_t max_sum = 0;
        for (auto r : doubled) {
            max_sum += r;
        }
        std::vector<double> ways(max_sum + 1, 0.0);
        ways[0] = 1.0;
        std::size_t reach = 0;
        for (auto r : doubled) {
            for (std::size_t s = reach + 1; s-- > 0;) {
                if (ways[s] != 0.0) {
                    ways[s + r] += ways[s];
                }
            }
            reach += r;
        }
        double total = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t s = 0; s <= max_sum; ++s) {
            if (s <= w_plus2) {
                lower += ways[s];
            }
            if (s >= w_plus2) {
                upper += ways[s];
            }
        }
        result.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        return result;
    }

    result.exact = false;
    auto const nd = static_cast<double>(n);
    double mean = nd * (nd + 1.0) / 4.0;
    double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    double deviation = std::max(0.0, std::abs(result.w_plus - mean) - 0.5);
    double z = deviation / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return result;
}

RunComparison compare_runs(Run const& run, Run const& baseline, Qrels const& qrels)
{
    std::set<std::string> a;
    std::set<std::string> b;
    for (auto const& l : run.lists) {
        a.insert(l.query_id);
    }
    for (auto const& l : baseline.lists) {
        b.insert(l.query_id);
    }
    if (a != b) {
        std::vector<std::string> only;
        std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only));
        std::string listing;
        for (auto const& q : only) {
            listing += (listing.empty() ? "" : ", ") + q;
        }
        throw MismatchError("runs cover different queries; not in both: " + listing);
    }

    RunComparison cmp{evaluate_run(run, qrels), evaluate_run(baseline, qrels), {}};
    auto paired = [&](auto metric) {
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < cmp.run.queries.size(); ++i) {
            pairs.emplace_back(metric(cmp.run.queries[i]), metric(cmp.baseline.queries[i]));
        }
        return pairs;
    };
    auto add = [&](std::string name, double run_value, double base_value, auto metric) {
        MetricComparison m{std::move(name), run_value, base_value, {}};
        auto pairs = paired(metric);
        if (pairs.empty()) {
            m.test.all_zero = true;
        } else {
            m.test = wilcoxon_two_sided(pairs);
        }
        cmp.metrics.push_back(std::move(m));
    };
    add("Avg. Prec.", cmp.run.mean_average_precision, cmp.baseline.mean_average_precision,
        [](QueryMetrics const& q) { return q.average_precision; });
    add("Prec. at 0", cmp.run.mean_precision_at_0, cmp.baseline.mean_precision_at_0,
        [](QueryMetrics const& q) { return q.precision_at_0(); });
    add("Recall", cmp.run.mean_recall, cmp.baseline.mean_recall, [](QueryMetrics const& q) { return q.recall; });
    return cmp;
}

namespace {

std::string percent(double v)
{
    return fmt::format("{:.2f}%", 100.0 * v);
}

std::string column_name(std::string const& tag, std::string_view fallback)
{
    return tag.empty() ? std::string(fallback) : tag;
}

}  // namespace

void write_report_table(std::ostream& out, EvalReport const& report)
{
    out << "metric\t" << column_name(report.run_tag, "run") << '\n';
    out << "Avg. Prec.\t" << percent(report.mean_average_precision) << '\n';
    out << "Prec. at 0\t" << percent(report.mean_precision_at_0) << '\n';
    out << "Recall\t" << percent(report.mean_recall) << '\n';
    out << "RelRet\t" << report.relevant_retrieved << '\n';
}

void write_comparison_table(std::ostream& out, RunComparison const& comparison)
{
    out << "metric\t" << column_name(comparison.baseline.run_tag, "baseline") << '\t'
        << column_name(comparison.run.run_tag, "run") << "\tp\n";
    for (auto const& m : comparison.metrics) {
        out << m.metric << '\t' << percent(m.baseline_value) << '\t' << percent(m.run_value)
            << (m.significant() ? "*" : "") << '\t' << fmt::format("{:.4g}", m.test.p_value) << '\n';
    }
    out << "RelRet\t" << comparison.baseline.relevant_retrieved << '\t' << comparison.run.relevant_retrieved
        << "\t-\n";
}

void write_curve(std::ostream& out, EvalReport const& report)
{
    for (std::size_t j = 0; j < kRecallLevels; ++j) {
        out << fmt::format("{:.1f}\t{:.6f}\n", static_cast<double>(j) / 10.0, report.mean_interpolated[j]);
    }
}

}  // namespace facetlm
