#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facetlm/retrieval.hpp"

namespace facetlm {

/// Binary relevance judgments. Labels > 0 count as relevant.
class Qrels {
  public:
    void add(std::string const& query_id, std::string const& doc_id, int label);

    [[nodiscard]] bool is_relevant(std::string_view query_id, std::string_view doc_id) const;
    /// Number of relevant documents for the query (0 if unjudged).
    [[nodiscard]] std::size_t relevant_count(std::string_view query_id) const;
    [[nodiscard]] std::vector<std::string> query_ids() const;

  private:
    std::map<std::string, std::set<std::string, std::less<>>, std::less<>> m_relevant;
    std::set<std::string, std::less<>> m_judged_queries;
};

/// TREC qrels: `<qid> <iteration> <docid> <rel>` per line.
[[nodiscard]] Qrels read_qrels(std::istream& in, std::string const& source);
[[nodiscard]] Qrels load_qrels(std::filesystem::path const& path);

inline constexpr std::size_t kRecallLevels = 11;

/// All three return nullopt when the query has no relevant documents.
[[nodiscard]] std::optional<double> average_precision(RankedList const& list, Qrels const& qrels);
/// Level j is recall j/10; each value is the best precision at any cutoff reaching that recall.
[[nodiscard]] std::optional<std::array<double, kRecallLevels>>
interpolated_precision(RankedList const& list, Qrels const& qrels);
[[nodiscard]] std::optional<double> recall_at_n(RankedList const& list, Qrels const& qrels);

struct QueryMetrics {
    std::string query_id;
    double average_precision = 0.0;
    std::array<double, kRecallLevels> interpolated{};
    double recall = 0.0;
    std::size_t relevant = 0;
    std::size_t relevant_retrieved = 0;

    [[nodiscard]] double precision_at_0() const { return interpolated[0]; }
};

struct EvalReport {
    std::string run_tag;
    /// Evaluated queries: present in the run and with at least one relevant document.
    std::vector<QueryMetrics> queries;
    /// Run queries skipped for having no relevant documents.
    std::vector<std::string> excluded;

    double mean_average_precision = 0.0;
    double mean_precision_at_0 = 0.0;
    double mean_recall = 0.0;
    std::size_t relevant_retrieved = 0;
    std::size_t relevant = 0;
    std::array<double, kRecallLevels> mean_interpolated{};
};

[[nodiscard]] EvalReport evaluate_run(Run const& run, Qrels const& qrels);

struct WilcoxonResult {
    double p_value = 1.0;
    double w_plus = 0.0;
    std::size_t nonzero = 0;
    bool exact = true;
    /// Every difference was zero; p is 1.
    bool all_zero = false;
};

/// Two-sided Wilcoxon signed-rank test on the differences a - b. Zero
/// differences are dropped and tied magnitudes share their average rank.
/// Exact null distribution up to kExactWilcoxonLimit non-zero pairs, normal
/// approximation with continuity and tie correction above.
[[nodiscard]] WilcoxonResult wilcoxon_two_sided(std::span<std::pair<double, double> const> pairs);

inline constexpr std::size_t kExactWilcoxonLimit = 25;
inline constexpr double kSignificanceLevel = 0.05;

struct MetricComparison {
    std::string metric;
    double run_value = 0.0;
    double baseline_value = 0.0;
    WilcoxonResult test;

    [[nodiscard]] bool significant() const { return !test.all_zero && test.p_value < kSignificanceLevel; }
};

struct RunComparison {
    EvalReport run;
    EvalReport baseline;
    /// Avg. Prec., Prec. at 0, Recall.
    std::vector<MetricComparison> metrics;
};

/// Paired per-query tests of `run` against `baseline`. Throws MismatchError
/// listing the symmetric difference when the runs cover different queries.
[[nodiscard]] RunComparison compare_runs(Run const& run, Run const& baseline, Qrels const& qrels);

/// Table with rows Avg. Prec., Prec. at 0, Recall, RelRet and one column
/// per report; percentages to two decimals.
void write_report_table(std::ostream& out, EvalReport const& report);
void write_comparison_table(std::ostream& out, RunComparison const& comparison);

/// Eleven lines `<level><TAB><mean interpolated precision>`.
void write_curve(std::ostream& out, EvalReport const& report);

}  // namespace facetlm
