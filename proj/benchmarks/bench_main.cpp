#include <iterator>
#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "facetlm/clustering.hpp"
#include "facetlm/retrieval.hpp"
#include "facetlm/tokenizer.hpp"
#include "synthetic.hpp"

using namespace facetlm;

namespace {

std::string sample_text(std::size_t words)
{
    static char const* const vocabulary[] = {"Oil",      "spills",   "tankers", "coastal", "cleanup", "the",
                                             "election", "polling",  "voters",  "running", "1989",    "of",
                                             "agencies", "reported", "and",     "général"};
    std::string text;
    for (std::size_t i = 0; i < words; ++i) {
        text += vocabulary[(i * 7 + i / 3) % std::size(vocabulary)];
        text += i % 11 == 10 ? ". " : " ";
    }
    return text;
}

void BM_Tokenize(benchmark::State& state)
{
    auto text = sample_text(static_cast<std::size_t>(state.range(0)));
    TokenizationConfig config;
    config.stem = static_cast<Stemmer>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tokenize(text, config));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Args({1000, 0})->Args({1000, 1});

synthetic::PlantedTopics const& planted(std::size_t docs)
{
    static std::map<std::size_t, synthetic::PlantedTopics> cache;
    auto it = cache.find(docs);
    if (it == cache.end()) {
        synthetic::PlantedConfig cfg;
        cfg.docs = docs;
        it = cache.emplace(docs, synthetic::planted_topics(cfg)).first;
    }
    return it->second;
}

void BM_BuildClusters(benchmark::State& state)
{
    auto index = planted(static_cast<std::size_t>(state.range(0))).corpus.index();
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_clusters(index, 10, SmoothingSpec{}));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildClusters)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Search(benchmark::State& state)
{
    auto const& data = planted(500);
    auto index = data.corpus.index();
    auto clusters = build_clusters(index, 10, SmoothingSpec{});
    Retriever retriever(index, SmoothingSpec{}, &clusters);
    std::vector<ResolvedQuery> queries;
    for (auto const& [qid, counts] : data.queries) {
        queries.push_back(synthetic::resolve_counts(qid, counts, index));
    }
    AlgorithmSpec spec;
    spec.name = static_cast<Algorithm>(state.range(0));
    spec.m = 100;
    (void)retriever.run(spec, queries.front());
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(retriever.run(spec, queries[i++ % queries.size()]));
    }
    state.SetLabel(std::string(to_string(spec.name)));
}
BENCHMARK(BM_Search)->DenseRange(0, 6)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
