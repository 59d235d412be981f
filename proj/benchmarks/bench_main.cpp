// Micro benchmarks for the hot paths: word matching, beam voting,
// resegmentation and a full mock simulation.

#include "simulst/metrics.hpp"
#include "simulst/mock.hpp"
#include "simulst/pipeline.hpp"
#include "simulst/policy.hpp"
#include "simulst/random.hpp"
#include "simulst/textnorm.hpp"

#include <benchmark/benchmark.h>

using namespace simulst;

namespace {

std::vector<std::string> random_words(Rng &rng, std::size_t n, std::size_t vocab) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.index(vocab)));
    return out;
}

void BM_words_match(benchmark::State &state) {
    Rng rng(1);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 256; ++i) pairs.emplace_back("Über-" + std::to_string(rng.index(1000)) + ",",
                                                     "über" + std::to_string(rng.index(1000)));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto &p = pairs[i++ % pairs.size()];
        benchmark::DoNotOptimize(words_match(p.first, p.second));
    }
}
BENCHMARK(BM_words_match);

void BM_ralcp_emit(benchmark::State &state) {
    const auto beams_n = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    BeamSet set;
    set.requested_size = beams_n;
    const auto base = random_words(rng, 30, 50);
    for (std::size_t b = 0; b < beams_n; ++b) {
        auto tokens = base;
        tokens.resize(10 + rng.index(20));
        if (b % 3 == 1) tokens[rng.index(tokens.size())] = "x";
        set.beams.push_back(BeamHypothesis{tokens, -static_cast<double>(b), {}});
    }
    RalcpConfig cfg;
    cfg.beam_size = beams_n;
    for (auto _ : state) benchmark::DoNotOptimize(ralcp_emit(set, 0, cfg));
}
BENCHMARK(BM_ralcp_emit)->Arg(5)->Arg(10)->Arg(20);

void BM_resegment(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    std::vector<std::vector<std::string>> refs;
    std::vector<std::string> hyp;
    for (std::size_t k = 0; k < n / 12; ++k) {
        refs.push_back(random_words(rng, 12, 200));
        for (const auto &w : refs.back()) {
            if (!rng.bernoulli(0.1)) hyp.push_back(w);
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(resegment(hyp, refs));
    state.SetComplexityN(static_cast<long>(n));
}
BENCHMARK(BM_resegment)->RangeMultiplier(2)->Range(96, 768)->Complexity();

void BM_simulate_mock(benchmark::State &state) {
    MockScript script;
    script.seed = 4;
    Rng rng(4);
    double t = 0.2;
    for (int i = 0; i < 300; ++i) {
        std::string w = "word" + std::to_string(rng.index(100));
        if (i % 12 == 11) w += ".";
        script.asr.words.push_back({w, t, t + 0.3});
        t += 0.35;
    }
    script.asr.duration_s = t + 0.5;
    script.asr.stabilization_delay_s = 1.0;
    script.mt.disagree_rate = 0.3;
    std::vector<TraceEvent> trace;
    for (double at = 0.25; at <= script.asr.duration_s; at += 0.25) trace.push_back({at, 0.25});

    for (auto _ : state) {
        MockAsrBackend asr(script);
        MockMtBackend mt(script);
        Pipeline p(table3_preset(Preset::adapted), SentenceSplitter{}, asr, mt);
        for (const auto &ev : trace) p.feed(ev);
        p.finish();
        benchmark::DoNotOptimize(p.log().size());
    }
}
BENCHMARK(BM_simulate_mock)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
