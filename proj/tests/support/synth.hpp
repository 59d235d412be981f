#pragma once

// Seeded synthetic talks, mock scripts and traces for property tests.

#include "simulst/mock.hpp"
#include "simulst/pipeline.hpp"
#include "simulst/random.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace synth {

inline const std::vector<std::string> &vocabulary() {
    static const std::vector<std::string> words = {
        "we",      "present", "system", "for",    "streaming", "speech",  "translation", "that",
        "listens", "to",      "talk",   "and",    "writes",    "while",   "speaker",     "is",
        "still",   "going",   "model",  "keeps",  "short",     "history", "of",          "sentences",
        "so",      "later",   "words",  "can",    "use",       "earlier", "context",     "our",
        "results", "show",    "latency", "stays", "low",       "even",    "when",        "audio",
        "buffer",  "grows",   "long",   "decoder", "must",     "wait",    "stable",      "this",
        "matters", "lectures", "meetings", "people", "expect", "subtitles", "quickly",  "über",
        "café",    "naïve",   "o'neill", "well-known"};
    return words;
}

struct TalkOptions {
    std::size_t sentences = 6;
    std::size_t min_len = 3;
    std::size_t max_len = 14;
    double abbreviation_rate = 0.1; // chance of a mid-sentence "Dr."
    double question_rate = 0.15;
};

/// Sentences of words; every sentence ends with exactly one sentence-final
/// word ("." or "?"), and no other word ends a sentence.
inline std::vector<std::vector<std::string>> make_talk(simulst::Rng &rng, const TalkOptions &o) {
    const auto &vocab = vocabulary();
    std::vector<std::vector<std::string>> out;
    for (std::size_t s = 0; s < o.sentences; ++s) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(static_cast<long>(o.min_len), static_cast<long>(o.max_len)));
        std::vector<std::string> sent;
        for (std::size_t i = 0; i < n; ++i) sent.push_back(vocab[rng.index(vocab.size())]);
        if (n >= 3 && rng.bernoulli(o.abbreviation_rate)) sent[1 + rng.index(n - 2)] = "Dr.";
        sent[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sent[0][0])));
        sent.back() += rng.bernoulli(o.question_rate) ? "?" : ".";
        out.push_back(std::move(sent));
    }
    return out;
}

inline std::vector<std::string> flatten(const std::vector<std::vector<std::string>> &sentences) {
    std::vector<std::string> out;
    for (const auto &s : sentences) out.insert(out.end(), s.begin(), s.end());
    return out;
}

struct TimingOptions {
    double lead_in_s = 0.2;
    double min_word_s = 0.2;
    double max_word_s = 0.6;
    double max_gap_s = 0.15;
    double pause_s = 0.4; // after each sentence
    double tail_s = 0.5;  // audio after the last word
};

/// Ground-truth words with absolute timestamps on a 0.01 s grid.
inline std::vector<simulst::TimedWord> time_words(simulst::Rng &rng,
                                                  const std::vector<std::vector<std::string>> &sentences,
                                                  const TimingOptions &o, double *duration = nullptr) {
    std::vector<simulst::TimedWord> out;
    auto grid = [](double x) { return std::round(x * 100.0) / 100.0; };
    double t = o.lead_in_s;
    for (const auto &s : sentences) {
        for (const auto &w : s) {
            const double d = grid(o.min_word_s + (o.max_word_s - o.min_word_s) * rng.uniform01());
            out.push_back({w, grid(t), grid(t + d)});
            t = grid(t + d + o.max_gap_s * rng.uniform01());
        }
        t = grid(t + o.pause_s);
    }
    if (duration) *duration = grid((out.empty() ? t : out.back().end_s) + o.tail_s);
    return out;
}

/// Events of random length that cover exactly `duration` seconds of audio.
inline std::vector<simulst::TraceEvent> make_trace(simulst::Rng &rng, double duration, double min_dur, double max_dur) {
    std::vector<simulst::TraceEvent> out;
    double t = 0.0;
    while (t < duration - 1e-9) {
        double d = std::round((min_dur + (max_dur - min_dur) * rng.uniform01()) * 100.0) / 100.0;
        d = std::min(d, duration - t);
        t += d;
        out.push_back({t, d});
    }
    return out;
}

} // namespace synth
