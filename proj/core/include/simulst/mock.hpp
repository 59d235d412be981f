#pragma once

#include "simulst/backend.hpp"
#include "simulst/random.hpp"
#include "simulst/textnorm.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

// Deterministic stand-ins for the ASR and MT model servers. Every response is
// a pure function of (seed, request), so traces replay byte-identically.

struct MockAsrScript {
    std::vector<TimedWord> words; // ground truth, absolute times
    double duration_s = 0.0;      // audio extent; 0 means "end of last word"
    /// Words ending later than window_end - delay are unstable and perturbed.
    double stabilization_delay_s = 0.0;
    double cost_base_s = 0.1;
    double cost_per_s = 0.01;

    double extent_s() const;
};

enum class WordFallback { identity, upper };

struct MockMtScript {
    std::map<std::string, std::string> word_map;
    WordFallback fallback = WordFallback::identity;
    /// Probability that beam b > 1 truncates or perturbs its tail.
    double disagree_rate = 0.0;
    /// Probability that beam b > 1 comes back empty.
    double empty_rate = 0.0;
    /// Amplitude of seeded noise added to the one-hot attention rows, < 0.5.
    double attention_blur = 0.0;
    double cost_base_s = 0.05;
    double cost_per_word_s = 0.005;
    /// Cap on returned beams; 0 returns as many as requested.
    std::size_t max_beams = 0;
};

struct MockScript {
    std::uint64_t seed = 0;
    MockAsrScript asr;
    MockMtScript mt;

    void validate() const;
};

MockScript parse_mock_script(std::string_view json_text);
MockScript load_mock_script(const std::filesystem::path &path);
std::string dump_mock_script(const MockScript &script);

enum class PerturbKind { none, case_flip, punct_toggle, substitution };

/// Seeded surface perturbation of an unstable ASR word. The result differs
/// from `word` by at most two character edits and is always a valid word.
std::string perturb_word(const std::string &word, Rng &rng, PerturbKind *kind = nullptr);

class MockAsrBackend final : public AsrBackend {
public:
    explicit MockAsrBackend(MockScript script);

    AsrResponse decode(const AsrRequest &request) override;

    const MockScript &script() const { return script_; }

private:
    MockScript script_;
};

class MockMtBackend final : public MtBackend {
public:
    explicit MockMtBackend(MockScript script, SentenceSplitter splitter = {});

    MtResponse translate(const MtRequest &request) override;

    std::string map_word(const std::string &word) const;

    /// Word-for-word translation with [SEP] after every sentence-final word.
    std::vector<std::string> translate_offline(std::span<const std::string> source) const;

    const MockScript &script() const { return script_; }

private:
    MockScript script_;
    SentenceSplitter splitter_;
};

} // namespace simulst
