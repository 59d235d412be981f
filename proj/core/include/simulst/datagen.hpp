#pragma once

#include "simulst/random.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

// Prefix-augmented, document-level training samples for the MT model.
//
// Corpus format: UTF-8 text, one pair per line as "source ||| target",
// documents separated by blank lines. A document may start with a
// "# <id>" line.

struct SentencePair {
    std::vector<std::string> source;
    std::vector<std::string> target;

    friend bool operator==(const SentencePair &, const SentencePair &) = default;
};

struct Document {
    std::string id;
    std::vector<SentencePair> pairs;

    friend bool operator==(const Document &, const Document &) = default;
};

struct CorpusIssue {
    std::size_t line = 0; // 1-based
    std::string message;
};

struct Corpus {
    std::vector<Document> documents;
    /// Blocks containing a malformed line are skipped and reported here.
    std::vector<CorpusIssue> issues;
};

/// Never throws on malformed content; see Corpus::issues.
Corpus parse_corpus(std::string_view text);

/// Throws IoError if unreadable, InvalidArgument if no valid document remains.
Corpus load_corpus(const std::filesystem::path &path);

/// Canonical text form; parse_corpus(write_corpus(d)).documents == d.
std::string write_corpus(const std::vector<Document> &documents);

struct GenConfig {
    std::size_t min_context = 1;
    std::size_t max_context = 10;
    double prefix_rate = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Sample {
    std::string source;
    std::string target;
    std::size_t sentence_index = 0; // s
    std::size_t context = 0;        // c, number of context pairs
    bool prefixed = false;
    std::size_t source_cut = 0;     // words kept from pair s
    std::size_t target_cut = 0;
    bool clamped = false;           // document too short for min_context
    bool context_free = false;      // single-pair document
};

/// Source words kept when the target is cut after `target_cut` words:
/// min(|x|, max(1, round(target_cut * |x| / |y|))).
std::size_t projected_source_cut(std::size_t source_len, std::size_t target_len, std::size_t target_cut);

/// Deterministic assembly for a given sentence index, context length and
/// optional target cut. Throws InvalidArgument when out of range.
Sample build_sample(const Document &doc, std::size_t s, std::size_t c,
                    std::optional<std::size_t> target_cut = std::nullopt);

/// Draws s, c and the prefix decision from `rng` and builds the sample.
Sample gen_sample(const Document &doc, const GenConfig &cfg, Rng &rng);

struct GenStats {
    std::size_t samples = 0;
    std::size_t prefixed = 0;
    std::size_t clamped = 0;
    std::size_t context_free = 0;
    std::map<std::size_t, std::size_t> context_histogram;

    double prefix_fraction() const {
        return samples ? static_cast<double>(prefixed) / static_cast<double>(samples) : 0.0;
    }
    void add(const Sample &sample);
};

/// Draw i picks a document and builds a sample from Rng(mix_seed(seed, i)),
/// so any draw can be reproduced on its own.
class SampleGenerator {
public:
    SampleGenerator(std::vector<Document> documents, GenConfig cfg);

    Sample draw(std::uint64_t index) const;
    const std::vector<Document> &documents() const { return documents_; }

private:
    std::vector<Document> documents_;
    GenConfig cfg_;
};

} // namespace simulst
