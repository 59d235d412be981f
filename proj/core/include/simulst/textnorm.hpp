#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace simulst {

/// Relaxed word equality used by the ASR agreement policy.
struct MatchConfig {
    std::size_t levenshtein_threshold = 2;
    bool strip_punctuation = true;
    bool lowercase = true;

    friend bool operator==(const MatchConfig &, const MatchConfig &) = default;
};

/// Decodes UTF-8 into code points; ill-formed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

/// True for code points of Unicode general category P*.
bool is_punctuation(char32_t cp);

/// Lowercases (simple case folding) and drops punctuation per `cfg`. The
/// result is empty when the word consists only of punctuation.
std::string normalize_word(std::string_view word, const MatchConfig &cfg = {});

/// Unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Word-level edit distance (tokens compared by exact equality).
std::size_t word_edit_distance(std::span<const std::string> a, std::span<const std::string> b);

/// levenshtein(normalize(a), normalize(b)) <= threshold.
bool words_match(std::string_view a, std::string_view b, const MatchConfig &cfg = {});

/// Rule-based sentence boundary detector.
///
/// A word ends a sentence when it ends in one of `. ! ? …` (optionally
/// followed by closing quotes or brackets) and its stem, with that trailing
/// punctuation removed and case-folded, is neither a listed abbreviation nor
/// a single letter.
class SentenceSplitter {
public:
    SentenceSplitter();
    explicit SentenceSplitter(std::vector<std::string> abbreviations);

    /// One lowercase entry per line; blank lines and lines starting with '#'
    /// are ignored. Throws IoError if the file cannot be read.
    static SentenceSplitter from_file(const std::filesystem::path &path);

    static const std::vector<std::string> &default_abbreviations();

    bool is_sentence_end(std::string_view word) const;

    std::optional<std::size_t> detect(std::span<const std::string> words,
                                      std::size_t from_index) const;

private:
    std::unordered_set<std::string> abbreviations_;
};

std::optional<std::size_t> detect_sentence_end(std::span<const std::string> words,
                                                std::size_t from_index,
                                                const SentenceSplitter &splitter = {});

} // namespace simulst
