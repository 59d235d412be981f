#include "simulst/textnorm.hpp"

#include "simulst/core.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <numeric>

namespace simulst {

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    const auto *bytes = reinterpret_cast<const uint8_t *>(text.data());
    const int32_t length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        uint8_t buf[U8_MAX_LENGTH];
        int32_t n = 0;
        UBool error = false;
        U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
        if (error) {
            out += "\xEF\xBF\xBD";
        } else {
            out.append(reinterpret_cast<const char *>(buf), static_cast<std::size_t>(n));
        }
    }
    return out;
}

bool is_punctuation(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)); }

namespace {

std::u32string normalize_cps(std::string_view word, const MatchConfig &cfg) {
    std::u32string out;
    for (char32_t cp : decode_utf8(word)) {
        if (cfg.strip_punctuation && is_punctuation(cp)) continue;
        if (cfg.lowercase) cp = static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT));
        out.push_back(cp);
    }
    return out;
}

template <class Seq>
std::size_t edit_distance(const Seq &a, const Seq &b) {
    if (a.size() < b.size()) return edit_distance(b, a);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

} // namespace

std::string normalize_word(std::string_view word, const MatchConfig &cfg) {
    return encode_utf8(normalize_cps(word, cfg));
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    return edit_distance(a, b);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    return edit_distance(decode_utf8(a), decode_utf8(b));
}

std::size_t word_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
    return edit_distance(a, b);
}

bool words_match(std::string_view a, std::string_view b, const MatchConfig &cfg) {
    const auto na = normalize_cps(a, cfg);
    const auto nb = normalize_cps(b, cfg);
    const std::size_t gap = na.size() > nb.size() ? na.size() - nb.size() : nb.size() - na.size();
    if (gap > cfg.levenshtein_threshold) return false; // distance >= length gap
    return edit_distance(na, nb) <= cfg.levenshtein_threshold;
}

// ─── Sentence splitting ─────────────────────────────────────────────────────

namespace {

bool is_terminal(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'\u2026'; }

bool is_closer(char32_t cp) {
    switch (cp) {
    case U'"':
    case U'\'':
    case U')':
    case U']':
    case U'}':
    case U'\u2019':
    case U'\u201D':
    case U'\u00BB':
    case U'\u203A':
        return true;
    default:
        return false;
    }
}

} // namespace

const std::vector<std::string> &SentenceSplitter::default_abbreviations() {
    static const std::vector<std::string> list = {"dr", "mr",  "mrs", "ms",  "prof", "e.g",
                                                  "i.e", "etc", "vs",  "fig", "eq"};
    return list;
}

SentenceSplitter::SentenceSplitter() : SentenceSplitter(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(std::vector<std::string> abbreviations) {
    for (auto &a : abbreviations) abbreviations_.insert(std::move(a));
}

SentenceSplitter SentenceSplitter::from_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read abbreviation list " + path.string());
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        entries.push_back(line.substr(first));
    }
    return SentenceSplitter(std::move(entries));
}

bool SentenceSplitter::is_sentence_end(std::string_view word) const {
    auto cps = decode_utf8(word);
    while (!cps.empty() && is_closer(cps.back())) cps.pop_back();
    if (cps.empty() || !is_terminal(cps.back())) return false;
    while (!cps.empty() && is_terminal(cps.back())) cps.pop_back();

    std::u32string stem;
    for (char32_t cp : cps)
        stem.push_back(static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT)));
    if (stem.size() == 1 && u_isalpha(static_cast<UChar32>(stem[0]))) return false;
    return !abbreviations_.contains(encode_utf8(stem));
}

std::optional<std::size_t> SentenceSplitter::detect(std::span<const std::string> words,
                                                    std::size_t from_index) const {
    if (from_index > words.size()) throw InvalidArgument("sentence scan starts past the end");
    for (std::size_t i = from_index; i < words.size(); ++i) {
        if (is_sentence_end(words[i])) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> detect_sentence_end(std::span<const std::string> words,
                                                std::size_t from_index,
                                                const SentenceSplitter &splitter) {
    return splitter.detect(words, from_index);
}

} // namespace simulst
