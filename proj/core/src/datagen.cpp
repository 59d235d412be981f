#include "simulst/datagen.hpp"

#include "simulst/core.hpp"

#include "json_util.hpp"

#include <cmath>
#include <sstream>

namespace simulst {

namespace {

std::vector<std::string> split_ws(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) out.push_back(std::move(w));
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void append_words(std::string &out, const std::vector<std::string> &words, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += words[i];
    }
}

} // namespace

// ─── Corpus I/O ─────────────────────────────────────────────────────────────

Corpus parse_corpus(std::string_view text) {
    Corpus corpus;
    Document doc;
    bool block_bad = false;
    bool in_block = false;

    const auto flush = [&] {
        if (in_block && !block_bad && !doc.pairs.empty()) corpus.documents.push_back(std::move(doc));
        doc = Document{};
        block_bad = false;
        in_block = false;
    };

    std::size_t line_no = 0;
    std::size_t block_start = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (nl == text.size() && raw.empty()) break;

        const auto line = trim(raw);
        if (line.empty()) {
            if (in_block && !block_bad && doc.pairs.empty())
                corpus.issues.push_back({block_start, "document header without sentence pairs"});
            flush();
            continue;
        }
        if (!in_block) {
            in_block = true;
            block_start = line_no;
            if (line.front() == '#') {
                doc.id = std::string(trim(line.substr(1)));
                continue;
            }
        }
        if (block_bad) continue;
        if (line.front() == '#') {
            corpus.issues.push_back({line_no, "document id line must open its block; block skipped"});
            block_bad = true;
            continue;
        }
        const auto sep = line.find("|||");
        if (sep == std::string_view::npos || line.find("|||", sep + 3) != std::string_view::npos) {
            corpus.issues.push_back({line_no, "expected exactly one 'source ||| target' separator; block skipped"});
            block_bad = true;
            continue;
        }
        SentencePair pair{split_ws(line.substr(0, sep)), split_ws(line.substr(sep + 3))};
        if (pair.source.empty() || pair.target.empty()) {
            corpus.issues.push_back({line_no, "empty source or target sentence; block skipped"});
            block_bad = true;
            continue;
        }
        bool reserved = false;
        for (const auto *side : {&pair.source, &pair.target})
            for (const auto &w : *side) reserved = reserved || w == kSep;
        if (reserved) {
            corpus.issues.push_back({line_no, "sentence contains the reserved [SEP] token; block skipped"});
            block_bad = true;
            continue;
        }
        doc.pairs.push_back(std::move(pair));
    }
    if (in_block && !block_bad && doc.pairs.empty())
        corpus.issues.push_back({block_start, "document header without sentence pairs"});
    flush();
    return corpus;
}

Corpus load_corpus(const std::filesystem::path &path) {
    auto corpus = parse_corpus(read_text_file(path));
    if (corpus.documents.empty()) {
        std::string message = "no valid documents in " + path.string();
        if (!corpus.issues.empty())
            message += " (line " + std::to_string(corpus.issues.front().line) + ": " +
                       corpus.issues.front().message + ")";
        throw InvalidArgument(message);
    }
    return corpus;
}

std::string write_corpus(const std::vector<Document> &documents) {
    std::string out;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        if (d) out += '\n';
        const auto &doc = documents[d];
        if (!doc.id.empty()) out += "# " + doc.id + "\n";
        for (const auto &pair : doc.pairs) {
            std::string line;
            append_words(line, pair.source, pair.source.size());
            line += " |||";
            for (const auto &w : pair.target) line += " " + w;
            out += line + "\n";
        }
    }
    return out;
}

// ─── Sampling ───────────────────────────────────────────────────────────────

void GenConfig::validate() const {
    if (min_context < 1 || min_context > max_context)
        throw InvalidArgument("context bounds must satisfy 1 <= min_context <= max_context");
    if (!(prefix_rate >= 0.0 && prefix_rate <= 1.0))
        throw InvalidArgument("prefix_rate must lie in [0, 1]");
}

std::size_t projected_source_cut(std::size_t source_len, std::size_t target_len, std::size_t target_cut) {
    if (source_len == 0 || target_len == 0) throw InvalidArgument("sentences must be non-empty");
    if (target_cut < 1 || target_cut > target_len) throw InvalidArgument("target cut out of range");
    const double projected = static_cast<double>(target_cut) * static_cast<double>(source_len) /
                             static_cast<double>(target_len);
    const auto rounded = static_cast<std::size_t>(std::llround(projected));
    return std::min(source_len, std::max<std::size_t>(1, rounded));
}

Sample build_sample(const Document &doc, std::size_t s, std::size_t c, std::optional<std::size_t> target_cut) {
    if (doc.pairs.empty()) throw InvalidArgument("document has no sentence pairs");
    if (s >= doc.pairs.size()) throw InvalidArgument("sentence index out of range");
    if (c > s) throw InvalidArgument("context longer than the preceding sentences");
    const auto &active = doc.pairs[s];
    if (active.source.empty() || active.target.empty()) throw InvalidArgument("empty sentence in document");

    Sample out;
    out.sentence_index = s;
    out.context = c;
    out.target_cut = active.target.size();
    out.source_cut = active.source.size();
    if (target_cut) {
        out.prefixed = true;
        out.source_cut = projected_source_cut(active.source.size(), active.target.size(), *target_cut);
        out.target_cut = *target_cut;
    }
    const std::string sep(kSep);
    for (std::size_t i = s - c; i < s; ++i) {
        append_words(out.source, doc.pairs[i].source, doc.pairs[i].source.size());
        out.source += " " + sep;
        append_words(out.target, doc.pairs[i].target, doc.pairs[i].target.size());
        out.target += " " + sep;
    }
    append_words(out.source, active.source, out.source_cut);
    append_words(out.target, active.target, out.target_cut);
    return out;
}

Sample gen_sample(const Document &doc, const GenConfig &cfg, Rng &rng) {
    cfg.validate();
    const std::size_t n = doc.pairs.size();
    if (n == 0) throw InvalidArgument("document has no sentence pairs");

    std::size_t s = 0;
    std::size_t c = 0;
    bool clamped = false;
    if (n >= 2) {
        // prefer positions with at least min_context predecessors
        const std::size_t lo_s = n - 1 >= cfg.min_context ? cfg.min_context : 1;
        clamped = lo_s < cfg.min_context;
        s = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo_s), static_cast<std::int64_t>(n - 1)));
        const std::size_t lo_c = std::min(cfg.min_context, s);
        const std::size_t hi_c = std::min(cfg.max_context, s);
        c = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo_c), static_cast<std::int64_t>(hi_c)));
    }

    std::optional<std::size_t> cut;
    if (rng.bernoulli(cfg.prefix_rate)) {
        const auto len = static_cast<std::int64_t>(doc.pairs[s].target.size());
        cut = static_cast<std::size_t>(rng.uniform_int(1, len));
    }
    Sample out = build_sample(doc, s, c, cut);
    out.clamped = clamped;
    out.context_free = n == 1;
    return out;
}

void GenStats::add(const Sample &sample) {
    ++samples;
    if (sample.prefixed) ++prefixed;
    if (sample.clamped) ++clamped;
    if (sample.context_free) ++context_free;
    ++context_histogram[sample.context];
}

SampleGenerator::SampleGenerator(std::vector<Document> documents, GenConfig cfg)
    : documents_(std::move(documents)), cfg_(cfg) {
    cfg_.validate();
    if (documents_.empty()) throw InvalidArgument("no documents to sample from");
}

Sample SampleGenerator::draw(std::uint64_t index) const {
    Rng rng(mix_seed(cfg_.seed, index));
    const auto &doc = documents_[rng.index(documents_.size())];
    return gen_sample(doc, cfg_, rng);
}

} // namespace simulst
