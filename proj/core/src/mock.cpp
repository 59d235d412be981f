#include "simulst/mock.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <sstream>

namespace simulst {

double MockAsrScript::extent_s() const {
    if (duration_s > 0.0) return duration_s;
    return words.empty() ? 0.0 : words.back().end_s;
}

void MockScript::validate() const {
    double prev_end = 0.0;
    for (const auto &w : asr.words) {
        if (auto problem = word_problem(w.text); !problem.empty())
            throw InvalidArgument("mock script: " + problem);
        if (!(w.start_s >= 0.0) || !(w.start_s <= w.end_s))
            throw InvalidArgument("mock script: word '" + w.text + "' has invalid timestamps");
        if (w.end_s < prev_end)
            throw InvalidArgument("mock script: word timestamps must be non-decreasing");
        prev_end = w.end_s;
    }
    if (asr.duration_s != 0.0 && asr.duration_s < prev_end)
        throw InvalidArgument("mock script: duration_s ends before the last word");
    if (!(asr.stabilization_delay_s >= 0.0) || !(asr.cost_base_s >= 0.0) || !(asr.cost_per_s >= 0.0))
        throw InvalidArgument("mock script: ASR delays and costs must be non-negative");
    const auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate(mt.disagree_rate) || !rate(mt.empty_rate) || mt.disagree_rate + mt.empty_rate > 1.0)
        throw InvalidArgument("mock script: beam rates must lie in [0, 1] and sum to at most 1");
    if (!(mt.attention_blur >= 0.0 && mt.attention_blur < 0.5))
        throw InvalidArgument("mock script: attention_blur must lie in [0, 0.5)");
    if (!(mt.cost_base_s >= 0.0) || !(mt.cost_per_word_s >= 0.0))
        throw InvalidArgument("mock script: MT costs must be non-negative");
    for (const auto &[from, to] : mt.word_map) {
        if (!word_problem(from).empty() || !word_problem(to).empty())
            throw InvalidArgument("mock script: invalid word_map entry '" + from + "'");
    }
}

MockScript parse_mock_script(std::string_view json_text) {
    MockScript script;
    try {
        const auto doc = json::parse(json_text);
        script.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("asr")) {
            const auto &a = doc.at("asr");
            for (const auto &w : a.value("words", json::array())) {
                script.asr.words.push_back(
                    {w.at("text").get<std::string>(), w.at("start_s").get<double>(),
                     w.at("end_s").get<double>()});
            }
            script.asr.duration_s = a.value("duration_s", 0.0);
            script.asr.stabilization_delay_s = a.value("stabilization_delay_s", 0.0);
            script.asr.cost_base_s = a.value("cost_base_s", script.asr.cost_base_s);
            script.asr.cost_per_s = a.value("cost_per_s", script.asr.cost_per_s);
        }
        if (doc.contains("mt")) {
            const auto &m = doc.at("mt");
            if (m.contains("word_map"))
                script.mt.word_map = m.at("word_map").get<std::map<std::string, std::string>>();
            const auto fallback = m.value("fallback", std::string("identity"));
            if (fallback == "identity") {
                script.mt.fallback = WordFallback::identity;
            } else if (fallback == "upper") {
                script.mt.fallback = WordFallback::upper;
            } else {
                throw InvalidArgument("mock script: unknown fallback '" + fallback + "'");
            }
            script.mt.disagree_rate = m.value("disagree_rate", 0.0);
            script.mt.empty_rate = m.value("empty_rate", 0.0);
            script.mt.attention_blur = m.value("attention_blur", 0.0);
            script.mt.cost_base_s = m.value("cost_base_s", script.mt.cost_base_s);
            script.mt.cost_per_word_s = m.value("cost_per_word_s", script.mt.cost_per_word_s);
            script.mt.max_beams = m.value("max_beams", std::size_t{0});
        }
    } catch (const json::exception &e) {
        throw InvalidArgument(std::string("mock script: ") + e.what());
    }
    script.validate();
    return script;
}

MockScript load_mock_script(const std::filesystem::path &path) {
    return parse_mock_script(read_text_file(path));
}

std::string dump_mock_script(const MockScript &script) {
    ojson doc;
    doc["seed"] = script.seed;
    ojson words = ojson::array();
    for (const auto &w : script.asr.words)
        words.push_back(ojson{{"text", w.text}, {"start_s", w.start_s}, {"end_s", w.end_s}});
    doc["asr"] = ojson{{"words", std::move(words)},
                       {"duration_s", script.asr.duration_s},
                       {"stabilization_delay_s", script.asr.stabilization_delay_s},
                       {"cost_base_s", script.asr.cost_base_s},
                       {"cost_per_s", script.asr.cost_per_s}};
    ojson map = ojson::object();
    for (const auto &[from, to] : script.mt.word_map) map[from] = to;
    doc["mt"] = ojson{{"word_map", std::move(map)},
                      {"fallback", script.mt.fallback == WordFallback::upper ? "upper" : "identity"},
                      {"disagree_rate", script.mt.disagree_rate},
                      {"empty_rate", script.mt.empty_rate},
                      {"attention_blur", script.mt.attention_blur},
                      {"cost_base_s", script.mt.cost_base_s},
                      {"cost_per_word_s", script.mt.cost_per_word_s},
                      {"max_beams", script.mt.max_beams}};
    return doc.dump(2) + "\n";
}

// ─── Perturbations ──────────────────────────────────────────────────────────

namespace {

bool ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool trailing_punct(char c) {
    return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

} // namespace

std::string perturb_word(const std::string &word, Rng &rng, PerturbKind *kind) {
    auto chosen = static_cast<PerturbKind>(rng.index(4));
    std::string out = word;
    switch (chosen) {
    case PerturbKind::none:
        break;
    case PerturbKind::case_flip: {
        auto it = std::find_if(out.begin(), out.end(), ascii_alpha);
        if (it == out.end()) {
            chosen = PerturbKind::none;
        } else {
            const auto c = static_cast<unsigned char>(*it);
            *it = static_cast<char>(std::islower(c) ? std::toupper(c) : std::tolower(c));
        }
        break;
    }
    case PerturbKind::punct_toggle:
        if (out.size() > 1 && trailing_punct(out.back())) {
            out.pop_back();
        } else {
            out.push_back(',');
        }
        break;
    case PerturbKind::substitution: {
        std::vector<std::size_t> letters;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (ascii_alpha(out[i])) letters.push_back(i);
        if (letters.empty()) {
            chosen = PerturbKind::none;
            break;
        }
        const std::size_t edits = std::min<std::size_t>(letters.size(), 1 + rng.index(2));
        for (std::size_t e = 0; e < edits; ++e) {
            const std::size_t pick = e + rng.index(letters.size() - e);
            std::swap(letters[e], letters[pick]);
            char &c = out[letters[e]];
            const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            char repl = static_cast<char>('a' + rng.index(25));
            if (repl >= lower) ++repl; // skip the original letter
            c = repl;
        }
        break;
    }
    }
    if (kind) *kind = chosen;
    return out;
}

// ─── ASR mock ───────────────────────────────────────────────────────────────

MockAsrBackend::MockAsrBackend(MockScript script) : script_(std::move(script)) {
    script_.validate();
}

AsrResponse MockAsrBackend::decode(const AsrRequest &request) {
    const double ws = request.window_start_s;
    const double we = request.window_end_s;
    if (!(ws >= 0.0) || !(we >= ws))
        throw InvalidArgument("mock ASR: invalid window");
    if (we > script_.asr.extent_s() + 1e-9)
        throw InvalidArgument("mock ASR: window outside the script's audio extent");

    AsrResponse response;
    response.hypothesis.window_offset_s = ws;
    const double delay = script_.asr.stabilization_delay_s;
    const auto window_seed = mix_seed(script_.seed, std::bit_cast<std::uint64_t>(we));
    for (std::size_t i = 0; i < script_.asr.words.size(); ++i) {
        const auto &w = script_.asr.words[i];
        if (w.start_s < ws || w.end_s > we) continue;
        TimedWord out = w;
        if (delay > 0.0 && w.end_s > we - delay) {
            Rng rng(mix_seed(window_seed, i));
            out.text = perturb_word(w.text, rng);
        }
        response.hypothesis.words.push_back(std::move(out));
    }
    response.compute_cost_s = script_.asr.cost_base_s + script_.asr.cost_per_s * (we - ws);
    return response;
}

// ─── MT mock ────────────────────────────────────────────────────────────────

MockMtBackend::MockMtBackend(MockScript script, SentenceSplitter splitter)
    : script_(std::move(script)), splitter_(std::move(splitter)) {
    script_.validate();
}

std::string MockMtBackend::map_word(const std::string &word) const {
    if (auto it = script_.mt.word_map.find(word); it != script_.mt.word_map.end())
        return it->second;
    if (script_.mt.fallback == WordFallback::identity) return word;
    std::string out = word;
    for (auto &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> MockMtBackend::translate_offline(std::span<const std::string> source) const {
    std::vector<std::string> out;
    for (const auto &w : source) {
        out.push_back(map_word(w));
        if (splitter_.is_sentence_end(w)) out.emplace_back(kSep);
    }
    return out;
}

namespace {

std::uint64_t request_hash(const MtRequest &r) {
    std::uint64_t h = fnv1a("mt");
    const auto add = [&h](std::string_view s) { h = fnv1a("\x1f", fnv1a(s, h)); };
    const auto add_sentences = [&](const auto &sentences) {
        for (const auto &s : sentences) {
            for (const auto &w : s) add(w);
            h = fnv1a("\x1e", h);
        }
        h = fnv1a("\x1d", h);
    };
    add_sentences(r.history_source);
    add_sentences(r.history_target);
    for (const auto &w : r.active_source) add(w);
    h = fnv1a("\x1d", h);
    for (const auto &w : r.committed_target) add(w);
    h = fnv1a("\x1d", h);
    add(std::to_string(r.beam_size));
    add(r.attention_layer_tag);
    return h;
}

} // namespace

MtResponse MockMtBackend::translate(const MtRequest &request) {
    const auto &src = request.active_source;
    std::vector<std::string> full;
    std::vector<std::size_t> align;
    for (std::size_t i = 0; i < src.size(); ++i) {
        full.push_back(map_word(src[i]));
        align.push_back(i);
        if (splitter_.is_sentence_end(src[i])) {
            full.emplace_back(kSep);
            align.push_back(i);
        }
    }

    const std::uint64_t req_seed = mix_seed(script_.seed, request_hash(request));
    const std::size_t committed = request.committed_target.size();

    BeamHypothesis top;
    if (committed < full.size()) {
        top.tokens = request.committed_target;
        top.tokens.insert(top.tokens.end(), full.begin() + static_cast<std::ptrdiff_t>(committed),
                          full.end());
        for (std::size_t j = 0; j < top.tokens.size(); ++j) {
            std::vector<double> row(src.size(), 0.0);
            row[align[std::min(j, align.size() - 1)]] = 1.0;
            if (script_.mt.attention_blur > 0.0) {
                Rng noise(mix_seed(req_seed ^ 0xA77E7710Aull, j));
                double sum = 0.0;
                for (auto &x : row) {
                    x += script_.mt.attention_blur * noise.uniform01();
                    sum += x;
                }
                for (auto &x : row) x /= sum;
            }
            top.attention.push_back(std::move(row));
        }
    }

    std::size_t n = request.beam_size;
    if (script_.mt.max_beams > 0) n = std::min(n, script_.mt.max_beams);

    MtResponse response;
    response.beams.requested_size = request.beam_size;
    for (std::size_t b = 0; b < n; ++b) {
        BeamHypothesis beam = top;
        beam.score = -static_cast<double>(b);
        if (b > 0 && !beam.tokens.empty()) {
            Rng rng(mix_seed(req_seed, b));
            const double u = rng.uniform01();
            const std::size_t tail = beam.tokens.size() - committed;
            if (u < script_.mt.empty_rate) {
                beam.tokens.clear();
                beam.attention.clear();
            } else if (u < script_.mt.empty_rate + script_.mt.disagree_rate) {
                if (rng.bernoulli(0.5)) {
                    const std::size_t cut = 1 + rng.index(tail);
                    beam.tokens.resize(beam.tokens.size() - cut);
                    beam.attention.resize(beam.tokens.size());
                } else {
                    const std::size_t p = committed + rng.index(tail);
                    beam.tokens[p] += "~" + std::to_string(b);
                }
            }
        }
        response.beams.beams.push_back(std::move(beam));
    }
    response.compute_cost_s =
        script_.mt.cost_base_s + script_.mt.cost_per_word_s * static_cast<double>(src.size());
    return response;
}

} // namespace simulst
