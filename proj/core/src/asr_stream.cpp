#include "simulst/asr_stream.hpp"

#include "simulst/policy.hpp"

#include <algorithm>
#include <cmath>

namespace simulst {

void AsrStreamConfig::validate() const {
    if (!(min_chunk_s > 0.0) || !(min_chunk_s <= max_window_s))
        throw InvalidArgument("ASR stream requires 0 < min_chunk_s <= max_window_s");
    if (!(initial_wait_s >= 0.0)) throw InvalidArgument("ASR initial wait must be non-negative");
    if (backend_beam == 0) throw InvalidArgument("ASR beam size must be at least 1");
}

void validate_asr_response(const AsrRequest &request, const AsrResponse &response) {
    constexpr double tol = 1e-6;
    if (!(response.compute_cost_s >= 0.0) || !std::isfinite(response.compute_cost_s))
        throw ProtocolError("compute cost must be finite and non-negative", "compute_cost_s");
    const auto &hyp = response.hypothesis;
    if (std::abs(hyp.window_offset_s - request.window_start_s) > tol)
        throw ProtocolError("hypothesis window does not match the request", "window_offset_s");
    double prev_end = -INFINITY;
    for (std::size_t i = 0; i < hyp.words.size(); ++i) {
        const auto &w = hyp.words[i];
        const std::string at = "words[" + std::to_string(i) + "]";
        if (auto problem = word_problem(w.text); !problem.empty())
            throw ProtocolError(problem, at + ".text");
        if (!(w.start_s <= w.end_s)) throw ProtocolError("word starts after it ends", at + ".start_s");
        if (w.start_s < request.window_start_s - tol || w.end_s > request.window_end_s + tol)
            throw ProtocolError("word lies outside the requested window", at + ".end_s");
        if (w.end_s < prev_end) throw ProtocolError("word end times must be non-decreasing", at + ".end_s");
        prev_end = w.end_s;
    }
}

AsrStreamController::AsrStreamController(AsrStreamConfig cfg, SentenceSplitter splitter,
                                         std::string stream_id)
    : cfg_(std::move(cfg)), splitter_(std::move(splitter)), stream_id_(std::move(stream_id)) {
    cfg_.validate();
}

AsrHypothesis AsrStreamController::decode(VirtualClock &clock, AsrBackend &backend) {
    const AsrRequest request{stream_id_, state_.window_start_s, clock.audio_available_s(),
                             cfg_.backend_beam};
    auto response = backend.decode(request);
    validate_asr_response(request, response);
    // nothing below throws: a failed call leaves state and clock untouched
    clock.charge_compute(response.compute_cost_s);
    ++counters_.backend_calls;
    state_.decoded_until_s = request.window_end_s;
    state_.decoded_once = true;
    return std::move(response.hypothesis);
}

void AsrStreamController::commit(const TimedWord &word, std::vector<TimedWord> &fresh) {
    TimedWord w = word;
    if (!state_.committed.empty()) {
        // hypotheses may re-time earlier words slightly; keep the transcript ordered
        const double last_end = state_.committed.back().end_s;
        w.start_s = std::max(w.start_s, last_end);
        w.end_s = std::max(w.end_s, w.start_s);
    }
    state_.committed.push_back(w);
    fresh.push_back(std::move(w));
}

void AsrStreamController::trim_after_commit(const VirtualClock &clock, std::size_t first_fresh) {
    std::vector<std::string> texts;
    texts.reserve(state_.committed.size() - first_fresh);
    for (std::size_t i = first_fresh; i < state_.committed.size(); ++i)
        texts.push_back(state_.committed[i].text);

    std::optional<std::size_t> last_end;
    for (auto at = splitter_.detect(texts, 0); at; at = splitter_.detect(texts, *at + 1)) {
        last_end = first_fresh + *at;
        state_.committed_sentence_ends.push_back(*last_end);
    }
    if (last_end) {
        state_.window_start_s = std::max(state_.window_start_s, state_.committed[*last_end].end_s);
        state_.committed_in_window = state_.committed.size() - 1 - *last_end;
        state_.prev_hypothesis.reset();
        ++counters_.sentence_trims;
    }

    const double audio = clock.audio_available_s();
    const double length = audio - state_.window_start_s;
    if (length > cfg_.max_window_s) {
        // agreed words are already committed; only the unagreed tail is re-decoded
        double target = state_.committed_in_window > 0
                            ? state_.committed.back().end_s
                            : state_.window_start_s + (length - cfg_.max_window_s);
        target = std::max(target, audio - cfg_.max_window_s);
        state_.window_start_s = std::max(state_.window_start_s, target);
        state_.committed_in_window = 0;
        state_.prev_hypothesis.reset();
        ++counters_.forced_trims;
    }
}

std::vector<TimedWord> AsrStreamController::step(VirtualClock &clock, AsrBackend &backend) {
    const double audio = clock.audio_available_s();
    const double pending = audio - state_.decoded_until_s;
    bool ready = pending >= cfg_.min_chunk_s && (state_.decoded_once || audio >= cfg_.initial_wait_s);
    // an overlong window is decoded even below the chunk size so it can be trimmed
    if (!ready && pending > 0.0 && window_length(clock) > cfg_.max_window_s) ready = true;
    if (!ready) return {};

    const double window_start = state_.window_start_s;
    AsrHypothesis curr = decode(clock, backend);

    std::vector<TimedWord> fresh;
    const std::size_t first_fresh = state_.committed.size();
    const auto &prev = state_.prev_hypothesis;
    if (prev && prev->window_offset_s == window_start) {
        std::vector<std::string> prev_texts, curr_texts;
        for (const auto &w : prev->words) prev_texts.push_back(w.text);
        for (const auto &w : curr.words) curr_texts.push_back(w.text);
        const std::size_t agreed =
            agreed_prefix_len(prev_texts, curr_texts, state_.committed_in_window, cfg_.matcher);
        for (std::size_t i = state_.committed_in_window; i < agreed; ++i) commit(curr.words[i], fresh);
        state_.committed_in_window = std::max(state_.committed_in_window, agreed);
    }
    state_.prev_hypothesis = std::move(curr);
    trim_after_commit(clock, first_fresh);
    return fresh;
}

std::vector<TimedWord> AsrStreamController::finish(VirtualClock &clock, AsrBackend &backend) {
    if (!(window_length(clock) > 0.0)) return {};
    AsrHypothesis curr = decode(clock, backend);

    std::vector<TimedWord> fresh;
    const std::size_t first_fresh = state_.committed.size();
    for (std::size_t i = state_.committed_in_window; i < curr.words.size(); ++i)
        commit(curr.words[i], fresh);
    state_.committed_in_window = std::max(state_.committed_in_window, curr.words.size());
    state_.prev_hypothesis = std::move(curr);
    trim_after_commit(clock, first_fresh);
    return fresh;
}

} // namespace simulst
