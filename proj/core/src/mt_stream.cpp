#include "simulst/mt_stream.hpp"

#include <algorithm>
#include <cmath>

namespace simulst {

void MtStreamConfig::validate() const {
    ralcp.validate();
    waitk.validate();
    if (max_buffer_words < 1) throw InvalidArgument("MT max buffer must hold at least one word");
    if (history_remove == HistoryRemoval::word_count && history_remove_words < 1)
        throw InvalidArgument("word-count history removal needs n >= 1");
}

std::size_t segment_source(std::span<const double> attention_row) {
    if (attention_row.empty()) throw InvalidArgument("attention row is empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < attention_row.size(); ++i) {
        if (attention_row[i] >= attention_row[best]) best = i;
    }
    return best;
}

void validate_mt_response(const MtRequest &request, const MtResponse &response) {
    if (!(response.compute_cost_s >= 0.0) || !std::isfinite(response.compute_cost_s))
        throw ProtocolError("compute cost must be finite and non-negative", "compute_cost_s");
    const auto &set = response.beams;
    if (set.requested_size != request.beam_size)
        throw ProtocolError("beam set answers a different beam size", "requested_size");
    if (set.beams.size() > set.requested_size)
        throw ProtocolError("more beams than requested", "beams");
    const std::size_t width = request.active_source.size();
    for (std::size_t b = 0; b < set.beams.size(); ++b) {
        const auto &beam = set.beams[b];
        const std::string at = "beams[" + std::to_string(b) + "]";
        if (b > 0 && beam.score > set.beams[b - 1].score)
            throw ProtocolError("beams must be sorted by descending score", at + ".score");
        if (beam.attention.size() != beam.tokens.size())
            throw ProtocolError("attention needs exactly one row per token", at + ".attention");
        for (std::size_t j = 0; j < beam.tokens.size(); ++j) {
            const auto &token = beam.tokens[j];
            if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos)
                throw ProtocolError("tokens must be non-empty and free of whitespace",
                                    at + ".tokens[" + std::to_string(j) + "]");
            const auto &row = beam.attention[j];
            const std::string row_at = at + ".attention[" + std::to_string(j) + "]";
            if (row.size() != width)
                throw ProtocolError("attention row length differs from the active source", row_at);
            for (double w : row) {
                if (!(w >= 0.0) || !std::isfinite(w))
                    throw ProtocolError("attention weights must be finite and non-negative", row_at);
            }
        }
    }
}

MtStreamController::MtStreamController(MtStreamConfig cfg, std::string stream_id)
    : cfg_(std::move(cfg)), stream_id_(std::move(stream_id)) {
    cfg_.validate();
}

MtStreamController::Snapshot MtStreamController::snapshot(const VirtualClock &clock) const {
    return Snapshot{history_, segment_ordinal_, counters_, {}, last_top_beam_, clock, {}};
}

void MtStreamController::apply(Snapshot &&s, VirtualClock &clock) {
    history_ = std::move(s.history);
    segment_ordinal_ = s.segment_ordinal;
    counters_ = s.counters;
    for (auto &c : s.closures) closures_.push_back(std::move(c));
    last_top_beam_ = std::move(s.last_top_beam);
    clock = s.clock;
}

BeamSet MtStreamController::call(Snapshot &s, MtBackend &backend) const {
    MtRequest request;
    request.stream_id = stream_id_;
    request.history_source = s.history.source_sentences;
    request.history_target = s.history.target_sentences;
    request.active_source = s.history.active_source;
    request.committed_target = s.history.active_target_committed;
    request.beam_size = cfg_.ralcp.beam_size;
    request.attention_layer_tag = cfg_.attention_layer_tag;

    auto response = backend.translate(request);
    validate_mt_response(request, response);
    s.clock.charge_compute(response.compute_cost_s);
    ++s.counters.backend_calls;

    // beams that do not extend the committed prefix vote as empty
    const auto &committed = s.history.active_target_committed;
    for (auto &beam : response.beams.beams) {
        const bool extends = beam.tokens.size() >= committed.size() &&
                             std::equal(committed.begin(), committed.end(), beam.tokens.begin());
        if (!extends) {
            beam.tokens.clear();
            beam.attention.clear();
        }
    }
    return std::move(response.beams);
}

void MtStreamController::emit(Snapshot &s, std::string token) const {
    s.out.push_back(EmissionRecord{std::move(token), s.segment_ordinal,
                                   s.clock.audio_available_s(), s.clock.now_s()});
}

void MtStreamController::close_segment(Snapshot &s, std::size_t cut, bool forced) const {
    auto &h = s.history;
    cut = std::min(cut, h.active_source.size() - 1);
    const auto end = h.active_source.begin() + static_cast<std::ptrdiff_t>(cut) + 1;

    SegmentClosure closure;
    closure.cut_index = cut;
    closure.source_words.assign(h.active_source.begin(), end);
    closure.target_tokens = h.active_target_committed;
    closure.target_tokens.emplace_back(kSep);
    closure.active_size = h.active_source.size();
    closure.forced = forced;

    h.source_sentences.push_back(closure.source_words);
    h.target_sentences.push_back(std::move(h.active_target_committed));
    h.active_target_committed.clear();
    h.active_source.erase(h.active_source.begin(), end);

    s.closures.push_back(std::move(closure));
    s.last_top_beam.reset();
    ++s.segment_ordinal;
    ++s.counters.segments_closed;
    if (forced) ++s.counters.forced_closures;
}

void MtStreamController::advance(Snapshot &s, MtBackend &backend, bool finishing) const {
    auto &h = s.history;
    while (!h.active_source.empty()) {
        // words left over from a closure count as already read by the new segment
        if (!finishing && !waitk_allows(cfg_.waitk, h.active_source.size())) break;

        const BeamSet beams = call(s, backend);
        const std::size_t committed = h.active_target_committed.size();

        std::vector<std::string> emitted;
        if (finishing) {
            // source is complete: write out the best beam up to the next sentinel
            for (const auto &beam : beams.beams) {
                if (beam.tokens.size() <= committed) continue;
                for (std::size_t p = committed; p < beam.tokens.size(); ++p) {
                    emitted.push_back(beam.tokens[p]);
                    if (beam.tokens[p] == kSep) break;
                }
                break;
            }
        } else {
            emitted = ralcp_emit(beams, committed, cfg_.ralcp);
        }
        if (emitted.empty()) break;

        for (const auto &token : emitted) emit(s, token);
        const bool closes = emitted.back() == kSep;
        h.active_target_committed.insert(h.active_target_committed.end(), emitted.begin(),
                                         emitted.end() - (closes ? 1 : 0));

        if (!closes) {
            s.last_top_beam.reset();
            const auto &now = h.active_target_committed;
            for (const auto &beam : beams.beams) {
                if (beam.tokens.size() >= now.size() &&
                    std::equal(now.begin(), now.end(), beam.tokens.begin())) {
                    s.last_top_beam = beam;
                    break;
                }
            }
            break;
        }

        const std::size_t sep_pos = h.active_target_committed.size();
        std::size_t cut = 0;
        if (sep_pos > 0) {
            // prefer the best beam that wrote exactly the committed segment;
            // voting is per position, so the sentinel's voters may differ earlier
            const auto &seg = h.active_target_committed;
            const BeamHypothesis *winner = nullptr;
            for (int pass = 0; pass < 2 && !winner; ++pass) {
                for (const auto &beam : beams.beams) {
                    if (beam.tokens.size() <= sep_pos || beam.tokens[sep_pos] != kSep) continue;
                    if (pass == 0 && !std::equal(seg.begin(), seg.end(), beam.tokens.begin())) continue;
                    if (!winner || beam.score > winner->score) winner = &beam;
                }
            }
            cut = segment_source(winner->attention[sep_pos - 1]);
        }
        close_segment(s, cut, false);
    }
}

void MtStreamController::evict(Snapshot &s) const {
    auto &h = s.history;
    while (h.buffered_source_words() > cfg_.max_buffer_words) {
        if (h.history_source_words() > 0) {
            if (cfg_.history_remove == HistoryRemoval::oldest_sentence_pair) {
                h.source_sentences.erase(h.source_sentences.begin());
                h.target_sentences.erase(h.target_sentences.begin());
            } else {
                const auto drop_front = [n = cfg_.history_remove_words](auto &sentences) {
                    std::size_t left = n;
                    for (auto &sentence : sentences) {
                        const std::size_t k = std::min(left, sentence.size());
                        sentence.erase(sentence.begin(), sentence.begin() + static_cast<std::ptrdiff_t>(k));
                        left -= k;
                        if (left == 0) break;
                    }
                };
                drop_front(h.source_sentences);
                drop_front(h.target_sentences);
                // a pair leaves the history once both of its sides are gone
                while (!h.source_sentences.empty() && h.source_sentences.front().empty() &&
                       h.target_sentences.front().empty()) {
                    h.source_sentences.erase(h.source_sentences.begin());
                    h.target_sentences.erase(h.target_sentences.begin());
                }
            }
            ++s.counters.evictions;
            continue;
        }

        // the active segment alone overflows the buffer
        const auto &committed = h.active_target_committed;
        if (!committed.empty() && s.last_top_beam &&
            s.last_top_beam->attention.size() >= committed.size()) {
            const std::size_t cut = segment_source(s.last_top_beam->attention[committed.size() - 1]);
            emit(s, std::string(kSep));
            close_segment(s, cut, true);
            continue;
        }
        const std::size_t excess = h.buffered_source_words() - cfg_.max_buffer_words;
        h.active_source.erase(h.active_source.begin(),
                              h.active_source.begin() + static_cast<std::ptrdiff_t>(excess));
        s.counters.dropped_source_words += excess;
    }
}

std::vector<EmissionRecord> MtStreamController::step(std::span<const std::string> new_source_words,
                                                     VirtualClock &clock, MtBackend &backend) {
    if (new_source_words.empty()) return {};
    for (const auto &w : new_source_words) validate_word(w);

    Snapshot s = snapshot(clock);
    s.history.active_source.insert(s.history.active_source.end(), new_source_words.begin(),
                                   new_source_words.end());
    advance(s, backend, false);
    evict(s);
    auto out = std::move(s.out);
    apply(std::move(s), clock);
    return out;
}

std::vector<EmissionRecord> MtStreamController::finish(VirtualClock &clock, MtBackend &backend) {
    Snapshot s = snapshot(clock);
    advance(s, backend, true);
    evict(s);
    auto out = std::move(s.out);
    apply(std::move(s), clock);
    return out;
}

} // namespace simulst
