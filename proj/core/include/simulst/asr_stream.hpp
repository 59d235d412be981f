#pragma once

#include "simulst/backend.hpp"
#include "simulst/core.hpp"
#include "simulst/textnorm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace simulst {

struct AsrStreamConfig {
    double max_window_s = 30.0;
    double min_chunk_s = 1.0;
    double initial_wait_s = 1.0;
    MatchConfig matcher;
    std::size_t backend_beam = 5;

    void validate() const;
};

struct AsrStreamState {
    double window_start_s = 0.0;
    double decoded_until_s = 0.0; // audio_available_s at the last decode
    bool decoded_once = false;
    std::optional<AsrHypothesis> prev_hypothesis;
    std::vector<TimedWord> committed;
    std::vector<std::size_t> committed_sentence_ends;
    std::size_t committed_in_window = 0; // committed words lying inside the window

    friend bool operator==(const AsrStreamState &, const AsrStreamState &) = default;
};

struct AsrCounters {
    std::size_t backend_calls = 0;
    std::size_t sentence_trims = 0;
    std::size_t forced_trims = 0;
};

/// Streaming ASR commitment over a growing audio window.
///
/// Each decode covers [window_start, audio_available]. Words on which two
/// consecutive hypotheses of the same window agree (relaxed LCP) are
/// committed with the latest hypothesis's surface form. A committed sentence
/// end moves the window start to that word's end; a window longer than
/// `max_window_s` is force-trimmed.
class AsrStreamController {
public:
    explicit AsrStreamController(AsrStreamConfig cfg = {}, SentenceSplitter splitter = {},
                                 std::string stream_id = "0");

    /// One policy step after new audio became available. Returns the newly
    /// committed words. On backend or protocol errors the controller and the
    /// clock are left untouched.
    std::vector<TimedWord> step(VirtualClock &clock, AsrBackend &backend);

    /// End of stream: decode the remaining window once and commit all of it.
    std::vector<TimedWord> finish(VirtualClock &clock, AsrBackend &backend);

    const AsrStreamState &state() const { return state_; }
    const AsrStreamConfig &config() const { return cfg_; }
    const AsrCounters &counters() const { return counters_; }

    double window_length(const VirtualClock &clock) const {
        return clock.audio_available_s() - state_.window_start_s;
    }

private:
    AsrHypothesis decode(VirtualClock &clock, AsrBackend &backend);
    void commit(const TimedWord &word, std::vector<TimedWord> &fresh);
    void trim_after_commit(const VirtualClock &clock, std::size_t first_fresh);

    AsrStreamConfig cfg_;
    SentenceSplitter splitter_;
    std::string stream_id_;
    AsrStreamState state_;
    AsrCounters counters_;
};

/// Validates a backend reply against its request; throws ProtocolError.
void validate_asr_response(const AsrRequest &request, const AsrResponse &response);

} // namespace simulst
