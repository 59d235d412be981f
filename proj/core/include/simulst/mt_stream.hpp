#pragma once

#include "simulst/backend.hpp"
#include "simulst/core.hpp"
#include "simulst/policy.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simulst {

enum class HistoryRemoval {
    /// Drop the oldest (source, target) sentence pair.
    oldest_sentence_pair,
    /// Drop the oldest `history_remove_words` words from each side independently.
    word_count,
};

struct MtStreamConfig {
    RalcpConfig ralcp;
    WaitKConfig waitk;
    std::size_t max_buffer_words = 80;
    HistoryRemoval history_remove = HistoryRemoval::oldest_sentence_pair;
    std::size_t history_remove_words = 20;
    std::string attention_layer_tag = "6";

    void validate() const;
};

struct SegmentClosure {
    std::size_t cut_index = 0; // last active source position moved to history
    std::vector<std::string> source_words;
    std::vector<std::string> target_tokens; // ends with [SEP]
    std::size_t active_size = 0;            // |active_source| at closure time
    bool forced = false;                    // closed by buffer pressure, not by the model
};

struct MtCounters {
    std::size_t backend_calls = 0;
    std::size_t segments_closed = 0;
    std::size_t forced_closures = 0;
    std::size_t evictions = 0;
    std::size_t dropped_source_words = 0;
};

/// Source position of the most attended word in `attention_row`; ties go to
/// the largest index. Throws InvalidArgument on an empty row.
std::size_t segment_source(std::span<const double> attention_row);

/// Streaming MT with [SEP]-delimited history.
///
/// Committed ASR words extend the active source. Target tokens are emitted
/// by RALCP voting, held back by wait-k at the start of each segment. An
/// emitted [SEP] closes the segment: the source cut is the argmax-attended
/// source word of the token before the sentinel, and the closed pair moves
/// into the history, which is evicted oldest-first past `max_buffer_words`.
class MtStreamController {
public:
    explicit MtStreamController(MtStreamConfig cfg = {}, std::string stream_id = "0");

    /// Feeds freshly committed source words and returns the emissions. A step
    /// is all-or-nothing: on error neither the controller nor the clock change.
    std::vector<EmissionRecord> step(std::span<const std::string> new_source_words,
                                     VirtualClock &clock, MtBackend &backend);

    /// End of stream: the wait-k hold is lifted and the best beam is written
    /// out until the remaining source is translated.
    std::vector<EmissionRecord> finish(VirtualClock &clock, MtBackend &backend);

    const StreamHistory &history() const { return history_; }
    const MtStreamConfig &config() const { return cfg_; }
    const MtCounters &counters() const { return counters_; }
    const std::vector<SegmentClosure> &closures() const { return closures_; }
    std::size_t segment_ordinal() const { return segment_ordinal_; }

private:
    struct Snapshot {
        StreamHistory history;
        std::size_t segment_ordinal = 0;
        MtCounters counters;
        std::vector<SegmentClosure> closures;
        std::optional<BeamHypothesis> last_top_beam;
        VirtualClock clock;
        std::vector<EmissionRecord> out;
    };

    Snapshot snapshot(const VirtualClock &clock) const;
    void apply(Snapshot &&s, VirtualClock &clock);
    void advance(Snapshot &s, MtBackend &backend, bool finishing) const;
    BeamSet call(Snapshot &s, MtBackend &backend) const;
    void emit(Snapshot &s, std::string token) const;
    void close_segment(Snapshot &s, std::size_t cut, bool forced) const;
    void evict(Snapshot &s) const;

    MtStreamConfig cfg_;
    std::string stream_id_;
    StreamHistory history_;
    std::size_t segment_ordinal_ = 0;
    MtCounters counters_;
    std::vector<SegmentClosure> closures_;
    std::optional<BeamHypothesis> last_top_beam_;
};

/// Checks shape invariants of a backend reply; throws ProtocolError.
void validate_mt_response(const MtRequest &request, const MtResponse &response);

} // namespace simulst
