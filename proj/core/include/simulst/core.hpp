#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

/// Reserved sentence-boundary token of the MT stream.
inline constexpr std::string_view kSep = "[SEP]";

// ─── Errors ─────────────────────────────────────────────────────────────────

enum class ErrorKind { invalid_argument, protocol, backend, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string &message)
        : Error(ErrorKind::invalid_argument, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string &message) : Error(ErrorKind::io, message) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string &message)
        : Error(ErrorKind::backend, message) {}
};

/// Malformed or schema-violating data received from a backend. `field` names
/// the offending JSON path when one can be identified.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string &message, std::string field = {},
                  std::string payload = {})
        : Error(ErrorKind::protocol, compose(message, field)),
          field_(std::move(field)), payload_(std::move(payload)) {}

    const std::string &field() const noexcept { return field_; }
    const std::string &payload() const noexcept { return payload_; }

private:
    static std::string compose(const std::string &message, const std::string &field) {
        return field.empty() ? message : message + " (field '" + field + "')";
    }

    std::string field_;
    std::string payload_;
};

const char *to_string(ErrorKind kind) noexcept;

// ─── Domain types ───────────────────────────────────────────────────────────

/// A recognized word with absolute source-audio timestamps in seconds.
struct TimedWord {
    std::string text;
    double start_s = 0.0;
    double end_s = 0.0;

    friend bool operator==(const TimedWord &, const TimedWord &) = default;
};

struct AsrHypothesis {
    std::vector<TimedWord> words;
    double window_offset_s = 0.0;

    friend bool operator==(const AsrHypothesis &, const AsrHypothesis &) = default;
};

/// One beam of the MT backend. Tokens include the already committed target
/// prefix of the active segment; `attention[j]` is the weight row of token j
/// over the active source words of the request.
struct BeamHypothesis {
    std::vector<std::string> tokens;
    double score = 0.0;
    std::vector<std::vector<double>> attention;

    friend bool operator==(const BeamHypothesis &, const BeamHypothesis &) = default;
};

struct BeamSet {
    std::vector<BeamHypothesis> beams; // descending score
    std::size_t requested_size = 0;

    friend bool operator==(const BeamSet &, const BeamSet &) = default;
};

struct StreamHistory {
    std::vector<std::vector<std::string>> source_sentences;
    std::vector<std::vector<std::string>> target_sentences;
    std::vector<std::string> active_source;
    std::vector<std::string> active_target_committed;

    std::size_t history_source_words() const;
    std::size_t buffered_source_words() const {
        return history_source_words() + active_source.size();
    }

    friend bool operator==(const StreamHistory &, const StreamHistory &) = default;
};

struct EmissionRecord {
    std::string token;
    std::size_t segment_ordinal = 0;
    double nca_time_s = 0.0;
    double ca_time_s = 0.0;

    friend bool operator==(const EmissionRecord &, const EmissionRecord &) = default;
};

/// Checks that `text` can enter the engine as a single source word: non-empty,
/// no whitespace, and not the reserved sentinel. Throws InvalidArgument.
void validate_word(std::string_view text);

/// Non-throwing variant of validate_word; returns the reason or empty.
std::string word_problem(std::string_view text);

// ─── Virtual clock ──────────────────────────────────────────────────────────

/// Simulation time. `audio_available_s` is how much source audio exists,
/// `now_s` is the virtual wall clock; compute charges only move `now_s`.
class VirtualClock {
public:
    VirtualClock() = default;
    VirtualClock(double audio_available_s, double now_s);

    double audio_available_s() const noexcept { return audio_s_; }
    double now_s() const noexcept { return now_s_; }

    void advance_audio(double delta_s);
    void charge_compute(double cost_s);

    friend bool operator==(const VirtualClock &, const VirtualClock &) = default;

private:
    double audio_s_ = 0.0;
    double now_s_ = 0.0;
};

VirtualClock clock_advance_audio(VirtualClock clock, double delta_s);
VirtualClock clock_charge_compute(VirtualClock clock, double cost_s);

} // namespace simulst
