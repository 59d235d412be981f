#include "simulst/core.hpp"

#include <algorithm>
#include <cmath>

namespace simulst {

const char *to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument:
        return "invalid-argument";
    case ErrorKind::protocol:
        return "protocol-error";
    case ErrorKind::backend:
        return "backend-error";
    case ErrorKind::io:
        return "io-error";
    }
    return "error";
}

std::size_t StreamHistory::history_source_words() const {
    std::size_t n = 0;
    for (const auto &s : source_sentences) n += s.size();
    return n;
}

std::string word_problem(std::string_view text) {
    if (text.empty()) return "empty word";
    if (text == kSep) return "word equals the reserved token [SEP]";
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f')
            return "word '" + std::string(text) + "' contains whitespace";
    }
    return {};
}

void validate_word(std::string_view text) {
    if (auto problem = word_problem(text); !problem.empty()) throw InvalidArgument(problem);
}

VirtualClock::VirtualClock(double audio_available_s, double now_s)
    : audio_s_(audio_available_s), now_s_(now_s) {
    if (!(audio_available_s >= 0.0) || !(now_s >= 0.0))
        throw InvalidArgument("clock times must be non-negative");
}

void VirtualClock::advance_audio(double delta_s) {
    if (!(delta_s >= 0.0) || !std::isfinite(delta_s))
        throw InvalidArgument("audio advance must be a finite non-negative duration");
    audio_s_ += delta_s;
    now_s_ = std::max(now_s_, audio_s_);
}

void VirtualClock::charge_compute(double cost_s) {
    if (!(cost_s >= 0.0) || !std::isfinite(cost_s))
        throw InvalidArgument("compute cost must be a finite non-negative duration");
    now_s_ += cost_s;
}

VirtualClock clock_advance_audio(VirtualClock clock, double delta_s) {
    clock.advance_audio(delta_s);
    return clock;
}

VirtualClock clock_charge_compute(VirtualClock clock, double cost_s) {
    clock.charge_compute(cost_s);
    return clock;
}

} // namespace simulst
