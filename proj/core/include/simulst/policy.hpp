#pragma once

#include "simulst/core.hpp"
#include "simulst/textnorm.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace simulst {

/// How the RALCP agreement bar is derived once empty beams are filtered out.
enum class VoteBasis {
    /// ceil(lambda * requested_size), fixed before filtering.
    preserved_count,
    /// ceil(lambda * surviving beams), recomputed after filtering.
    survivor_ratio,
};

struct RalcpConfig {
    double lambda = 0.5;
    std::size_t beam_size = 10;
    bool filter_empty = true;
    VoteBasis vote_basis = VoteBasis::preserved_count;

    void validate() const;
};

struct WaitKConfig {
    std::size_t k = 3;

    void validate() const;
};

/// Smallest integer v with v >= lambda * n.
std::size_t votes_needed(double lambda, std::size_t n);

/// Relaxed longest-common-prefix agreement between two consecutive ASR
/// hypotheses. Positions below `committed` are skipped; the result is never
/// smaller than `committed`.
std::size_t agreed_prefix_len(std::span<const std::string> prev,
                              std::span<const std::string> curr, std::size_t committed,
                              const MatchConfig &matcher);

/// RALCP beam voting beyond the first `committed` tokens of each beam.
///
/// At each position all surviving beams vote; the plurality token (ties go
/// to the best-scoring beam holding it) is emitted while its vote count
/// reaches the agreement bar. Voting stops after an emitted [SEP].
std::vector<std::string> ralcp_emit(const BeamSet &beams, std::size_t committed,
                                    const RalcpConfig &cfg);

/// Initial per-segment hold: true once k source words of the segment are read.
bool waitk_allows(const WaitKConfig &cfg, std::size_t segment_source_words_read);

} // namespace simulst
