#include "simulst/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace simulst {

void RalcpConfig::validate() const {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("RALCP lambda must lie in (0, 1]");
    if (beam_size == 0) throw InvalidArgument("MT beam size must be at least 1");
}

void WaitKConfig::validate() const {
    if (k < 1) throw InvalidArgument("wait-k requires k >= 1");
}

std::size_t votes_needed(double lambda, std::size_t n) {
    // lambda * n is tolerant to representation error, e.g. 0.3 * 10
    const double raw = lambda * static_cast<double>(n);
    const double v = std::ceil(raw - 1e-9 * std::max(1.0, raw));
    return v <= 0.0 ? 0 : static_cast<std::size_t>(v);
}

std::size_t agreed_prefix_len(std::span<const std::string> prev,
                              std::span<const std::string> curr, std::size_t committed,
                              const MatchConfig &matcher) {
    const std::size_t limit = std::min(prev.size(), curr.size());
    std::size_t n = committed;
    while (n < limit && words_match(prev[n], curr[n], matcher)) ++n;
    return n;
}

std::vector<std::string> ralcp_emit(const BeamSet &beams, std::size_t committed,
                                    const RalcpConfig &cfg) {
    std::vector<const BeamHypothesis *> voters;
    for (const auto &beam : beams.beams) {
        if (cfg.filter_empty && beam.tokens.size() <= committed) continue;
        voters.push_back(&beam);
    }
    if (voters.empty()) return {};

    const std::size_t bar = cfg.vote_basis == VoteBasis::preserved_count
                                ? votes_needed(cfg.lambda, beams.requested_size)
                                : votes_needed(cfg.lambda, voters.size());
    if (bar == 0) return {};

    struct Tally {
        std::size_t votes = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        std::size_t best_rank = 0;
    };

    std::vector<std::string> emitted;
    for (std::size_t p = committed;; ++p) {
        std::map<std::string_view, Tally> tallies;
        for (std::size_t rank = 0; rank < voters.size(); ++rank) {
            const auto *beam = voters[rank];
            if (beam->tokens.size() <= p) continue;
            auto &t = tallies[beam->tokens[p]];
            if (t.votes == 0 || beam->score > t.best_score) {
                t.best_score = beam->score;
                t.best_rank = rank;
            }
            ++t.votes;
        }
        if (tallies.empty()) break;

        auto winner = tallies.begin();
        for (auto it = tallies.begin(); it != tallies.end(); ++it) {
            const auto &w = winner->second;
            const auto &c = it->second;
            const bool better =
                c.votes > w.votes ||
                (c.votes == w.votes &&
                 (c.best_score > w.best_score ||
                  (c.best_score == w.best_score && c.best_rank < w.best_rank)));
            if (better) winner = it;
        }
        if (winner->second.votes < bar) break;
        // every surviving beam votes at every position, whatever it said before
        const std::string token(winner->first);
        emitted.push_back(token);
        if (token == kSep) break;
    }
    return emitted;
}

bool waitk_allows(const WaitKConfig &cfg, std::size_t segment_source_words_read) {
    return segment_source_words_read >= cfg.k;
}

} // namespace simulst
