#pragma once

// Slow, obviously-correct reference implementations. They share no code with
// the library on purpose.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

/// Recursive edit distance with memoization on (i, j) suffix pairs.
template <class Seq>
std::size_t edit_distance(const Seq &a, const Seq &b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size()) return b.size() - j;
        if (j == b.size()) return a.size() - i;
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        best = std::min(best, go(i + 1, j) + 1);
        best = std::min(best, go(i, j + 1) + 1);
        memo[key] = best;
        return best;
    };
    return go(0, 0);
}

/// Plain exponential recursion, only for very short inputs.
inline std::size_t edit_distance_naive(const std::string &a, const std::string &b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::string ra = a.substr(1), rb = b.substr(1);
    std::size_t best = edit_distance_naive(ra, rb) + (a[0] == b[0] ? 0 : 1);
    best = std::min(best, edit_distance_naive(ra, b) + 1);
    best = std::min(best, edit_distance_naive(a, rb) + 1);
    return best;
}

/// ASCII-only normalization: drop punctuation, lowercase.
inline std::string ascii_normalize(const std::string &w) {
    std::string out;
    for (unsigned char c : w) {
        if (std::ispunct(c)) continue;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

inline bool ascii_words_match(const std::string &a, const std::string &b, std::size_t threshold) {
    return edit_distance(ascii_normalize(a), ascii_normalize(b)) <= threshold;
}

// ─── RALCP ──────────────────────────────────────────────────────────────────

struct Beam {
    std::vector<std::string> tokens;
    double score = 0.0;
};

/// Vote simulator. lambda = num / den exactly; the bar is the least v with
/// v * den >= num * basis, where basis is the requested size (preserved) or
/// the number of voting beams (survivor ratio).
inline std::vector<std::string> ralcp(const std::vector<Beam> &beams, std::size_t requested, std::size_t committed,
                                      std::size_t num, std::size_t den, bool filter_empty, bool survivor_ratio) {
    std::vector<std::size_t> voters;
    for (std::size_t i = 0; i < beams.size(); ++i) {
        if (filter_empty && beams[i].tokens.size() <= committed) continue;
        voters.push_back(i);
    }
    if (voters.empty()) return {};
    const std::size_t basis = survivor_ratio ? voters.size() : requested;
    std::size_t bar = 0;
    while (bar * den < num * basis) ++bar;
    if (bar == 0) return {};

    std::vector<std::string> out;
    for (std::size_t p = committed;; ++p) {
        // candidate tokens in order of first appearance among voters
        std::vector<std::string> candidates;
        for (auto i : voters) {
            if (beams[i].tokens.size() > p &&
                std::find(candidates.begin(), candidates.end(), beams[i].tokens[p]) == candidates.end())
                candidates.push_back(beams[i].tokens[p]);
        }
        if (candidates.empty()) break;
        std::string best;
        std::size_t best_votes = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        std::size_t best_index = std::numeric_limits<std::size_t>::max();
        for (const auto &c : candidates) {
            std::size_t votes = 0;
            double score = -std::numeric_limits<double>::infinity();
            std::size_t index = std::numeric_limits<std::size_t>::max();
            for (auto i : voters) {
                if (beams[i].tokens.size() > p && beams[i].tokens[p] == c) {
                    ++votes;
                    if (beams[i].score > score || (beams[i].score == score && i < index)) {
                        score = beams[i].score;
                        index = i;
                    }
                }
            }
            const bool wins = votes > best_votes ||
                              (votes == best_votes && (score > best_score || (score == best_score && index < best_index)));
            if (wins) {
                best = c;
                best_votes = votes;
                best_score = score;
                best_index = index;
            }
        }
        if (best_votes < bar) break;
        out.push_back(best);
        if (best == "[SEP]") break;
    }
    return out;
}

// ─── Resegmentation ─────────────────────────────────────────────────────────

struct Split {
    std::size_t cost = 0;
    std::vector<std::size_t> starts; // start of each slice
};

/// Enumerates every placement of |refs| - 1 ordered boundaries and keeps the
/// cheapest, preferring the lexicographically smallest boundary vector.
inline Split resegment(const std::vector<std::string> &hyp, const std::vector<std::vector<std::string>> &refs) {
    const std::size_t R = refs.size();
    Split best;
    best.cost = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> starts(R, 0);
    std::function<void(std::size_t)> place = [&](std::size_t k) {
        if (k == R) {
            std::size_t cost = 0;
            for (std::size_t s = 0; s < R; ++s) {
                const std::size_t a = starts[s];
                const std::size_t b = s + 1 < R ? starts[s + 1] : hyp.size();
                std::vector<std::string> slice(hyp.begin() + static_cast<long>(a), hyp.begin() + static_cast<long>(b));
                cost += edit_distance(slice, refs[s]);
            }
            if (cost < best.cost) best = Split{cost, starts};
            return;
        }
        const std::size_t from = k == 0 ? 0 : starts[k - 1];
        const std::size_t to = k == 0 ? 0 : hyp.size();
        for (std::size_t b = from; b <= to; ++b) {
            starts[k] = b;
            place(k + 1);
        }
    };
    place(0);
    return best;
}

// ─── Latency ────────────────────────────────────────────────────────────────

/// LAAL straight from its definition, with 1-based indices.
inline double laal(const std::vector<double> &emit_times, double start, double end, std::size_t ref_len) {
    const double T = end - start;
    const std::size_t n = emit_times.size();
    if (n == 0) return T;
    std::size_t tau = n;
    for (std::size_t i = 1; i <= n; ++i) {
        if (emit_times[i - 1] - start >= T) {
            tau = i;
            break;
        }
    }
    const double denom = static_cast<double>(std::max(n, ref_len));
    double total = 0.0;
    for (std::size_t i = 1; i <= tau; ++i)
        total += (emit_times[i - 1] - start) - static_cast<double>(i - 1) * T / denom;
    return total / static_cast<double>(tau);
}

struct Stats {
    double mean, median, p90, p95, p99, max;
};

inline Stats stats(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    auto rank = [&](std::size_t p) {
        std::size_t r = 1;
        while (r * 100 < p * n) ++r;
        return v[r - 1];
    };
    double sum = 0.0;
    for (double x : v) sum += x;
    return Stats{sum / static_cast<double>(n), v[(n + 1) / 2 - 1], rank(90), rank(95), rank(99), v.back()};
}

} // namespace oracle
