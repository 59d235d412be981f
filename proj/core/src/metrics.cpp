#include "simulst/metrics.hpp"

#include "simulst/textnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace simulst {

void validate_references(std::span<const ReferenceSegment> refs) {
    for (std::size_t k = 0; k < refs.size(); ++k) {
        const auto &r = refs[k];
        const std::string at = "reference segment " + std::to_string(k);
        if (!std::isfinite(r.source_start_s) || !std::isfinite(r.source_end_s) ||
            !(r.source_start_s < r.source_end_s))
            throw InvalidArgument(at + ": source_start_s must be below source_end_s");
        if (k > 0 && r.source_start_s < refs[k - 1].source_end_s)
            throw InvalidArgument(at + ": overlaps or precedes the previous segment");
    }
}

// ─── Resegmentation ─────────────────────────────────────────────────────────

Resegmentation resegment(std::span<const std::string> hyp,
                         std::span<const std::vector<std::string>> refs) {
    const std::size_t H = hyp.size();
    const std::size_t R = refs.size();
    Resegmentation out;
    if (R == 0) {
        if (H > 0) throw InvalidArgument("cannot resegment a non-empty hypothesis without references");
        return out;
    }

    std::vector<std::string_view> cat;
    std::vector<std::size_t> offset(R + 1, 0);
    for (std::size_t k = 0; k < R; ++k) {
        offset[k] = cat.size();
        for (const auto &t : refs[k]) cat.emplace_back(t);
    }
    offset[R] = cat.size();
    const std::size_t P = cat.size();

    // tail[k][b]: least cost of aligning hyp[b..H) to segments k..R-1. Edit
    // distance against the concatenated tail equals the best split, because
    // an alignment path can be cut wherever it crosses a reference boundary.
    std::vector<std::vector<std::size_t>> tail(R + 1, std::vector<std::size_t>(H + 1));
    {
        std::vector<std::size_t> col(H + 1); // col[i] = dist(hyp[i..H), cat[p..P))
        for (std::size_t i = 0; i <= H; ++i) col[i] = H - i;
        std::size_t k = R;
        auto store = [&](std::size_t p) {
            while (k > 0 && offset[k] == p) {
                tail[k] = col;
                --k;
            }
            if (k == 0 && offset[0] == p) tail[0] = col;
        };
        store(P);
        for (std::size_t p = P; p-- > 0;) {
            std::vector<std::size_t> next(H + 1);
            next[H] = col[H] + 1;
            for (std::size_t i = H; i-- > 0;) {
                next[i] = std::min({col[i] + 1, next[i + 1] + 1, col[i + 1] + (hyp[i] == cat[p] ? 0 : 1)});
            }
            col = std::move(next);
            store(p);
        }
    }
    out.cost = tail[0][0];

    // Fix boundaries left to right, each at the earliest position that still
    // admits an optimal completion.
    std::size_t start = 0;
    std::size_t spent = 0;
    out.boundaries.push_back(0);
    for (std::size_t k = 0; k + 1 < R; ++k) {
        const auto &ref = refs[k];
        std::vector<std::size_t> row(ref.size() + 1);
        std::iota(row.begin(), row.end(), std::size_t{0});
        std::size_t chosen = H;
        for (std::size_t b = start;; ++b) {
            if (spent + row[ref.size()] + tail[k + 1][b] == out.cost) {
                chosen = b;
                spent += row[ref.size()];
                break;
            }
            if (b == H) break;
            std::vector<std::size_t> next(ref.size() + 1);
            next[0] = row[0] + 1;
            for (std::size_t j = 1; j <= ref.size(); ++j)
                next[j] = std::min({row[j] + 1, next[j - 1] + 1, row[j - 1] + (hyp[b] == ref[j - 1] ? 0 : 1)});
            row = std::move(next);
        }
        out.boundaries.push_back(chosen);
        start = chosen;
    }

    for (std::size_t k = 0; k < R; ++k) {
        const std::size_t a = out.boundaries[k];
        const std::size_t b = k + 1 < R ? out.boundaries[k + 1] : H;
        out.segments.emplace_back(hyp.begin() + static_cast<std::ptrdiff_t>(a),
                                  hyp.begin() + static_cast<std::ptrdiff_t>(b));
    }
    return out;
}

Resegmentation resegment(std::span<const std::string> hyp, std::span<const ReferenceSegment> refs) {
    std::vector<std::vector<std::string>> tokens;
    tokens.reserve(refs.size());
    for (const auto &r : refs) tokens.push_back(r.tokens);
    return resegment(hyp, std::span<const std::vector<std::string>>(tokens));
}

// ─── BLEU ───────────────────────────────────────────────────────────────────

std::vector<std::string> bleu_tokenize(std::span<const std::string> words) {
    std::vector<std::string> out;
    for (const auto &word : words) {
        std::size_t pos = 0;
        while (pos < word.size()) {
            const auto begin = word.find_first_not_of(" \t\r\n\f\v", pos);
            if (begin == std::string::npos) break;
            auto end = word.find_first_of(" \t\r\n\f\v", begin);
            if (end == std::string::npos) end = word.size();
            pos = end;

            const std::u32string cps = decode_utf8(std::string_view(word).substr(begin, end - begin));
            std::size_t lead = 0;
            while (lead < cps.size() && is_punctuation(cps[lead])) ++lead;
            if (lead == cps.size()) {
                out.push_back(encode_utf8(cps));
                continue;
            }
            std::size_t trail = cps.size();
            while (trail > lead && is_punctuation(cps[trail - 1])) --trail;
            const std::u32string_view v(cps);
            if (lead > 0) out.push_back(encode_utf8(v.substr(0, lead)));
            out.push_back(encode_utf8(v.substr(lead, trail - lead)));
            if (trail < cps.size()) out.push_back(encode_utf8(v.substr(trail)));
        }
    }
    return out;
}

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string> &tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t j = 0; j < n; ++j) {
            if (j) key += '\x1f';
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

} // namespace

BleuStats bleu_stats(std::span<const std::vector<std::string>> hyp_segments,
                     std::span<const std::vector<std::string>> ref_segments) {
    if (hyp_segments.size() != ref_segments.size())
        throw InvalidArgument("BLEU needs as many hypothesis segments as references (" +
                              std::to_string(hyp_segments.size()) + " vs " +
                              std::to_string(ref_segments.size()) + ")");
    BleuStats s;
    for (std::size_t k = 0; k < hyp_segments.size(); ++k) {
        const auto &hyp = hyp_segments[k];
        const auto &ref = ref_segments[k];
        s.hyp_len += hyp.size();
        s.ref_len += ref.size();
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto h = count_ngrams(hyp, n);
            const auto r = count_ngrams(ref, n);
            for (const auto &[gram, count] : h) {
                s.total[n - 1] += count;
                if (auto it = r.find(gram); it != r.end()) s.correct[n - 1] += std::min(count, it->second);
            }
        }
    }
    return s;
}

double bleu_score(const BleuStats &s) {
    if (s.hyp_len == 0 || s.correct[0] == 0) return 0.0;
    double log_sum = 0.0;
    std::size_t order = 0;
    double smooth = 1.0;
    for (std::size_t n = 0; n < 4; ++n) {
        if (s.total[n] == 0) break;
        double p;
        if (s.correct[n] == 0) {
            smooth *= 2.0;
            p = 1.0 / (smooth * static_cast<double>(s.total[n]));
        } else {
            p = static_cast<double>(s.correct[n]) / static_cast<double>(s.total[n]);
        }
        log_sum += std::log(p);
        ++order;
    }
    const double bp = s.hyp_len < s.ref_len
                          ? std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.hyp_len))
                          : 1.0;
    if (order == 0) return 0.0;
    return 100.0 * bp * std::exp(log_sum / static_cast<double>(order));
}

double corpus_bleu(std::span<const std::vector<std::string>> hyp_segments,
                   std::span<const std::vector<std::string>> ref_segments) {
    if (hyp_segments.size() != ref_segments.size())
        throw InvalidArgument("BLEU needs as many hypothesis segments as references (" +
                              std::to_string(hyp_segments.size()) + " vs " +
                              std::to_string(ref_segments.size()) + ")");
    std::vector<std::vector<std::string>> hyp, ref;
    for (const auto &h : hyp_segments) hyp.push_back(bleu_tokenize(h));
    for (const auto &r : ref_segments) ref.push_back(bleu_tokenize(r));
    return bleu_score(bleu_stats(hyp, ref));
}

// ─── Latency ────────────────────────────────────────────────────────────────

const char *to_string(LatencyMode mode) noexcept { return mode == LatencyMode::nca ? "NCA" : "CA"; }

double nearest_rank(std::span<const double> sorted_values, unsigned percent) {
    if (sorted_values.empty()) throw InvalidArgument("percentile of an empty list");
    if (percent > 100) throw InvalidArgument("percentile must be within [0, 100]");
    const std::size_t n = sorted_values.size();
    std::size_t rank = (percent * n + 99) / 100;
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted_values[rank - 1];
}

LatencyStats latency_stats(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("latency statistics need at least one value");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    LatencyStats s;
    // summing in sorted order keeps the mean independent of input order
    s.mean_s = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    s.median_s = sorted[(sorted.size() - 1) / 2];
    s.p90_s = nearest_rank(sorted, 90);
    s.p95_s = nearest_rank(sorted, 95);
    s.p99_s = nearest_rank(sorted, 99);
    s.max_s = sorted.back();
    return s;
}

double laal(std::span<const double> delays, double duration_s, std::size_t ref_len) {
    if (!(duration_s > 0.0)) throw InvalidArgument("segment duration must be positive");
    if (delays.empty()) return duration_s;
    const double rate = duration_s / static_cast<double>(std::max(delays.size(), ref_len));
    std::size_t tau = delays.size();
    for (std::size_t i = 0; i < delays.size(); ++i) {
        if (delays[i] >= duration_s) {
            tau = i + 1;
            break;
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < tau; ++i) sum += delays[i] - static_cast<double>(i) * rate;
    return sum / static_cast<double>(tau);
}

std::vector<std::string> log_tokens(std::span<const EmissionRecord> log) {
    std::vector<std::string> out;
    for (const auto &r : log) {
        if (r.token != kSep) out.push_back(r.token);
    }
    return out;
}

LatencyReport stream_laal(std::span<const EmissionRecord> log, std::span<const ReferenceSegment> refs,
                          std::span<const std::vector<std::string>> hyp_segments, LatencyMode mode) {
    validate_references(refs);
    if (hyp_segments.size() != refs.size())
        throw InvalidArgument("hypothesis segments and references differ in number");

    LatencyReport report;
    std::size_t rec = 0;
    const auto next_record = [&]() -> const EmissionRecord & {
        while (rec < log.size() && log[rec].token == kSep) ++rec;
        if (rec == log.size()) throw InvalidArgument("log has fewer tokens than the hypothesis segments");
        return log[rec++];
    };

    std::vector<double> values;
    for (std::size_t k = 0; k < refs.size(); ++k) {
        std::vector<double> delays;
        for (const auto &token : hyp_segments[k]) {
            const auto &r = next_record();
            if (r.token != token)
                throw InvalidArgument("log token '" + r.token + "' does not match hypothesis token '" + token +
                                      "' in segment " + std::to_string(k));
            const double t = mode == LatencyMode::nca ? r.nca_time_s : r.ca_time_s;
            delays.push_back(t - refs[k].source_start_s);
        }
        const double value = laal(delays, refs[k].duration_s(), refs[k].tokens.size());
        report.per_segment.emplace_back(k, value);
        values.push_back(value);
    }
    while (rec < log.size() && log[rec].token == kSep) ++rec;
    if (rec != log.size()) throw InvalidArgument("log has more tokens than the hypothesis segments");
    if (!values.empty()) report.stats = latency_stats(values);
    return report;
}

MetricsReport evaluate(std::span<const EmissionRecord> log, std::span<const ReferenceSegment> refs) {
    validate_references(refs);
    if (refs.empty()) throw InvalidArgument("no reference segments");
    const auto hyp = log_tokens(log);
    const auto reseg = resegment(hyp, refs);

    std::vector<std::vector<std::string>> ref_tokens;
    for (const auto &r : refs) ref_tokens.push_back(r.tokens);

    MetricsReport m;
    m.bleu = corpus_bleu(reseg.segments, ref_tokens);
    m.num_segments = refs.size();
    m.empty_segments = static_cast<std::size_t>(
        std::count_if(reseg.segments.begin(), reseg.segments.end(), [](const auto &s) { return s.empty(); }));
    m.hyp_tokens = hyp.size();
    m.reseg_cost = reseg.cost;
    m.nca = stream_laal(log, refs, reseg.segments, LatencyMode::nca);
    m.ca = stream_laal(log, refs, reseg.segments, LatencyMode::ca);
    return m;
}

} // namespace simulst
