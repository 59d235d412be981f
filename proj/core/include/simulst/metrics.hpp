#pragma once

#include "simulst/core.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace simulst {

/// A timed reference sentence of the evaluation set.
struct ReferenceSegment {
    std::vector<std::string> tokens;
    double source_start_s = 0.0;
    double source_end_s = 0.0;

    double duration_s() const { return source_end_s - source_start_s; }

    friend bool operator==(const ReferenceSegment &, const ReferenceSegment &) = default;
};

/// Checks start < end for every segment and that segments are ordered and
/// non-overlapping. Throws InvalidArgument naming the segment index.
void validate_references(std::span<const ReferenceSegment> refs);

struct Resegmentation {
    std::vector<std::vector<std::string>> segments; // one slice per reference
    std::vector<std::size_t> boundaries;            // start offset of each slice
    std::size_t cost = 0;                           // summed word edit distance
};

/// Splits `hyp` into |refs| contiguous slices minimizing the summed
/// word-level edit distance against the reference tokens. Among optimal
/// placements the lexicographically earliest boundaries win. An empty `hyp`
/// yields empty slices; a non-empty `hyp` with no references is rejected.
Resegmentation resegment(std::span<const std::string> hyp,
                         std::span<const std::vector<std::string>> refs);
Resegmentation resegment(std::span<const std::string> hyp,
                         std::span<const ReferenceSegment> refs);

/// Whitespace split followed by splitting leading and trailing punctuation
/// runs off into their own tokens ("Hello," -> "Hello" ","). Tokens made
/// entirely of punctuation stay whole.
std::vector<std::string> bleu_tokenize(std::span<const std::string> words);

struct BleuStats {
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;
    std::size_t correct[4] = {0, 0, 0, 0};
    std::size_t total[4] = {0, 0, 0, 0};
};

/// Pooled n-gram statistics (n <= 4) of already tokenized segments.
BleuStats bleu_stats(std::span<const std::vector<std::string>> hyp_segments,
                     std::span<const std::vector<std::string>> ref_segments);

/// Corpus BLEU in [0, 100] from pooled statistics.
///
/// The geometric mean runs over the orders the hypothesis actually has
/// (orders stop at the first n with no hypothesis n-grams). An order with
/// n-grams but no matches gets exponential smoothing: the k-th such order
/// contributes 1 / (2^k * total). No unigram match at all scores 0.
double bleu_score(const BleuStats &stats);

/// Tokenizes both sides with bleu_tokenize and scores them.
/// Throws InvalidArgument when the segment counts differ.
double corpus_bleu(std::span<const std::vector<std::string>> hyp_segments,
                   std::span<const std::vector<std::string>> ref_segments);

enum class LatencyMode { nca, ca };

const char *to_string(LatencyMode mode) noexcept;

struct LatencyStats {
    double mean_s = 0.0;
    double median_s = 0.0;
    double p90_s = 0.0;
    double p95_s = 0.0;
    double p99_s = 0.0;
    double max_s = 0.0;

    friend bool operator==(const LatencyStats &, const LatencyStats &) = default;
};

/// Mean, lower median, nearest-rank percentiles, and maximum.
/// Throws InvalidArgument on an empty list.
LatencyStats latency_stats(std::span<const double> values);

/// Nearest-rank percentile: sorted[ceil(p/100 * n)] (1-indexed), p in [0, 100].
double nearest_rank(std::span<const double> sorted_values, unsigned percent);

struct LatencyReport {
    LatencyStats stats;
    std::vector<std::pair<std::size_t, double>> per_segment; // (index, LAAL)
};

/// Length-adaptive average lagging of one segment. `delays` are emission
/// times relative to the segment's source start. An empty hypothesis lags
/// by the full duration.
double laal(std::span<const double> delays, double duration_s, std::size_t ref_len);

/// Per-segment LAAL over a resegmented log. The log's non-sentinel tokens
/// must equal the concatenation of `hyp_segments`; otherwise
/// InvalidArgument.
LatencyReport stream_laal(std::span<const EmissionRecord> log,
                          std::span<const ReferenceSegment> refs,
                          std::span<const std::vector<std::string>> hyp_segments,
                          LatencyMode mode);

/// Sentinel-free token sequence of a log.
std::vector<std::string> log_tokens(std::span<const EmissionRecord> log);

struct MetricsReport {
    double bleu = 0.0;
    std::size_t num_segments = 0;
    std::size_t empty_segments = 0;
    std::size_t hyp_tokens = 0;
    std::size_t reseg_cost = 0;
    LatencyReport nca;
    LatencyReport ca;
};

/// resegment -> corpus_bleu -> stream_laal (both modes) -> latency_stats.
MetricsReport evaluate(std::span<const EmissionRecord> log, std::span<const ReferenceSegment> refs);

} // namespace simulst
