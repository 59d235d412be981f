#pragma once

#include "simulst/core.hpp"
#include "simulst/datagen.hpp"
#include "simulst/metrics.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

// File formats. Readers report the 1-based line number of bad input through
// InvalidArgument; unreadable files raise IoError.
//
//   emission log   JSONL {"token", "segment_ordinal", "nca_time_s", "ca_time_s"}
//   references     JSONL {"tokens": [...]} or {"text": "..."} plus
//                  "source_start_s" and "source_end_s"

std::string encode_emission(const EmissionRecord &record);
std::string write_emission_log(const std::vector<EmissionRecord> &log);
std::vector<EmissionRecord> parse_emission_log(std::string_view text);
std::vector<EmissionRecord> load_emission_log(const std::filesystem::path &path);

std::string write_references(const std::vector<ReferenceSegment> &refs);
std::vector<ReferenceSegment> parse_references(std::string_view text);
std::vector<ReferenceSegment> load_references(const std::filesystem::path &path);

/// Pretty-printed JSON document with a trailing newline.
std::string metrics_report_json(const MetricsReport &report);
std::string latency_stats_json(const LatencyStats &stats);
std::string gen_stats_json(const GenStats &stats, const std::vector<CorpusIssue> &issues);

/// Writes `content` to `path`, replacing it. Throws IoError.
void write_text_file(const std::filesystem::path &path, std::string_view content);
std::string read_file(const std::filesystem::path &path);

/// Formats a double the way the JSON writer does (shortest round-trip form).
std::string format_number(double value);

} // namespace simulst
