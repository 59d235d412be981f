#include "simulst/io.hpp"

#include "json_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace simulst {

namespace {

template <class Fn>
void for_each_line(std::string_view text, Fn &&fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        fn(line_no, line);
    }
}

json parse_object_line(std::size_t line_no, std::string_view line, const char *what) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error &e) {
        throw InvalidArgument(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!doc.is_object())
        throw InvalidArgument(std::string(what) + " line " + std::to_string(line_no) + ": expected a JSON object");
    return doc;
}

[[noreturn]] void bad_field(const char *what, std::size_t line_no, const std::string &field, const std::string &msg) {
    throw InvalidArgument(std::string(what) + " line " + std::to_string(line_no) + ": field '" + field + "' " + msg);
}

double number_field(const json &doc, const char *key, const char *what, std::size_t line_no) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_number()) bad_field(what, line_no, key, "must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) bad_field(what, line_no, key, "must be finite");
    return v;
}

ojson latency_json(const LatencyReport &r) {
    ojson out;
    out["mean_s"] = r.stats.mean_s;
    out["median_s"] = r.stats.median_s;
    out["p90_s"] = r.stats.p90_s;
    out["p95_s"] = r.stats.p95_s;
    out["p99_s"] = r.stats.p99_s;
    out["max_s"] = r.stats.max_s;
    ojson per = ojson::array();
    for (const auto &[idx, value] : r.per_segment) per.push_back(ojson{{"segment", idx}, {"laal_s", value}});
    out["per_segment"] = std::move(per);
    return out;
}

} // namespace

// ─── Emission logs ──────────────────────────────────────────────────────────

std::string encode_emission(const EmissionRecord &r) {
    ojson doc;
    doc["token"] = r.token;
    doc["segment_ordinal"] = r.segment_ordinal;
    doc["nca_time_s"] = r.nca_time_s;
    doc["ca_time_s"] = r.ca_time_s;
    return doc.dump();
}

std::string write_emission_log(const std::vector<EmissionRecord> &log) {
    std::string out;
    for (const auto &r : log) out += encode_emission(r) + "\n";
    return out;
}

std::vector<EmissionRecord> parse_emission_log(std::string_view text) {
    constexpr const char *what = "emission log";
    std::vector<EmissionRecord> out;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto doc = parse_object_line(line_no, line, what);
        EmissionRecord r;
        auto tok = doc.find("token");
        if (tok == doc.end() || !tok->is_string() || tok->get<std::string>().empty())
            bad_field(what, line_no, "token", "must be a non-empty string");
        r.token = tok->get<std::string>();
        auto ord = doc.find("segment_ordinal");
        if (ord == doc.end() || !ord->is_number_unsigned())
            bad_field(what, line_no, "segment_ordinal", "must be a non-negative integer");
        r.segment_ordinal = ord->get<std::size_t>();
        r.nca_time_s = number_field(doc, "nca_time_s", what, line_no);
        r.ca_time_s = number_field(doc, "ca_time_s", what, line_no);
        if (r.ca_time_s < r.nca_time_s) bad_field(what, line_no, "ca_time_s", "must not precede nca_time_s");
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<EmissionRecord> load_emission_log(const std::filesystem::path &path) {
    return parse_emission_log(read_text_file(path));
}

// ─── References ─────────────────────────────────────────────────────────────

std::string write_references(const std::vector<ReferenceSegment> &refs) {
    std::string out;
    for (const auto &r : refs) {
        ojson doc;
        doc["tokens"] = r.tokens;
        doc["source_start_s"] = r.source_start_s;
        doc["source_end_s"] = r.source_end_s;
        out += doc.dump() + "\n";
    }
    return out;
}

std::vector<ReferenceSegment> parse_references(std::string_view text) {
    constexpr const char *what = "references";
    std::vector<ReferenceSegment> out;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto doc = parse_object_line(line_no, line, what);
        ReferenceSegment r;
        if (auto it = doc.find("tokens"); it != doc.end()) {
            if (!it->is_array()) bad_field(what, line_no, "tokens", "must be an array of strings");
            for (const auto &t : *it) {
                if (!t.is_string() || t.get<std::string>().empty())
                    bad_field(what, line_no, "tokens", "must be an array of non-empty strings");
                r.tokens.push_back(t.get<std::string>());
            }
        } else if (auto txt = doc.find("text"); txt != doc.end()) {
            if (!txt->is_string()) bad_field(what, line_no, "text", "must be a string");
            std::istringstream in(txt->get<std::string>());
            std::string w;
            while (in >> w) r.tokens.push_back(w);
        } else {
            bad_field(what, line_no, "tokens", "is missing (or give 'text')");
        }
        r.source_start_s = number_field(doc, "source_start_s", what, line_no);
        r.source_end_s = number_field(doc, "source_end_s", what, line_no);
        if (!(r.source_start_s < r.source_end_s))
            bad_field(what, line_no, "source_end_s", "must exceed source_start_s");
        if (!out.empty() && r.source_start_s < out.back().source_end_s)
            bad_field(what, line_no, "source_start_s", "overlaps the previous segment");
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<ReferenceSegment> load_references(const std::filesystem::path &path) {
    return parse_references(read_text_file(path));
}

// ─── Reports ────────────────────────────────────────────────────────────────

std::string metrics_report_json(const MetricsReport &m) {
    ojson doc;
    doc["bleu"] = m.bleu;
    doc["num_segments"] = m.num_segments;
    doc["empty_segments"] = m.empty_segments;
    doc["hyp_tokens"] = m.hyp_tokens;
    doc["reseg_cost"] = m.reseg_cost;
    doc["nca"] = latency_json(m.nca);
    doc["ca"] = latency_json(m.ca);
    return doc.dump(2) + "\n";
}

std::string latency_stats_json(const LatencyStats &s) {
    ojson doc;
    doc["mean_s"] = s.mean_s;
    doc["median_s"] = s.median_s;
    doc["p90_s"] = s.p90_s;
    doc["p95_s"] = s.p95_s;
    doc["p99_s"] = s.p99_s;
    doc["max_s"] = s.max_s;
    return doc.dump(2) + "\n";
}

std::string gen_stats_json(const GenStats &stats, const std::vector<CorpusIssue> &issues) {
    ojson doc;
    doc["samples"] = stats.samples;
    doc["prefixed"] = stats.prefixed;
    doc["prefix_fraction"] = stats.prefix_fraction();
    ojson hist = ojson::object();
    for (const auto &[c, count] : stats.context_histogram) hist[std::to_string(c)] = count;
    doc["context_histogram"] = std::move(hist);
    doc["clamped"] = stats.clamped;
    doc["context_free"] = stats.context_free;
    ojson bad = ojson::array();
    for (const auto &i : issues) bad.push_back(ojson{{"line", i.line}, {"message", i.message}});
    doc["corpus_issues"] = std::move(bad);
    return doc.dump(2) + "\n";
}

// ─── Files ──────────────────────────────────────────────────────────────────

void write_text_file(const std::filesystem::path &path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path &path) { return read_text_file(path); }

std::string format_number(double value) { return json(value).dump(); }

} // namespace simulst
