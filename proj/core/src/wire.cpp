#include "simulst/wire.hpp"

#include "json_util.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace simulst {

namespace {

std::string join_words(const std::vector<std::string> &words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) out.push_back(std::move(w));
    return out;
}

ojson header(const char *type) { return ojson{{"v", kWireVersion}, {"type", std::string(type)}}; }

// Parses one line, remembering the last object key seen so a truncated or
// malformed payload can still be attributed to a field.
json parse_line(std::string_view line) {
    std::string last_key;
    const json::parser_callback_t track = [&last_key](int, json::parse_event_t event, json &parsed) {
        if (event == json::parse_event_t::key) last_key = parsed.get<std::string>();
        return true;
    };
    try {
        json doc = json::parse(line.begin(), line.end(), track);
        if (!doc.is_object()) throw ProtocolError("message is not a JSON object", "", std::string(line));
        return doc;
    } catch (const json::parse_error &e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what(),
                            last_key.empty() ? "<root>" : last_key, std::string(line));
    }
}

class Reader {
public:
    Reader(const json &doc, std::string_view line) : doc_(doc), line_(line) {}

    [[noreturn]] void fail(const std::string &message, const std::string &field) const {
        throw ProtocolError(message, field, std::string(line_));
    }

    const json &at(const json &obj, const char *key, const std::string &path) const {
        const std::string field = path.empty() ? key : path + "." + key;
        if (!obj.is_object()) fail("expected an object", path.empty() ? "<root>" : path);
        auto it = obj.find(key);
        if (it == obj.end()) fail("missing field", field);
        return *it;
    }

    double number(const json &obj, const char *key, const std::string &path = {}) const {
        const auto &v = at(obj, key, path);
        if (!v.is_number()) fail("expected a number", path.empty() ? key : path + "." + key);
        return v.get<double>();
    }

    std::size_t count(const json &obj, const char *key, const std::string &path = {}) const {
        const auto &v = at(obj, key, path);
        if (!v.is_number_unsigned())
            fail("expected a non-negative integer", path.empty() ? key : path + "." + key);
        return v.get<std::size_t>();
    }

    std::string string(const json &obj, const char *key, const std::string &path = {}) const {
        const auto &v = at(obj, key, path);
        if (!v.is_string()) fail("expected a string", path.empty() ? key : path + "." + key);
        return v.get<std::string>();
    }

    const json &array(const json &obj, const char *key, const std::string &path = {}) const {
        const auto &v = at(obj, key, path);
        if (!v.is_array()) fail("expected an array", path.empty() ? key : path + "." + key);
        return v;
    }

    std::vector<std::string> strings(const json &obj, const char *key, const std::string &path = {}) const {
        const auto &arr = array(obj, key, path);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_string())
                fail("expected a string", (path.empty() ? key : path + "." + key) + "[" + std::to_string(i) + "]");
            out.push_back(arr[i].get<std::string>());
        }
        return out;
    }

    void expect_header(const char *type) const {
        const auto &v = at(doc_, "v", {});
        if (!v.is_number_integer() || v.get<int>() != kWireVersion) fail("unsupported schema version", "v");
        const auto t = string(doc_, "type");
        if (t == "error") throw BackendError("server error: " + doc_.value("message", std::string("unknown")));
        if (t != type) fail("expected message type '" + std::string(type) + "' but got '" + t + "'", "type");
    }

    const json &doc() const { return doc_; }

private:
    const json &doc_;
    std::string_view line_;
};

std::vector<std::vector<std::string>> sentences_from(const Reader &r, const char *key) {
    std::vector<std::vector<std::string>> out;
    for (const auto &s : r.strings(r.doc(), key)) out.push_back(split_words(s));
    return out;
}

ojson sentences_to(const std::vector<std::vector<std::string>> &sentences) {
    ojson arr = ojson::array();
    for (const auto &s : sentences) arr.push_back(join_words(s));
    return arr;
}

} // namespace

std::string join_with_sentinel(const std::vector<std::vector<std::string>> &sentences) {
    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i) out += std::string(" ") + std::string(kSep) + " ";
        out += join_words(sentences[i]);
    }
    return out;
}

std::string wire_message_type(std::string_view line) {
    const auto doc = parse_line(line);
    auto it = doc.find("type");
    if (it == doc.end() || !it->is_string()) throw ProtocolError("missing message type", "type", std::string(line));
    return it->get<std::string>();
}

// ─── Encoders ───────────────────────────────────────────────────────────────

std::string encode_asr_request(const AsrRequest &r) {
    ojson doc = header("asr_request");
    doc["stream"] = r.stream_id;
    doc["window_start_s"] = r.window_start_s;
    doc["window_end_s"] = r.window_end_s;
    doc["beam_size"] = r.beam_size;
    return doc.dump();
}

std::string encode_asr_response(const AsrResponse &r) {
    ojson doc = header("asr_response");
    doc["window_offset_s"] = r.hypothesis.window_offset_s;
    ojson words = ojson::array();
    for (const auto &w : r.hypothesis.words)
        words.push_back(ojson{{"text", w.text}, {"start_s", w.start_s}, {"end_s", w.end_s}});
    doc["words"] = std::move(words);
    doc["compute_cost_s"] = r.compute_cost_s;
    return doc.dump();
}

std::string encode_mt_request(const MtRequest &r) {
    ojson doc = header("mt_request");
    doc["stream"] = r.stream_id;
    doc["history_source"] = sentences_to(r.history_source);
    doc["history_target"] = sentences_to(r.history_target);
    doc["context_source"] = join_with_sentinel(r.history_source);
    doc["context_target"] = join_with_sentinel(r.history_target);
    doc["active_source"] = r.active_source;
    doc["committed_target"] = r.committed_target;
    doc["beam_size"] = r.beam_size;
    doc["attention_layer_tag"] = r.attention_layer_tag;
    return doc.dump();
}

std::string encode_mt_response(const MtResponse &r) {
    ojson doc = header("mt_response");
    doc["requested_size"] = r.beams.requested_size;
    ojson beams = ojson::array();
    for (const auto &b : r.beams.beams)
        beams.push_back(ojson{{"tokens", b.tokens}, {"score", b.score}, {"attention", b.attention}});
    doc["beams"] = std::move(beams);
    doc["compute_cost_s"] = r.compute_cost_s;
    return doc.dump();
}

std::string encode_error(std::string_view message) {
    ojson doc = header("error");
    doc["message"] = std::string(message);
    return doc.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

// ─── Decoders ───────────────────────────────────────────────────────────────

AsrRequest decode_asr_request(std::string_view line) {
    const auto doc = parse_line(line);
    Reader r(doc, line);
    r.expect_header("asr_request");
    AsrRequest out;
    out.stream_id = r.string(doc, "stream");
    out.window_start_s = r.number(doc, "window_start_s");
    out.window_end_s = r.number(doc, "window_end_s");
    out.beam_size = r.count(doc, "beam_size");
    return out;
}

AsrResponse decode_asr_response(std::string_view line) {
    const auto doc = parse_line(line);
    Reader r(doc, line);
    r.expect_header("asr_response");
    AsrResponse out;
    out.hypothesis.window_offset_s = r.number(doc, "window_offset_s");
    const auto &words = r.array(doc, "words");
    for (std::size_t i = 0; i < words.size(); ++i) {
        const std::string at = "words[" + std::to_string(i) + "]";
        out.hypothesis.words.push_back(
            {r.string(words[i], "text", at), r.number(words[i], "start_s", at), r.number(words[i], "end_s", at)});
    }
    out.compute_cost_s = r.number(doc, "compute_cost_s");
    return out;
}

MtRequest decode_mt_request(std::string_view line) {
    const auto doc = parse_line(line);
    Reader r(doc, line);
    r.expect_header("mt_request");
    MtRequest out;
    out.stream_id = r.string(doc, "stream");
    out.history_source = sentences_from(r, "history_source");
    out.history_target = sentences_from(r, "history_target");
    if (out.history_source.size() != out.history_target.size())
        r.fail("history arrays must be parallel", "history_target");
    out.active_source = r.strings(doc, "active_source");
    out.committed_target = r.strings(doc, "committed_target");
    out.beam_size = r.count(doc, "beam_size");
    out.attention_layer_tag = r.string(doc, "attention_layer_tag");
    return out;
}

MtResponse decode_mt_response(std::string_view line) {
    const auto doc = parse_line(line);
    Reader r(doc, line);
    r.expect_header("mt_response");
    MtResponse out;
    out.beams.requested_size = r.count(doc, "requested_size");
    const auto &beams = r.array(doc, "beams");
    for (std::size_t b = 0; b < beams.size(); ++b) {
        const std::string at = "beams[" + std::to_string(b) + "]";
        BeamHypothesis beam;
        beam.tokens = r.strings(beams[b], "tokens", at);
        beam.score = r.number(beams[b], "score", at);
        const auto &rows = r.array(beams[b], "attention", at);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const std::string row_at = at + ".attention[" + std::to_string(j) + "]";
            if (!rows[j].is_array()) r.fail("expected an array", row_at);
            std::vector<double> row;
            for (const auto &x : rows[j]) {
                if (!x.is_number()) r.fail("expected a number", row_at);
                row.push_back(x.get<double>());
            }
            beam.attention.push_back(std::move(row));
        }
        out.beams.beams.push_back(std::move(beam));
    }
    out.compute_cost_s = r.number(doc, "compute_cost_s");
    return out;
}

// ─── Client ─────────────────────────────────────────────────────────────────

WireClient::WireClient(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {}

std::string WireClient::exchange(const std::string &line) {
    transport_->write_line(line);
    return transport_->read_line(timeout_);
}

AsrResponse WireClient::roundtrip(const AsrRequest &request) {
    return decode_asr_response(exchange(encode_asr_request(request)));
}

MtResponse WireClient::roundtrip(const MtRequest &request) {
    return decode_mt_response(exchange(encode_mt_request(request)));
}

// ─── Server ─────────────────────────────────────────────────────────────────

std::string handle_request_line(std::string_view line, AsrBackend &asr, MtBackend &mt) {
    try {
        const auto type = wire_message_type(line);
        if (type == "asr_request") return encode_asr_response(asr.decode(decode_asr_request(line)));
        if (type == "mt_request") return encode_mt_response(mt.translate(decode_mt_request(line)));
        return encode_error("unknown request type '" + type + "'");
    } catch (const std::exception &e) {
        return encode_error(e.what());
    }
}

void serve_stream(std::istream &in, std::ostream &out, AsrBackend &asr, MtBackend &mt) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out << handle_request_line(line, asr, mt) << '\n' << std::flush;
    }
}

} // namespace simulst
