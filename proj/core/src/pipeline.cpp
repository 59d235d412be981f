#include "simulst/pipeline.hpp"

#include "simulst/mock.hpp"
#include "simulst/wire.hpp"

#include "json_util.hpp"

#include <cmath>
#include <set>

namespace simulst {

const char *to_string(Preset preset) noexcept { return preset == Preset::adapted ? "adapted" : "baseline"; }

PipelineConfig table3_preset(Preset preset) {
    PipelineConfig cfg;
    cfg.preset = preset;
    cfg.asr.initial_wait_s = 1.0;
    cfg.asr.min_chunk_s = 1.0;
    cfg.asr.max_window_s = 30.0;
    cfg.asr.backend_beam = 5;
    cfg.mt.waitk.k = 3;
    cfg.mt.ralcp.lambda = 0.5;
    cfg.mt.ralcp.beam_size = 10;
    cfg.mt.attention_layer_tag = "6";
    cfg.mt.max_buffer_words = 80;
    if (preset == Preset::adapted) {
        cfg.mt.history_remove = HistoryRemoval::oldest_sentence_pair;
    } else {
        cfg.mt.history_remove = HistoryRemoval::word_count;
        cfg.mt.history_remove_words = 20;
    }
    return cfg;
}

void PipelineConfig::validate() const {
    asr.validate();
    mt.validate();
    const bool by_sentence = mt.history_remove == HistoryRemoval::oldest_sentence_pair;
    if ((preset == Preset::adapted) != by_sentence)
        throw InvalidArgument(std::string("preset '") + to_string(preset) + "' fixes the history removal rule");
    if (backend.kind == BackendConfig::Kind::process && backend.command.empty())
        throw InvalidArgument("process backend needs a command");
    if (backend.kind == BackendConfig::Kind::tcp && backend.port == 0)
        throw InvalidArgument("tcp backend needs a port");
    if (backend.timeout.count() <= 0) throw InvalidArgument("backend timeout must be positive");
}

// ─── Config parsing ─────────────────────────────────────────────────────────

namespace {

class ConfigReader {
public:
    explicit ConfigReader(const json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
    }

    ~ConfigReader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto &[key, value] : obj_.items()) {
            if (!seen_.count(key)) fail(name(key), "is not a known setting");
        }
    }

    [[noreturn]] static void fail(const std::string &field, const std::string &message) {
        throw InvalidArgument("config: '" + field + "' " + message);
    }

    std::string name(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    const json *find(const std::string &key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string &key, double &out) {
        if (const auto *v = find(key)) {
            if (!v->is_number() || !std::isfinite(v->get<double>())) fail(name(key), "must be a finite number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void count(const std::string &key, Int &out) {
        if (const auto *v = find(key)) {
            if (!v->is_number_unsigned()) fail(name(key), "must be a non-negative integer");
            out = v->get<Int>();
        }
    }

    void boolean(const std::string &key, bool &out) {
        if (const auto *v = find(key)) {
            if (!v->is_boolean()) fail(name(key), "must be true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string &key, std::string &out) {
        if (const auto *v = find(key)) {
            if (!v->is_string()) fail(name(key), "must be a string");
            out = v->get<std::string>();
        }
    }

private:
    const json &obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

} // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path &base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }

    PipelineConfig cfg;
    {
        ConfigReader root(doc, "");
        std::string preset = "adapted";
        root.string("table3", preset);
        if (preset == "adapted") {
            cfg = table3_preset(Preset::adapted);
        } else if (preset == "baseline") {
            cfg = table3_preset(Preset::baseline);
        } else {
            ConfigReader::fail("table3", "must be \"adapted\" or \"baseline\"");
        }

        if (const auto *v = root.find("seed")) {
            if (!v->is_number_unsigned()) ConfigReader::fail("seed", "must be a non-negative integer");
            cfg.seed = v->get<std::uint64_t>();
        }
        if (const auto *v = root.find("asr")) {
            ConfigReader r(*v, "asr");
            r.number("max_window_s", cfg.asr.max_window_s);
            r.number("min_chunk_s", cfg.asr.min_chunk_s);
            r.number("initial_wait_s", cfg.asr.initial_wait_s);
            r.count("beam_size", cfg.asr.backend_beam);
        }
        if (const auto *v = root.find("mt")) {
            ConfigReader r(*v, "mt");
            r.number("lambda", cfg.mt.ralcp.lambda);
            r.count("beam_size", cfg.mt.ralcp.beam_size);
            r.count("wait_k", cfg.mt.waitk.k);
            r.count("max_buffer_words", cfg.mt.max_buffer_words);
            if (r.find("history_remove_words") && cfg.preset == Preset::adapted)
                ConfigReader::fail("mt.history_remove_words", "only applies to the baseline preset");
            r.count("history_remove_words", cfg.mt.history_remove_words);
            r.string("attention_layer_tag", cfg.mt.attention_layer_tag);
            r.boolean("filter_empty", cfg.mt.ralcp.filter_empty);
            std::string basis;
            r.string("vote_basis", basis);
            if (basis == "survivor_ratio") {
                cfg.mt.ralcp.vote_basis = VoteBasis::survivor_ratio;
            } else if (!basis.empty() && basis != "preserved_count") {
                ConfigReader::fail("mt.vote_basis", "must be \"preserved_count\" or \"survivor_ratio\"");
            }
        }
        if (const auto *v = root.find("matcher")) {
            ConfigReader r(*v, "matcher");
            r.count("levenshtein_threshold", cfg.asr.matcher.levenshtein_threshold);
            r.boolean("strip_punctuation", cfg.asr.matcher.strip_punctuation);
            r.boolean("lowercase", cfg.asr.matcher.lowercase);
        }
        std::string abbreviations;
        root.string("abbreviations_file", abbreviations);
        if (!abbreviations.empty()) cfg.abbreviations_file = resolve(base_dir, abbreviations);
        root.boolean("measure_compute", cfg.measure_compute);

        double timeout_s = 60.0;
        root.number("timeout_s", timeout_s);
        if (!(timeout_s > 0.0)) ConfigReader::fail("timeout_s", "must be positive");
        cfg.backend.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(timeout_s * 1000.0)));

        const auto *b = root.find("backend");
        if (!b) ConfigReader::fail("backend", "is required");
        ConfigReader r(*b, "backend");
        std::string kind;
        r.string("kind", kind);
        if (kind == "mock") {
            cfg.backend.kind = BackendConfig::Kind::mock;
            std::string script;
            r.string("script", script);
            if (script.empty()) ConfigReader::fail("backend.script", "is required for the mock backend");
            cfg.backend.script = resolve(base_dir, script);
        } else if (kind == "process") {
            cfg.backend.kind = BackendConfig::Kind::process;
            const auto *cmd = r.find("command");
            if (!cmd || !cmd->is_array() || cmd->empty())
                ConfigReader::fail("backend.command", "must be a non-empty array of strings");
            for (const auto &part : *cmd) {
                if (!part.is_string()) ConfigReader::fail("backend.command", "must be a non-empty array of strings");
                cfg.backend.command.push_back(part.get<std::string>());
            }
        } else if (kind == "tcp") {
            cfg.backend.kind = BackendConfig::Kind::tcp;
            r.string("host", cfg.backend.host);
            std::uint64_t port = 0;
            r.count("port", port);
            if (port == 0 || port > 65535) ConfigReader::fail("backend.port", "must be within 1..65535");
            cfg.backend.port = static_cast<std::uint16_t>(port);
        } else {
            ConfigReader::fail("backend.kind", "must be \"mock\", \"process\" or \"tcp\"");
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path &path) {
    return parse_pipeline_config(read_text_file(path), path.parent_path());
}

// ─── Traces ─────────────────────────────────────────────────────────────────

std::vector<TraceEvent> parse_trace(std::string_view text) {
    std::vector<TraceEvent> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string where = "trace line " + std::to_string(line_no) + ": ";
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error &e) {
            throw InvalidArgument(where + e.what());
        }
        if (!doc.is_object()) throw InvalidArgument(where + "expected a JSON object");
        const auto kind = doc.find("kind");
        if (kind == doc.end() || *kind != "audio") throw InvalidArgument(where + "'kind' must be \"audio\"");
        TraceEvent ev;
        for (auto [key, dst] : {std::pair{"t", &ev.t}, std::pair{"dur", &ev.dur}}) {
            auto it = doc.find(key);
            if (it == doc.end() || !it->is_number() || !std::isfinite(it->get<double>()))
                throw InvalidArgument(where + "'" + key + "' must be a finite number");
            *dst = it->get<double>();
        }
        if (ev.dur < 0.0) throw InvalidArgument(where + "'dur' must be non-negative");
        if (!out.empty() && ev.t < out.back().t) throw InvalidArgument(where + "'t' went backwards");
        out.push_back(ev);
    }
    return out;
}

std::vector<TraceEvent> load_trace(const std::filesystem::path &path) { return parse_trace(read_text_file(path)); }

std::string run_summary_json(const RunSummary &s) {
    ojson doc;
    doc["audio_s"] = s.audio_s;
    doc["final_now_s"] = s.final_now_s;
    doc["trace_events"] = s.trace_events;
    doc["words_committed"] = s.words_committed;
    doc["sentence_ends"] = s.sentence_ends;
    doc["asr_backend_calls"] = s.asr_backend_calls;
    doc["sentence_trims"] = s.sentence_trims;
    doc["forced_trims"] = s.forced_trims;
    doc["mt_backend_calls"] = s.mt_backend_calls;
    doc["segments_closed"] = s.segments_closed;
    doc["forced_closures"] = s.forced_closures;
    doc["evictions"] = s.evictions;
    doc["dropped_source_words"] = s.dropped_source_words;
    doc["emitted_tokens"] = s.emitted_tokens;
    return doc.dump(2) + "\n";
}

// ─── Pipeline ───────────────────────────────────────────────────────────────

Pipeline::Pipeline(const PipelineConfig &cfg, SentenceSplitter splitter, AsrBackend &asr, MtBackend &mt)
    : asr_(cfg.asr, std::move(splitter)), mt_(cfg.mt), asr_backend_(asr), mt_backend_(mt) {}

void Pipeline::forward(const std::vector<TimedWord> &fresh, bool finishing) {
    std::vector<std::string> words;
    words.reserve(fresh.size());
    for (const auto &w : fresh) words.push_back(w.text);
    auto emitted = mt_.step(words, clock_, mt_backend_);
    if (finishing) {
        auto tail = mt_.finish(clock_, mt_backend_);
        emitted.insert(emitted.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
    }
    log_.insert(log_.end(), emitted.begin(), emitted.end());
    if (observer_) observer_->after_step(asr_, mt_, clock_, fresh, emitted);
}

void Pipeline::feed(const TraceEvent &event) {
    if (!std::isfinite(event.t) || !std::isfinite(event.dur) || event.dur < 0.0)
        throw InvalidArgument("trace event needs finite t and non-negative dur");
    if (events_ > 0 && event.t < last_t_) throw InvalidArgument("trace time went backwards");
    last_t_ = event.t;
    ++events_;
    clock_.advance_audio(event.dur);
    forward(asr_.step(clock_, asr_backend_), false);
}

void Pipeline::finish() { forward(asr_.finish(clock_, asr_backend_), true); }

RunSummary Pipeline::summary() const {
    RunSummary s;
    s.audio_s = clock_.audio_available_s();
    s.final_now_s = clock_.now_s();
    s.trace_events = events_;
    s.words_committed = asr_.state().committed.size();
    s.sentence_ends = asr_.state().committed_sentence_ends.size();
    s.asr_backend_calls = asr_.counters().backend_calls;
    s.sentence_trims = asr_.counters().sentence_trims;
    s.forced_trims = asr_.counters().forced_trims;
    s.mt_backend_calls = mt_.counters().backend_calls;
    s.segments_closed = mt_.counters().segments_closed;
    s.forced_closures = mt_.counters().forced_closures;
    s.evictions = mt_.counters().evictions;
    s.dropped_source_words = mt_.counters().dropped_source_words;
    s.emitted_tokens = log_.size();
    return s;
}

// ─── Backends ───────────────────────────────────────────────────────────────

SentenceSplitter make_splitter(const PipelineConfig &cfg) {
    return cfg.abbreviations_file ? SentenceSplitter::from_file(*cfg.abbreviations_file) : SentenceSplitter{};
}

BackendSet::BackendSet(const PipelineConfig &cfg, const SentenceSplitter &splitter) {
    switch (cfg.backend.kind) {
    case BackendConfig::Kind::mock: {
        auto script = load_mock_script(cfg.backend.script);
        if (cfg.seed) script.seed = *cfg.seed;
        asr_ = std::make_unique<MockAsrBackend>(script);
        mt_ = std::make_unique<MockMtBackend>(std::move(script), splitter);
        break;
    }
    case BackendConfig::Kind::process:
    case BackendConfig::Kind::tcp: {
        std::unique_ptr<Transport> transport;
        if (cfg.backend.kind == BackendConfig::Kind::process) {
            transport = std::make_unique<ProcessTransport>(cfg.backend.command);
        } else {
            transport = std::make_unique<TcpTransport>(cfg.backend.host, cfg.backend.port);
        }
        auto client = std::make_shared<WireClient>(std::move(transport), cfg.backend.timeout);
        asr_ = std::make_unique<WireAsrBackend>(client);
        mt_ = std::make_unique<WireMtBackend>(client);
        break;
    }
    }
    if (cfg.measure_compute) {
        measured_asr_ = std::make_unique<MeasuredAsrBackend>(*asr_);
        measured_mt_ = std::make_unique<MeasuredMtBackend>(*mt_);
    }
}

BackendSet::~BackendSet() = default;

AsrBackend &BackendSet::asr() { return measured_asr_ ? *measured_asr_ : *asr_; }
MtBackend &BackendSet::mt() { return measured_mt_ ? *measured_mt_ : *mt_; }

SimulationResult simulate(const PipelineConfig &cfg, const std::vector<TraceEvent> &trace) {
    cfg.validate();
    const auto splitter = make_splitter(cfg);
    BackendSet backends(cfg, splitter);
    Pipeline pipeline(cfg, splitter, backends.asr(), backends.mt());
    for (const auto &event : trace) pipeline.feed(event);
    pipeline.finish();
    return {pipeline.log(), pipeline.summary()};
}

} // namespace simulst
