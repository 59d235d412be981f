#pragma once

#include "simulst/asr_stream.hpp"
#include "simulst/mt_stream.hpp"
#include "simulst/textnorm.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

enum class Preset { adapted, baseline };

const char *to_string(Preset preset) noexcept;

struct BackendConfig {
    enum class Kind { mock, process, tcp };
    Kind kind = Kind::mock;
    std::filesystem::path script;     // mock
    std::vector<std::string> command; // process
    std::string host = "127.0.0.1";   // tcp
    std::uint16_t port = 0;
    std::chrono::milliseconds timeout{60000};
};

/// Everything one simulation needs.
///
/// Config file (JSON):
///   {"table3": "adapted" | "baseline",
///    "seed": 7,
///    "asr": {"max_window_s", "min_chunk_s", "initial_wait_s", "beam_size"},
///    "mt": {"lambda", "beam_size", "wait_k", "max_buffer_words",
///           "history_remove_words", "attention_layer_tag", "filter_empty",
///           "vote_basis": "preserved_count" | "survivor_ratio"},
///    "matcher": {"levenshtein_threshold", "strip_punctuation", "lowercase"},
///    "abbreviations_file": "abbrev.txt",
///    "measure_compute": false,
///    "backend": {"kind": "mock", "script": "mock.json"}
///             | {"kind": "process", "command": ["prog", "arg"]}
///             | {"kind": "tcp", "host": "127.0.0.1", "port": 9000},
///    "timeout_s": 60}
///
/// Every key is optional except the backend. Relative paths resolve against
/// the config file's directory. The preset fixes the history removal rule.
struct PipelineConfig {
    Preset preset = Preset::adapted;
    AsrStreamConfig asr;
    MtStreamConfig mt;
    std::optional<std::uint64_t> seed; // overrides the mock script's seed
    std::optional<std::filesystem::path> abbreviations_file;
    bool measure_compute = false;
    BackendConfig backend;

    void validate() const;
};

/// Inference defaults: initial wait 1 s, LCP chunk 1 s, ASR
/// beam 5, wait-k 3, lambda 0.5, MT beam 10, attention layer "6", max buffer
/// 80 words; history removal of one sentence (adapted) or 20 words (baseline).
PipelineConfig table3_preset(Preset preset);

PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::filesystem::path &base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path &path);

struct TraceEvent {
    double t = 0.0;   // arrival time of the chunk's end, informational
    double dur = 0.0; // seconds of new audio

    friend bool operator==(const TraceEvent &, const TraceEvent &) = default;
};

/// JSONL of {"t", "kind": "audio", "dur"}; t must be non-decreasing and dur
/// non-negative. Throws InvalidArgument with the line number.
std::vector<TraceEvent> parse_trace(std::string_view text);
std::vector<TraceEvent> load_trace(const std::filesystem::path &path);

struct RunSummary {
    double audio_s = 0.0;
    double final_now_s = 0.0;
    std::size_t trace_events = 0;
    std::size_t words_committed = 0;
    std::size_t sentence_ends = 0;
    std::size_t asr_backend_calls = 0;
    std::size_t sentence_trims = 0;
    std::size_t forced_trims = 0;
    std::size_t mt_backend_calls = 0;
    std::size_t segments_closed = 0;
    std::size_t forced_closures = 0;
    std::size_t evictions = 0;
    std::size_t dropped_source_words = 0;
    std::size_t emitted_tokens = 0;
};

std::string run_summary_json(const RunSummary &summary);

/// Observer hooks used by tests to check invariants after every step.
struct PipelineObserver {
    virtual ~PipelineObserver() = default;
    virtual void after_step(const AsrStreamController &, const MtStreamController &,
                            const VirtualClock &, const std::vector<TimedWord> & /*fresh*/,
                            const std::vector<EmissionRecord> & /*emitted*/) {}
};

/// ASR controller feeding the MT controller, both charging one virtual clock.
class Pipeline {
public:
    Pipeline(const PipelineConfig &cfg, SentenceSplitter splitter, AsrBackend &asr, MtBackend &mt);

    /// New audio arrived: advance the clock, step ASR, pass fresh words to MT.
    void feed(const TraceEvent &event);
    /// End of audio: flush the ASR window and the MT segment.
    void finish();

    void set_observer(PipelineObserver *observer) { observer_ = observer; }

    const std::vector<EmissionRecord> &log() const { return log_; }
    const VirtualClock &clock() const { return clock_; }
    const AsrStreamController &asr() const { return asr_; }
    const MtStreamController &mt() const { return mt_; }
    RunSummary summary() const;

private:
    void forward(const std::vector<TimedWord> &fresh, bool finishing);

    AsrStreamController asr_;
    MtStreamController mt_;
    AsrBackend &asr_backend_;
    MtBackend &mt_backend_;
    VirtualClock clock_;
    std::vector<EmissionRecord> log_;
    double last_t_ = 0.0;
    std::size_t events_ = 0;
    PipelineObserver *observer_ = nullptr;
};

/// Backends built from a BackendConfig (mock, child process or TCP), with
/// optional host-time measurement of compute cost.
class BackendSet {
public:
    BackendSet(const PipelineConfig &cfg, const SentenceSplitter &splitter);
    ~BackendSet();

    AsrBackend &asr();
    MtBackend &mt();

private:
    std::unique_ptr<AsrBackend> asr_;
    std::unique_ptr<MtBackend> mt_;
    std::unique_ptr<AsrBackend> measured_asr_;
    std::unique_ptr<MtBackend> measured_mt_;
};

SentenceSplitter make_splitter(const PipelineConfig &cfg);

struct SimulationResult {
    std::vector<EmissionRecord> log;
    RunSummary summary;
};

/// Runs a whole trace through freshly built backends.
SimulationResult simulate(const PipelineConfig &cfg, const std::vector<TraceEvent> &trace);

} // namespace simulst
