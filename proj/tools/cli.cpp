#include "cli.hpp"

#include "simulst/datagen.hpp"
#include "simulst/io.hpp"
#include "simulst/metrics.hpp"
#include "simulst/mock.hpp"
#include "simulst/pipeline.hpp"
#include "simulst/wire.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace simulst::cli {

namespace {

using ojson = nlohmann::ordered_json;

// ─── simulate ───────────────────────────────────────────────────────────────

struct SimulateArgs {
    std::string trace;
    std::string config;
    std::string out;
    std::string summary;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs &a, std::ostream &out) {
    auto cfg = load_pipeline_config(a.config);
    if (a.seed) cfg.seed = a.seed;
    const auto trace = load_trace(a.trace);
    const auto result = simulate(cfg, trace);
    write_text_file(a.out, write_emission_log(result.log));
    const std::string summary_path = a.summary.empty() ? a.out + ".summary.json" : a.summary;
    const auto summary = run_summary_json(result.summary);
    write_text_file(summary_path, summary);
    out << summary;
    return kExitOk;
}

// ─── eval ───────────────────────────────────────────────────────────────────

struct EvalArgs {
    std::string log;
    std::string refs;
    std::string mode = "both";
    std::string out;
};

int cmd_eval(const EvalArgs &a, std::ostream &out) {
    const auto log = load_emission_log(a.log);
    const auto refs = load_references(a.refs);
    auto report = evaluate(log, refs);
    auto doc = ojson::parse(metrics_report_json(report));
    if (a.mode == "nca") doc.erase("ca");
    if (a.mode == "ca") doc.erase("nca");
    const auto text = doc.dump(2) + "\n";
    if (!a.out.empty()) write_text_file(a.out, text);
    out << text;
    return kExitOk;
}

// ─── datagen ────────────────────────────────────────────────────────────────

struct DatagenArgs {
    std::string corpus;
    std::string out;
    std::uint64_t samples = 1000;
    GenConfig gen;
};

int cmd_datagen(const DatagenArgs &a, std::ostream &out, std::ostream &err) {
    a.gen.validate();
    const auto corpus = load_corpus(a.corpus);
    for (const auto &issue : corpus.issues)
        err << ojson{{"warning", "corpus"}, {"line", issue.line}, {"message", issue.message}}.dump() << "\n";

    const SampleGenerator gen(corpus.documents, a.gen);
    GenStats stats;
    std::string src, tgt;
    for (std::uint64_t i = 0; i < a.samples; ++i) {
        const auto sample = gen.draw(i);
        stats.add(sample);
        src += sample.source + "\n";
        tgt += sample.target + "\n";
    }
    write_text_file(a.out + ".src", src);
    write_text_file(a.out + ".tgt", tgt);
    const auto json_stats = gen_stats_json(stats, corpus.issues);
    write_text_file(a.out + ".stats.json", json_stats);
    out << json_stats;
    return kExitOk;
}

// ─── bench ──────────────────────────────────────────────────────────────────

struct BenchArgs {
    std::string refs;
    std::vector<std::string> logs;
    std::string json_out;
    unsigned jobs = 1;
};

int cmd_bench(const BenchArgs &a, std::ostream &out) {
    const auto refs = load_references(a.refs);
    std::vector<MetricsReport> reports(a.logs.size());
    const auto run_one = [&](std::size_t i) { reports[i] = evaluate(load_emission_log(a.logs[i]), refs); };

    const std::size_t jobs = std::max(1u, a.jobs);
    for (std::size_t base = 0; base < a.logs.size(); base += jobs) {
        std::vector<std::future<void>> batch;
        for (std::size_t i = base; i < std::min(a.logs.size(), base + jobs); ++i)
            batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_one, i));
        for (auto &f : batch) f.get();
    }

    // one row per (log, mode); both outputs print the same doubles
    struct Row {
        std::string run;
        const char *mode;
        const LatencyStats *s;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < a.logs.size(); ++i) {
        rows.push_back({a.logs[i], "NCA", &reports[i].nca.stats});
        rows.push_back({a.logs[i], "CA", &reports[i].ca.stats});
    }

    ojson doc = ojson::array();
    for (const auto &r : rows) {
        doc.push_back(ojson{{"run", r.run},
                            {"mode", r.mode},
                            {"M", r.s->mean_s},
                            {"mdn", r.s->median_s},
                            {"p90", r.s->p90_s},
                            {"p95", r.s->p95_s},
                            {"p99", r.s->p99_s},
                            {"max", r.s->max_s}});
    }
    if (!a.json_out.empty()) write_text_file(a.json_out, doc.dump(2) + "\n");

    std::size_t run_w = 3;
    for (const auto &r : rows) run_w = std::max(run_w, r.run.size());
    const auto cell = [](double v) { return format_number(v); };
    out << std::left << std::setw(static_cast<int>(run_w)) << "run" << "  " << std::setw(4) << "mode";
    for (const char *h : {"M", "mdn", "90%", "95%", "99%", "max"}) out << "  " << std::setw(20) << h;
    out << "\n";
    for (const auto &r : rows) {
        out << std::setw(static_cast<int>(run_w)) << r.run << "  " << std::setw(4) << r.mode;
        for (double v : {r.s->mean_s, r.s->median_s, r.s->p90_s, r.s->p95_s, r.s->p99_s, r.s->max_s})
            out << "  " << std::setw(20) << cell(v);
        out << "\n";
    }
    return kExitOk;
}

// ─── serve ──────────────────────────────────────────────────────────────────

struct ServeArgs {
    std::string script;
    std::optional<std::uint16_t> listen;
    std::string abbreviations;
};

TcpServer *g_server = nullptr;

extern "C" void stop_server(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs &a, std::ostream &out) {
    const auto script = load_mock_script(a.script);
    const auto splitter =
        a.abbreviations.empty() ? SentenceSplitter{} : SentenceSplitter::from_file(a.abbreviations);
    if (!a.listen) {
        MockAsrBackend asr(script);
        MockMtBackend mt(script, splitter);
        serve_stream(std::cin, out, asr, mt);
        return kExitOk;
    }
    TcpServer server(*a.listen, [&] {
        return BackendPair{std::make_unique<MockAsrBackend>(script), std::make_unique<MockMtBackend>(script, splitter)};
    });
    out << ojson{{"listening", "127.0.0.1"}, {"port", server.port()}}.dump() << std::endl;
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    server.run();
    g_server = nullptr;
    return kExitOk;
}

// ─── errors ─────────────────────────────────────────────────────────────────

int report(std::ostream &err, const char *kind, const std::string &message, const std::string &field = {}) {
    ojson doc{{"error", kind}, {"message", message}};
    if (!field.empty()) doc["field"] = field;
    err << doc.dump(-1, ' ', false, ojson::error_handler_t::replace) << "\n";
    const std::string k = kind;
    return k == "backend-error" || k == "protocol-error" ? kExitBackend : kExitInvalid;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Simultaneous speech translation engine and evaluation harness", "simulst"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Replay an audio trace through the streaming pipeline");
    simulate->add_option("--trace", sim.trace, "Trace JSONL of audio events")->required();
    simulate->add_option("--config", sim.config, "Pipeline config JSON")->required();
    simulate->add_option("--out", sim.out, "Emission log to write (JSONL)")->required();
    simulate->add_option("--summary", sim.summary, "Run summary JSON (default: <out>.summary.json)");
    simulate->add_option("--seed", sim.seed, "Override the mock seed");

    EvalArgs ev;
    auto *eval = app.add_subcommand("eval", "Score an emission log against timed references");
    eval->add_option("--log", ev.log, "Emission log (JSONL)")->required();
    eval->add_option("--refs", ev.refs, "References (JSONL)")->required();
    eval->add_option("--mode", ev.mode, "Latency modes to report")
        ->check(CLI::IsMember({"both", "nca", "ca"}));
    eval->add_option("--out", ev.out, "Also write the report here");

    DatagenArgs dg;
    auto *datagen = app.add_subcommand("datagen", "Generate prefix-augmented document samples");
    datagen->add_option("--corpus", dg.corpus, "Corpus file ('source ||| target' lines)")->required();
    datagen->add_option("--out", dg.out, "Output prefix (.src, .tgt, .stats.json)")->required();
    datagen->add_option("--samples", dg.samples, "Number of samples");
    datagen->add_option("--seed", dg.gen.seed, "Random seed");
    datagen->add_option("--prefix-rate", dg.gen.prefix_rate, "Probability of a prefix pair");
    datagen->add_option("--min-context", dg.gen.min_context, "Minimum context sentences");
    datagen->add_option("--max-context", dg.gen.max_context, "Maximum context sentences");

    BenchArgs bn;
    auto *bench = app.add_subcommand("bench", "Compare StreamLAAL distributions of several logs");
    bench->add_option("--refs", bn.refs, "References (JSONL)")->required();
    bench->add_option("logs", bn.logs, "Emission logs")->required();
    bench->add_option("--json", bn.json_out, "Write the table as JSON");
    bench->add_option("--jobs", bn.jobs, "Logs evaluated in parallel");

    ServeArgs sv;
    auto *serve = app.add_subcommand("serve", "Serve the mock backends over the wire protocol");
    serve->add_option("--script", sv.script, "Mock script JSON")->required();
    serve->add_option("--listen", sv.listen, "TCP port on 127.0.0.1 (0 picks one); default is stdio");
    serve->add_option("--abbreviations", sv.abbreviations, "Abbreviation list for sentence splitting");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back(); // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        return report(err, "invalid-argument", e.what());
    }

    try {
        if (*simulate) return cmd_simulate(sim, out);
        if (*eval) return cmd_eval(ev, out);
        if (*datagen) return cmd_datagen(dg, out, err);
        if (*bench) return cmd_bench(bn, out);
        if (*serve) return cmd_serve(sv, out);
    } catch (const ProtocolError &e) {
        return report(err, to_string(e.kind()), e.what(), e.field());
    } catch (const Error &e) {
        return report(err, to_string(e.kind()), e.what());
    } catch (const std::exception &e) {
        return report(err, "io-error", e.what());
    }
    return kExitInvalid;
}

} // namespace simulst::cli
