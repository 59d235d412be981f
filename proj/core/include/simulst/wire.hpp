#pragma once

#include "simulst/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace simulst {

// Newline-delimited JSON protocol between the engine and external model
// servers. One request line, one response line, one request in flight per
// connection. Every message carries "v" (schema version) and "type".
//
//   asr_request   {v, type, stream, window_start_s, window_end_s, beam_size}
//   asr_response  {v, type, window_offset_s, words: [{text, start_s, end_s}],
//                  compute_cost_s}
//   mt_request    {v, type, stream, history_source: [sentence...],
//                  history_target: [sentence...], context_source,
//                  context_target, active_source: [word...],
//                  committed_target: [token...], beam_size, attention_layer_tag}
//   mt_response   {v, type, requested_size, beams: [{tokens, score,
//                  attention: [[weight...]...]}], compute_cost_s}
//   error         {v, type, message}
//
// History sentences travel as space-joined strings; context_source and
// context_target are the same sentences joined with " [SEP] ".

inline constexpr int kWireVersion = 1;

std::string encode_asr_request(const AsrRequest &request);
std::string encode_asr_response(const AsrResponse &response);
std::string encode_mt_request(const MtRequest &request);
std::string encode_mt_response(const MtResponse &response);
std::string encode_error(std::string_view message);

// Decoders throw ProtocolError naming the offending field.
AsrRequest decode_asr_request(std::string_view line);
AsrResponse decode_asr_response(std::string_view line);
MtRequest decode_mt_request(std::string_view line);
MtResponse decode_mt_response(std::string_view line);

/// Message type of a line ("asr_request", "mt_response", ...).
std::string wire_message_type(std::string_view line);

/// Sentences joined with " [SEP] ".
std::string join_with_sentinel(const std::vector<std::vector<std::string>> &sentences);

// ─── Transports ─────────────────────────────────────────────────────────────

class Transport {
public:
    virtual ~Transport() = default;
    /// Sends `line` followed by '\n'.
    virtual void write_line(std::string_view line) = 0;
    /// Reads one line without its terminator. Throws BackendError on EOF or
    /// when nothing arrives within `timeout`.
    virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

/// Talks to a child process over its standard input and output.
class ProcessTransport final : public Transport {
public:
    explicit ProcessTransport(std::vector<std::string> argv);
    ~ProcessTransport() override;

    ProcessTransport(const ProcessTransport &) = delete;
    ProcessTransport &operator=(const ProcessTransport &) = delete;

    void write_line(std::string_view line) override;
    std::string read_line(std::chrono::milliseconds timeout) override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

class TcpTransport final : public Transport {
public:
    TcpTransport(const std::string &host, std::uint16_t port);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport &) = delete;
    TcpTransport &operator=(const TcpTransport &) = delete;

    void write_line(std::string_view line) override;
    std::string read_line(std::chrono::milliseconds timeout) override;

private:
    int fd_ = -1;
    std::string buffer_;
};

// ─── Client ─────────────────────────────────────────────────────────────────

class WireClient {
public:
    explicit WireClient(std::unique_ptr<Transport> transport,
                        std::chrono::milliseconds timeout = std::chrono::seconds(60));

    AsrResponse roundtrip(const AsrRequest &request);
    MtResponse roundtrip(const MtRequest &request);

private:
    std::string exchange(const std::string &line);

    std::unique_ptr<Transport> transport_;
    std::chrono::milliseconds timeout_;
};

class WireAsrBackend final : public AsrBackend {
public:
    explicit WireAsrBackend(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}
    AsrResponse decode(const AsrRequest &request) override { return client_->roundtrip(request); }

private:
    std::shared_ptr<WireClient> client_;
};

class WireMtBackend final : public MtBackend {
public:
    explicit WireMtBackend(std::shared_ptr<WireClient> client) : client_(std::move(client)) {}
    MtResponse translate(const MtRequest &request) override { return client_->roundtrip(request); }

private:
    std::shared_ptr<WireClient> client_;
};

// ─── Server side ────────────────────────────────────────────────────────────

/// Answers one request line; failures become an error message line.
std::string handle_request_line(std::string_view line, AsrBackend &asr, MtBackend &mt);

/// Serves requests from `in` until EOF, flushing after every response.
void serve_stream(std::istream &in, std::ostream &out, AsrBackend &asr, MtBackend &mt);

struct BackendPair {
    std::unique_ptr<AsrBackend> asr;
    std::unique_ptr<MtBackend> mt;
};

/// Loopback TCP server; each connection gets its own backends and thread.
class TcpServer {
public:
    using Factory = std::function<BackendPair()>;

    /// Binds 127.0.0.1:`port` (0 picks a free port).
    TcpServer(std::uint16_t port, Factory factory);
    ~TcpServer();

    TcpServer(const TcpServer &) = delete;
    TcpServer &operator=(const TcpServer &) = delete;

    std::uint16_t port() const { return port_; }

    /// Accepts connections until stop() is called.
    void run();
    void stop();

private:
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    Factory factory_;
    std::atomic<bool> stopping_{false};
};

} // namespace simulst
