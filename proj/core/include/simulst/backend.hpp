#pragma once

#include "simulst/core.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace simulst {

struct AsrRequest {
    std::string stream_id;
    double window_start_s = 0.0;
    double window_end_s = 0.0;
    std::size_t beam_size = 5;

    friend bool operator==(const AsrRequest &, const AsrRequest &) = default;
};

struct AsrResponse {
    AsrHypothesis hypothesis;
    double compute_cost_s = 0.0;

    friend bool operator==(const AsrResponse &, const AsrResponse &) = default;
};

struct MtRequest {
    std::string stream_id;
    std::vector<std::vector<std::string>> history_source;
    std::vector<std::vector<std::string>> history_target;
    std::vector<std::string> active_source;
    std::vector<std::string> committed_target;
    std::size_t beam_size = 10;
    std::string attention_layer_tag = "6";

    friend bool operator==(const MtRequest &, const MtRequest &) = default;
};

struct MtResponse {
    BeamSet beams;
    double compute_cost_s = 0.0;

    friend bool operator==(const MtResponse &, const MtResponse &) = default;
};

class AsrBackend {
public:
    virtual ~AsrBackend() = default;
    /// Throws BackendError on failure, ProtocolError on malformed replies.
    virtual AsrResponse decode(const AsrRequest &request) = 0;
};

class MtBackend {
public:
    virtual ~MtBackend() = default;
    virtual MtResponse translate(const MtRequest &request) = 0;
};

/// Replaces the backend-reported compute cost with measured host time. Used
/// when driving real model servers, where CA latency is hardware-dependent.
class MeasuredAsrBackend final : public AsrBackend {
public:
    explicit MeasuredAsrBackend(AsrBackend &inner) : inner_(inner) {}

    AsrResponse decode(const AsrRequest &request) override {
        const auto t0 = std::chrono::steady_clock::now();
        auto response = inner_.decode(request);
        response.compute_cost_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return response;
    }

private:
    AsrBackend &inner_;
};

class MeasuredMtBackend final : public MtBackend {
public:
    explicit MeasuredMtBackend(MtBackend &inner) : inner_(inner) {}

    MtResponse translate(const MtRequest &request) override {
        const auto t0 = std::chrono::steady_clock::now();
        auto response = inner_.translate(request);
        response.compute_cost_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return response;
    }

private:
    MtBackend &inner_;
};

} // namespace simulst
