// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "edzda/jsonl.hpp"
#include "edzda/util.hpp"

namespace edzda {

enum class Stage {
    Judgment,
    SeedState,
    UserGoal,
    Flow,
    DialogueGen,
    Complication,
};

std::string stage_name(Stage stage);
Stage stage_from_name(const std::string& name);

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string text;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    double top_p = 1.0;
    Stage stage_tag = Stage::Judgment;
};

/// Decoding parameters per stage: 0.7 for dialogue generation, 0 elsewhere,
/// top-p always 1.
ChatRequest make_request(Stage stage, std::vector<ChatMessage> messages);

/// Content digest over (messages, temperature, top_p). Message order matters.
std::string request_digest(const ChatRequest& req);

struct ChatResponse {
    std::string text;
    bool cached = false;
    int attempt_count = 1;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReplayMiss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One round trip to a completion provider; no caching or retries here.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete_once(const ChatRequest& req) = 0;
};

struct HttpBackendConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4-turbo";
    std::string token_env = "EDZDA_API_TOKEN";
    int timeout_seconds = 120;
};

class HttpBackend : public LlmBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    std::string complete_once(const ChatRequest& req) override;

private:
    HttpBackendConfig config_;
};

/// Cassette of recorded exchanges, keyed by request digest. Serialized as
/// JSONL sorted by digest so re-recording is byte-stable.
class Cassette {
public:
    Cassette() = default;
    static Cassette load(const std::filesystem::path& path);

    void put(const ChatRequest& req, const std::string& response_text);
    std::optional<std::string> find(const std::string& digest) const;
    std::size_t size() const { return entries_.size(); }
    void save(const std::filesystem::path& path) const;

private:
    struct Entry {
        Json request;
        std::string response;
    };
    std::map<std::string, Entry> entries_;
};

/// Read-only backend answering from a cassette; unknown requests fail loudly.
class ReplayBackend : public LlmBackend {
public:
    explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}
    std::string complete_once(const ChatRequest& req) override;

private:
    Cassette cassette_;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds base_delay{250};
    std::chrono::milliseconds max_delay{8000};
};

struct StageDecoding {
    double temperature = 0.0;
    double top_p = 1.0;
};

struct ClientConfig {
    std::optional<std::filesystem::path> cache_dir;  // disk cache, off if unset
    RetryPolicy retry;
    /// Per-stage decoding overrides, applied before caching/digesting.
    std::map<Stage, StageDecoding> decoding;
};

/// Completion client: disk cache in front of the backend, exponential-backoff
/// retries behind it. Optionally records every exchange into a cassette.
class LlmClient {
public:
    LlmClient(std::shared_ptr<LlmBackend> backend, ClientConfig config = {});

    ChatResponse complete(const ChatRequest& req);

    /// Enables recording; recorded entries are flushed by save_cassette().
    void start_recording();
    void save_cassette(const std::filesystem::path& path) const;
    const Cassette* recording() const { return recorder_ ? recorder_.get() : nullptr; }

private:
    std::optional<std::string> cache_lookup(const std::string& digest) const;
    void cache_store(const std::string& digest, const ChatRequest& req,
                     const std::string& text) const;

    std::shared_ptr<LlmBackend> backend_;
    ClientConfig config_;
    std::unique_ptr<Cassette> recorder_;
    mutable std::mutex mutex_;
};

Json chat_request_to_json(const ChatRequest& req);

/// Extracts the longest balanced {...} or [...] span from model text, which
/// is routinely wrapped in prose. Returns nullopt when nothing parses.
std::optional<Json> extract_json(const std::string& text);

}  // namespace edzda
