// SPDX-License-Identifier: Apache-2.0
#include "edzda/llm.hpp"

#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace edzda {

namespace fs = std::filesystem;

std::string stage_name(Stage stage) {
    switch (stage) {
        case Stage::Judgment: return "judgment";
        case Stage::SeedState: return "seed-state";
        case Stage::UserGoal: return "user-goal";
        case Stage::Flow: return "flow";
        case Stage::DialogueGen: return "dialogue-gen";
        case Stage::Complication: return "complication";
    }
    return "unknown";
}

Stage stage_from_name(const std::string& name) {
    if (name == "judgment") return Stage::Judgment;
    if (name == "seed-state") return Stage::SeedState;
    if (name == "user-goal") return Stage::UserGoal;
    if (name == "flow") return Stage::Flow;
    if (name == "dialogue-gen") return Stage::DialogueGen;
    if (name == "complication") return Stage::Complication;
    throw ConfigError("unknown stage name: " + name);
}

ChatRequest make_request(Stage stage, std::vector<ChatMessage> messages) {
    ChatRequest req;
    req.messages = std::move(messages);
    req.stage_tag = stage;
    req.temperature = stage == Stage::DialogueGen ? 0.7 : 0.0;
    req.top_p = 1.0;
    if (req.messages.empty()) throw ValidationError("chat request with no messages");
    return req;
}

namespace {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string request_digest(const ChatRequest& req) {
    std::uint64_t h = fnv1a64("edzda-chat-v1");
    for (const ChatMessage& m : req.messages) {
        h = fnv1a64(m.role, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(m.text, h);
        h = fnv1a64("\x1e", h);
    }
    h = fnv1a64("t=" + format_real(req.temperature), h);
    h = fnv1a64("p=" + format_real(req.top_p), h);
    return to_hex(h);
}

Json chat_request_to_json(const ChatRequest& req) {
    Json messages = Json::array();
    for (const ChatMessage& m : req.messages) {
        messages.push_back({{"role", m.role}, {"content", m.text}});
    }
    return Json{{"messages", std::move(messages)},
                {"temperature", req.temperature},
                {"top_p", req.top_p},
                {"stage", stage_name(req.stage_tag)}};
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

std::string HttpBackend::complete_once(const ChatRequest& req) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    Json body = Json::object();
    body["model"] = config_.model;
    Json messages = Json::array();
    for (const ChatMessage& m : req.messages) {
        messages.push_back({{"role", m.role}, {"content", m.text}});
    }
    body["messages"] = std::move(messages);
    body["temperature"] = req.temperature;
    body["top_p"] = req.top_p;

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransportError("transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("retryable http status " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw ValidationError("http status " + std::to_string(res->status) + ": " + res->body);
    }
    Json doc;
    try {
        doc = Json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw TransportError(std::string("unparseable completion body: ") + e.what());
    }
    if (!doc.contains("choices") || doc["choices"].empty()) {
        throw TransportError("completion body has no choices");
    }
    std::string text = doc["choices"][0].at("message").at("content").get<std::string>();
    if (text.empty()) throw TransportError("empty completion text");
    return text;
}

// ---------------------------------------------------------------------------
// Cassette + replay

Cassette Cassette::load(const fs::path& path) {
    Cassette c;
    for (const Json& record : read_jsonl(path)) {
        Entry e;
        e.request = record.value("request", Json::object());
        e.response = record.at("response").get<std::string>();
        c.entries_[record.at("digest").get<std::string>()] = std::move(e);
    }
    return c;
}

void Cassette::put(const ChatRequest& req, const std::string& response_text) {
    entries_[request_digest(req)] = Entry{chat_request_to_json(req), response_text};
}

std::optional<std::string> Cassette::find(const std::string& digest) const {
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second.response;
}

void Cassette::save(const fs::path& path) const {
    std::vector<Json> records;
    records.reserve(entries_.size());
    for (const auto& [digest, entry] : entries_) {
        records.push_back(
            Json{{"digest", digest}, {"request", entry.request}, {"response", entry.response}});
    }
    write_jsonl(path, records);
}

std::string ReplayBackend::complete_once(const ChatRequest& req) {
    std::string digest = request_digest(req);
    if (auto hit = cassette_.find(digest)) return *hit;
    throw ReplayMiss("no cassette entry for request " + digest + " (stage " +
                     stage_name(req.stage_tag) + ")");
}

// ---------------------------------------------------------------------------
// Client: cache + retry + optional recording

LlmClient::LlmClient(std::shared_ptr<LlmBackend> backend, ClientConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {
    if (!backend_) throw ConfigError("llm client requires a backend");
    if (config_.cache_dir) fs::create_directories(*config_.cache_dir);
}

std::optional<std::string> LlmClient::cache_lookup(const std::string& digest) const {
    if (!config_.cache_dir) return std::nullopt;
    fs::path file = *config_.cache_dir / (digest + ".json");
    if (!fs::exists(file)) return std::nullopt;
    Json doc = read_json_file(file);
    return doc.at("response").get<std::string>();
}

void LlmClient::cache_store(const std::string& digest, const ChatRequest& req,
                            const std::string& text) const {
    if (!config_.cache_dir) return;
    Json doc{{"digest", digest}, {"request", chat_request_to_json(req)}, {"response", text}};
    write_json_file(*config_.cache_dir / (digest + ".json"), doc);
}

ChatResponse LlmClient::complete(const ChatRequest& raw) {
    if (raw.messages.empty()) throw ValidationError("chat request with no messages");
    ChatRequest req = raw;
    if (auto it = config_.decoding.find(req.stage_tag); it != config_.decoding.end()) {
        req.temperature = it->second.temperature;
        req.top_p = it->second.top_p;
    }
    const std::string digest = request_digest(req);

    {
        std::lock_guard lock(mutex_);
        if (auto hit = cache_lookup(digest)) {
            if (recorder_) recorder_->put(req, *hit);
            return ChatResponse{*hit, /*cached=*/true, /*attempt_count=*/1};
        }
    }

    std::string text;
    int attempt = 0;
    auto delay = config_.retry.base_delay;
    for (;;) {
        ++attempt;
        try {
            text = backend_->complete_once(req);
            break;
        } catch (const TransportError& e) {
            if (attempt >= config_.retry.max_attempts) {
                throw TransportError("retries exhausted after " + std::to_string(attempt) +
                                     " attempts: " + e.what());
            }
            log_warn(std::string("transient completion failure, retrying: ") + e.what());
            std::this_thread::sleep_for(delay);
            delay = std::min(delay * 2, config_.retry.max_delay);
        }
    }
    if (text.empty()) throw TransportError("backend returned empty text");

    {
        std::lock_guard lock(mutex_);
        cache_store(digest, req, text);
        if (recorder_) recorder_->put(req, text);
    }
    return ChatResponse{text, /*cached=*/false, attempt};
}

void LlmClient::start_recording() {
    std::lock_guard lock(mutex_);
    if (!recorder_) recorder_ = std::make_unique<Cassette>();
}

void LlmClient::save_cassette(const fs::path& path) const {
    std::lock_guard lock(mutex_);
    if (!recorder_) throw ConfigError("save_cassette called without recording enabled");
    recorder_->save(path);
}

// ---------------------------------------------------------------------------
// JSON extraction

std::optional<Json> extract_json(const std::string& text) {
    // Scan for balanced spans, tracking string literals and escapes, and keep
    // the longest span that actually parses.
    std::optional<Json> best;
    std::size_t best_len = 0;
    for (std::size_t start = 0; start < text.size(); ++start) {
        char open = text[start];
        if (open != '{' && open != '[') continue;
        char close = open == '{' ? '}' : ']';
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == open) {
                ++depth;
            } else if (c == close) {
                --depth;
                if (depth == 0) {
                    std::size_t len = i - start + 1;
                    if (len > best_len) {
                        Json parsed = Json::parse(text.substr(start, len), nullptr,
                                                  /*allow_exceptions=*/false);
                        if (!parsed.is_discarded()) {
                            best = std::move(parsed);
                            best_len = len;
                        }
                    }
                    break;
                }
            }
        }
    }
    return best;
}

}  // namespace edzda
