#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "mtosc/condenser.hpp"
#include "mtosc/types.hpp"

namespace mtosc::client {

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.01;
    double top_p = 1.0;
    std::optional<double> frequency_penalty = 1.0;
    int max_completion_tokens = 10000;
};

struct ClientConfig {
    std::string base_url;         // e.g. http://127.0.0.1:8080
    std::string api_key;          // sent as a bearer token, never logged
    double timeout_seconds = 120.0;
    int max_retries = 3;          // retries after the first attempt
    double backoff_base_seconds = 1.0;
};

// Reads MTOSC_BASE_URL and MTOSC_API_KEY; unset variables leave the fields
// empty.
ClientConfig config_from_env();

// Capability quirks of the serving endpoint. Some providers reject
// frequency_penalty; with supports_frequency_penalty false the field is
// omitted from the request body.
struct ProviderProfile {
    bool supports_frequency_penalty = true;

    // JSON object file, e.g. {"supports_frequency_penalty": false}.
    static ProviderProfile load(const std::string& path);
};

struct ChatCompletion {
    std::string text;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

// Cooperative cancellation: checked before every attempt and between
// retries. Session teardown sets it to abandon in-flight background work.
class CancelToken {
public:
    void cancel() { cancelled_.store(true, std::memory_order_relaxed); }
    bool cancelled() const { return cancelled_.load(std::memory_order_relaxed); }

private:
    std::atomic<bool> cancelled_{false};
};

// Deterministic request body: identical requests serialize to identical
// bytes. frequency_penalty appears only when the request carries a value and
// the profile supports it.
std::string request_body_json(const ChatRequest& request, const ProviderProfile& profile = {});

// POST {base_url}/v1/chat/completions. 429, 5xx and transport timeouts are
// retried with exponential backoff (backoff_base * 2^attempt); 401/403 raise
// AuthError immediately; a response without choices[0].message.content
// raises MalformedResponse. Server-reported usage is returned when present.
ChatCompletion chat_complete(const ChatRequest& request, const ClientConfig& config,
                             const ProviderProfile& profile = {},
                             const CancelToken* cancel = nullptr);

// Interface the harness drives the main assistant through.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatCompletion complete(const ChatRequest& request) = 0;
};

class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(ClientConfig config, ProviderProfile profile = {},
                            const CancelToken* cancel = nullptr)
        : config_(std::move(config)), profile_(profile), cancel_(cancel) {}
    ChatCompletion complete(const ChatRequest& request) override;

private:
    ClientConfig config_;
    ProviderProfile profile_;
    const CancelToken* cancel_;
};

// Condenser backend over the same endpoint: the prompt travels as a single
// user message with the condenser's generation parameters.
class HttpCondenserBackend final : public condenser::CondenserBackend {
public:
    explicit HttpCondenserBackend(ClientConfig config, ProviderProfile profile = {},
                                  const CancelToken* cancel = nullptr)
        : config_(std::move(config)), profile_(profile), cancel_(cancel) {}
    condenser::BackendCompletion complete(const std::string& prompt,
                                          const condenser::CondenserParams& params) override;

private:
    ClientConfig config_;
    ProviderProfile profile_;
    const CancelToken* cancel_;
};

}  // namespace mtosc::client
