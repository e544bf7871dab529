#include "mtosc/model_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <thread>

#include <json.hpp>

#include "httplib_config.hpp"
#include "mtosc/errors.hpp"

namespace mtosc::client {

using nlohmann::json;
using nlohmann::ordered_json;

ClientConfig config_from_env() {
    ClientConfig config;
    if (const char* url = std::getenv("MTOSC_BASE_URL")) config.base_url = url;
    if (const char* key = std::getenv("MTOSC_API_KEY")) config.api_key = key;
    return config;
}

ProviderProfile ProviderProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open provider profile: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw Error("provider profile must be a JSON object: " + path);
    ProviderProfile profile;
    if (doc.contains("supports_frequency_penalty"))
        profile.supports_frequency_penalty = doc["supports_frequency_penalty"].get<bool>();
    return profile;
}

std::string request_body_json(const ChatRequest& request, const ProviderProfile& profile) {
    ordered_json body;
    body["model"] = request.model_id;
    body["messages"] = ordered_json::array();
    for (const auto& message : request.messages) {
        ordered_json entry;
        entry["role"] = std::string(to_string(message.role));
        entry["content"] = message.content;
        body["messages"].push_back(std::move(entry));
    }
    body["temperature"] = request.temperature;
    body["top_p"] = request.top_p;
    if (request.frequency_penalty && profile.supports_frequency_penalty)
        body["frequency_penalty"] = *request.frequency_penalty;
    body["max_completion_tokens"] = request.max_completion_tokens;
    return body.dump();
}

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port], what httplib::Client wants
    bool https = false;
};

ParsedUrl parse_base_url(std::string url) {
    while (!url.empty() && url.back() == '/') url.pop_back();
    if (url.empty()) throw TransportError("base_url is empty; set MTOSC_BASE_URL or --base-url");
    ParsedUrl parsed;
    parsed.https = url.rfind("https://", 0) == 0;
    if (!parsed.https && url.rfind("http://", 0) != 0)
        throw TransportError("base_url must start with http:// or https://: " + url);
    parsed.origin = std::move(url);
    return parsed;
}

ChatCompletion parse_completion(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw MalformedResponse("response body is not JSON");
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
        throw MalformedResponse("response has no choices");
    const auto& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string())
        throw MalformedResponse("response choice has no message content");

    ChatCompletion completion;
    completion.text = first["message"]["content"].get<std::string>();
    if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& usage = doc["usage"];
        if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number_integer())
            completion.prompt_tokens = usage["prompt_tokens"].get<int>();
        if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_integer())
            completion.completion_tokens = usage["completion_tokens"].get<int>();
    }
    return completion;
}

void sleep_seconds(double seconds) {
    if (seconds > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace

ChatCompletion chat_complete(const ChatRequest& request, const ClientConfig& config,
                             const ProviderProfile& profile, const CancelToken* cancel) {
    const ParsedUrl url = parse_base_url(config.base_url);
#ifndef MTOSC_HTTPS_SUPPORT
    if (url.https) throw TransportError("built without https support");
#endif

    httplib::Client cli(url.origin);
    const auto timeout = std::chrono::duration<double>(config.timeout_seconds);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));

    httplib::Headers headers;
    if (!config.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config.api_key);

    const std::string body = request_body_json(request, profile);
    std::string last_error = "request was never sent";
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (cancel && cancel->cancelled()) throw TransportError("request cancelled");
        if (attempt > 0)
            sleep_seconds(config.backoff_base_seconds * static_cast<double>(1 << (attempt - 1)));

        auto res = cli.Post("/v1/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;  // connection errors and timeouts are transient
        }
        if (res->status == 200) return parse_completion(res->body);
        if (res->status == 401 || res->status == 403)
            throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) + ")");
        if (res->status == 429) {
            last_error = "rate limited (HTTP 429)";
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error (HTTP " + std::to_string(res->status) + ")";
            continue;
        }
        throw TransportError("unexpected HTTP status " + std::to_string(res->status));
    }
    if (last_error.rfind("rate limited", 0) == 0) throw RateLimited(last_error + ", retries exhausted");
    throw TransportError(last_error + ", retries exhausted");
}

ChatCompletion HttpChatClient::complete(const ChatRequest& request) {
    return chat_complete(request, config_, profile_, cancel_);
}

condenser::BackendCompletion HttpCondenserBackend::complete(
    const std::string& prompt, const condenser::CondenserParams& params) {
    ChatRequest request;
    request.model_id = params.model_id;
    request.messages.push_back(ChatMessage{Role::User, prompt});
    request.temperature = params.temperature;
    request.top_p = params.top_p;
    request.frequency_penalty = params.frequency_penalty;
    request.max_completion_tokens = params.max_completion_tokens;

    ChatCompletion completion = chat_complete(request, config_, profile_, cancel_);
    return condenser::BackendCompletion{std::move(completion.text), completion.prompt_tokens,
                                        completion.completion_tokens};
}

}  // namespace mtosc::client
