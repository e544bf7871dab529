#include "mtosc/mocks.hpp"

#include <cstdio>

#include "mtosc/errors.hpp"
#include "mtosc/tokenizer.hpp"

namespace mtosc::harness {

std::uint64_t fnv1a_hash(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

client::ChatCompletion MockChatClient::complete(const client::ChatRequest& request) {
    std::string reply = synthetic_tokens("s", shared_tokens_);
    if (unique_tokens_ > 0) {
        const std::string& last =
            request.messages.empty() ? std::string() : request.messages.back().content;
        char stem[20];
        std::snprintf(stem, sizeof stem, "h%08xw",
                      static_cast<unsigned>(fnv1a_hash(last) & 0xffffffffu));
        if (!reply.empty()) reply += ' ';
        reply += synthetic_tokens(stem, unique_tokens_);
    }
    client::ChatCompletion completion;
    completion.text = std::move(reply);
    return completion;
}

client::ChatCompletion ScriptedChatClient::complete(const client::ChatRequest&) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= replies_.size()) throw TransportError("scripted chat client exhausted");
    client::ChatCompletion completion;
    completion.text = replies_[next_++];
    return completion;
}

int ScriptedChatClient::calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(next_);
}

client::ChatCompletion FailingChatClient::complete(const client::ChatRequest&) {
    throw TransportError("mock chat failure");
}

}  // namespace mtosc::harness
