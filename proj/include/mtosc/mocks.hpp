#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "mtosc/model_client.hpp"

namespace mtosc::harness {

// Deterministic chat stand-in. Every reply carries shared_tokens tokens of a
// fixed vocabulary ("s1 s2 ...") plus unique_tokens tokens derived from a
// hash of the last user message ("h<hex>w1 ..."), so repeated assistant
// turns share exactly the fixed part. Stateless and thread-safe.
class MockChatClient final : public client::ChatClient {
public:
    explicit MockChatClient(int shared_tokens = 150, int unique_tokens = 0)
        : shared_tokens_(shared_tokens), unique_tokens_(unique_tokens) {}
    client::ChatCompletion complete(const client::ChatRequest& request) override;

private:
    int shared_tokens_;
    int unique_tokens_;
};

// Replays fixed replies in call order; exhausted calls fail with
// TransportError. Single-session test use.
class ScriptedChatClient final : public client::ChatClient {
public:
    explicit ScriptedChatClient(std::vector<std::string> replies)
        : replies_(std::move(replies)) {}
    client::ChatCompletion complete(const client::ChatRequest& request) override;
    int calls() const;

private:
    std::vector<std::string> replies_;
    mutable std::mutex mutex_;
    size_t next_ = 0;
};

// Chat client that always fails with a TransportError.
class FailingChatClient final : public client::ChatClient {
public:
    client::ChatCompletion complete(const client::ChatRequest& request) override;
};

std::uint64_t fnv1a_hash(std::string_view text);

}  // namespace mtosc::harness
