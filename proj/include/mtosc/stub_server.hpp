#pragma once

#include <memory>
#include <string>
#include <vector>

namespace mtosc::client {

// Local OpenAI-compatible endpoint for tests: answers POST
// /v1/chat/completions from a fixed script, records every request body, and
// returns HTTP 500 once the script is exhausted.
class StubServer {
public:
    struct Response {
        int status = 200;
        std::string body;
    };

    // Well-formed chat completion body. Usage is included only when both
    // token counts are non-negative.
    static Response chat_completion(const std::string& text, int prompt_tokens = -1,
                                    int completion_tokens = -1);

    explicit StubServer(std::vector<Response> script);
    ~StubServer();
    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    // Binds 127.0.0.1 on a free port and serves from a background thread.
    void start();
    void stop();

    int port() const;
    std::string base_url() const;
    std::vector<std::string> request_bodies() const;
    int hits() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mtosc::client
