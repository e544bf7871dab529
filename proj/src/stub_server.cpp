#include "mtosc/stub_server.hpp"

#include <mutex>
#include <thread>

#include <json.hpp>

#include "httplib_config.hpp"
#include "mtosc/errors.hpp"

namespace mtosc::client {

using nlohmann::ordered_json;

struct StubServer::Impl {
    std::vector<Response> script;
    httplib::Server server;
    std::thread worker;
    int port = 0;

    mutable std::mutex mutex;
    std::vector<std::string> bodies;
    size_t next = 0;
};

StubServer::Response StubServer::chat_completion(const std::string& text, int prompt_tokens,
                                                 int completion_tokens) {
    ordered_json body;
    body["id"] = "stub-completion";
    body["object"] = "chat.completion";
    body["model"] = "stub";
    ordered_json message;
    message["role"] = "assistant";
    message["content"] = text;
    ordered_json choice;
    choice["index"] = 0;
    choice["message"] = std::move(message);
    choice["finish_reason"] = "stop";
    body["choices"] = ordered_json::array({std::move(choice)});
    if (prompt_tokens >= 0 && completion_tokens >= 0) {
        ordered_json usage;
        usage["prompt_tokens"] = prompt_tokens;
        usage["completion_tokens"] = completion_tokens;
        usage["total_tokens"] = prompt_tokens + completion_tokens;
        body["usage"] = std::move(usage);
    }
    return Response{200, body.dump()};
}

StubServer::StubServer(std::vector<Response> script) : impl_(std::make_unique<Impl>()) {
    impl_->script = std::move(script);
    impl_->server.Post("/v1/chat/completions",
                       [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
                           std::lock_guard<std::mutex> lock(impl->mutex);
                           impl->bodies.push_back(req.body);
                           if (impl->next >= impl->script.size()) {
                               res.status = 500;
                               res.set_content("{\"error\": \"stub script exhausted\"}",
                                               "application/json");
                               return;
                           }
                           const Response& scripted = impl->script[impl->next++];
                           res.status = scripted.status;
                           res.set_content(scripted.body, "application/json");
                       });
}

StubServer::~StubServer() { stop(); }

void StubServer::start() {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) throw TransportError("stub server failed to bind");
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void StubServer::stop() {
    if (impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

int StubServer::port() const { return impl_->port; }

std::string StubServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::vector<std::string> StubServer::request_bodies() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->bodies;
}

int StubServer::hits() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return static_cast<int>(impl_->bodies.size());
}

}  // namespace mtosc::client
