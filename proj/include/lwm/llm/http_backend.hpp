#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "lwm/llm/backend.hpp"

namespace lwm {

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Minimal POST abstraction so retry and parsing logic can be tested
// without a network. Implementations throw BackendError on transport failure.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const std::string& body,
                              const std::map<std::string, std::string>& headers) = 0;
};

// cpp-httplib client (http and https).
class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(120)) : timeout_(timeout) {}
    HttpResponse post(const std::string& url, const std::string& body,
                      const std::map<std::string, std::string>& headers) override;

private:
    std::chrono::seconds timeout_;
};

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key;
    int max_retries = 4;
    std::chrono::milliseconds initial_backoff{500};

    // LWM_API_KEY, LWM_BASE_URL, LWM_MODEL override the defaults.
    static HttpBackendConfig from_env();
};

// OpenAI-compatible chat/completions client forcing the named tool.
class HttpBackend final : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    HttpBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport = nullptr, Sleeper sleeper = nullptr);

    LlmResult complete(const LlmCall& call) override;
    std::string name() const override { return "http(" + config_.model + ")"; }

    nlohmann::json request_body(const LlmCall& call) const;

private:
    HttpResponse send_with_retry(const std::string& body);

    HttpBackendConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleep_;
};

// Pulls the tool-call arguments object out of a chat/completions reply.
// Throws ParseError on malformed JSON or a missing tool call.
nlohmann::json extract_tool_arguments(const std::string& response_body, const std::string& function);

}  // namespace lwm
