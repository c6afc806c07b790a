#include "lwm/llm/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "lwm/errors.hpp"
#include "lwm/log.hpp"

namespace lwm {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InvalidArgument("url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpResponse HttplibTransport::post(const std::string& url, const std::string& body,
                                    const std::map<std::string, std::string>& headers) {
    SplitUrl parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(parts.path, h, body, "application/json");
    if (!res) throw BackendError("http transport failure: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

HttpBackendConfig HttpBackendConfig::from_env() {
    HttpBackendConfig c;
    if (const char* v = std::getenv("LWM_API_KEY")) c.api_key = v;
    if (const char* v = std::getenv("LWM_BASE_URL")) c.base_url = v;
    if (const char* v = std::getenv("LWM_MODEL")) c.model = v;
    return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config, std::shared_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleep_(std::move(sleeper)) {
    if (!transport_) transport_ = std::make_shared<HttplibTransport>();
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
}

nlohmann::json HttpBackend::request_body(const LlmCall& call) const {
    nlohmann::json messages = nlohmann::json::array();
    if (!call.system.empty()) messages.push_back({{"role", "system"}, {"content", call.system}});
    messages.push_back({{"role", "user"}, {"content", call.user}});
    return {{"model", config_.model},
            {"messages", messages},
            {"tools", nlohmann::json::array({call.function.to_tool()})},
            {"tool_choice", {{"type", "function"}, {"function", {{"name", call.function.name}}}}},
            {"temperature", call.temperature},
            {"max_tokens", call.max_tokens}};
}

HttpResponse HttpBackend::send_with_retry(const std::string& body) {
    std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
    if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;
    const std::string url = config_.base_url + "/chat/completions";

    auto backoff = config_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleep_(backoff);
            backoff *= 2;
        }
        HttpResponse res;
        try {
            res = transport_->post(url, body, headers);
        } catch (const std::exception& e) {
            last_error = e.what();
            warn("llm request attempt " + std::to_string(attempt + 1) + " failed: " + last_error);
            continue;
        }
        if (res.status >= 200 && res.status < 300) return res;
        last_error = "status " + std::to_string(res.status) + ": " + res.body.substr(0, 200);
        if (!transient(res.status)) throw BackendError("chat/completions failed with " + last_error);
        warn("llm request attempt " + std::to_string(attempt + 1) + " failed: " + last_error);
    }
    throw BackendError("chat/completions failed after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

nlohmann::json extract_tool_arguments(const std::string& response_body, const std::string& function) {
    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(response_body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("response is not JSON: ") + e.what());
    }
    try {
        const auto& message = reply.at("choices").at(0).at("message");
        const auto& calls = message.at("tool_calls");
        for (const auto& tc : calls) {
            const auto& fn = tc.at("function");
            if (fn.at("name").get<std::string>() != function) continue;
            const auto& raw = fn.at("arguments");
            if (raw.is_object()) return raw;
            return nlohmann::json::parse(raw.get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed tool call: ") + e.what());
    }
    throw ParseError("response has no call to " + function);
}

LlmResult HttpBackend::complete(const LlmCall& call) {
    const std::string body = request_body(call).dump();
    for (int parse_attempt = 0;; ++parse_attempt) {
        HttpResponse res = send_with_retry(body);
        nlohmann::json args;
        try {
            args = extract_tool_arguments(res.body, call.function.name);
        } catch (const ParseError& e) {
            if (parse_attempt == 0) {
                warn(std::string("re-requesting after unparseable tool output: ") + e.what());
                continue;
            }
            throw;
        }
        return LlmResult::from_arguments(call.function, args);
    }
}

}  // namespace lwm
