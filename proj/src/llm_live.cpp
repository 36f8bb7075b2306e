#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "fafsp/llm.hpp"

namespace fafsp {

using json = nlohmann::json;

namespace {

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string() : std::string(v);
}

// "https://host:port/v1" -> ("https://host:port", "/v1")
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path_at = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_at == std::string::npos) {
        return {url, ""};
    }
    std::string path = url.substr(path_at);
    while (!path.empty() && path.back() == '/') {
        path.pop_back();
    }
    return {url.substr(0, path_at), path};
}

bool transient(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

std::optional<LiveConfig> LiveConfig::from_env() {
    LiveConfig cfg;
    cfg.base_url = env("FAFSP_LLM_BASE_URL");
    cfg.api_key = env("FAFSP_LLM_API_KEY");
    cfg.model = env("FAFSP_LLM_MODEL");
    if (cfg.base_url.empty() || cfg.api_key.empty() || cfg.model.empty()) {
        return std::nullopt;
    }
    return cfg;
}

LiveTransport::LiveTransport(LiveConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.max_attempts < 1) {
        cfg_.max_attempts = 1;
    }
}

std::string LiveTransport::request_body(const CompletionRequest& request) const {
    json body;
    body["model"] = cfg_.model;
    body["messages"] = json::array({
        {{"role", "system"}, {"content", request.system}},
        {{"role", "user"}, {"content", request.prompt}},
    });
    body["temperature"] = request.temperature;
    return body.dump();
}

std::string LiveTransport::parse_response(const std::string& body) {
    try {
        const json j = json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed chat-completion response: ") + e.what());
    }
}

std::string LiveTransport::complete(const CompletionRequest& request) {
    const auto [host, prefix] = split_url(cfg_.base_url);
    const std::string path = prefix + "/chat/completions";
    const std::string body = request_body(request);
    const httplib::Headers headers = {{"Authorization", "Bearer " + cfg_.api_key}};

    std::string last_error;
    for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(cfg_.backoff * (1 << (attempt - 1)));
        }
        httplib::Client client(host);
        client.set_connection_timeout(cfg_.timeout);
        client.set_read_timeout(cfg_.timeout);
        client.set_write_timeout(cfg_.timeout);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            return parse_response(res->body);
        }
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
        if (!transient(res->status)) {
            break;
        }
    }
    throw TransportError(last_error);
}

} // namespace fafsp
