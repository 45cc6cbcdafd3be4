#include "apikg/provider.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "apikg/digest.hpp"
#include "apikg/errors.hpp"

namespace apikg {

const char* const kRepairInstruction =
    "\n\n@Repair\nYour previous answer did not follow the required output format. "
    "Answer again with only the output, exactly in the format shown in the example.";

int max_tokens_for_unit(const std::string& unit_name) {
    if (unit_name == "entity_extraction") return 128;
    if (unit_name == "entity_type_fusion" || unit_name == "relation_type_fusion") return 4096;
    return 1024;
}

ProviderRequest make_request(const std::string& unit_name, std::string rendered_prompt) {
    ProviderRequest request;
    request.unit_name = unit_name;
    request.rendered_prompt = std::move(rendered_prompt);
    request.max_tokens = max_tokens_for_unit(unit_name);
    return request;
}

// ---- FixtureProvider ----

FixtureProvider FixtureProvider::from_file(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("fixture file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) throw DataError("fixture file " + path + " must be a JSON array");
    FixtureProvider provider;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("unit") || !entry.contains("prompt_hash") ||
            !entry.contains("response")) {
            throw DataError("fixture file " + path +
                            ": each entry needs {\"unit\", \"prompt_hash\", \"response\"}");
        }
        provider.add(entry["unit"].get<std::string>(), entry["prompt_hash"].get<std::string>(),
                     entry["response"].get<std::string>());
    }
    return provider;
}

void FixtureProvider::add(const std::string& unit, const std::string& prompt_hash,
                          std::string response) {
    responses_[{unit, prompt_hash}] = std::move(response);
}

void FixtureProvider::add_for_prompt(const std::string& unit, std::string_view rendered_prompt,
                                     std::string response) {
    add(unit, digest_hex(rendered_prompt), std::move(response));
}

ProviderResponse FixtureProvider::complete(const ProviderRequest& request) {
    const std::string hash = digest_hex(request.rendered_prompt);
    auto it = responses_.find({request.unit_name, hash});
    if (it == responses_.end()) {
        throw FixtureMiss("no recorded response for unit '" + request.unit_name + "' prompt hash " +
                          hash);
    }
    return ProviderResponse{it->second, "fixture", std::nullopt};
}

// ---- HttpProvider ----

namespace {

struct ParsedUrl {
    std::string scheme, host, path;
    int port;
};

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint is not a URL: " + url);
    out.scheme = url.substr(0, scheme_end);
    if (out.scheme != "http" && out.scheme != "https") {
        throw ConfigError("endpoint scheme must be http or https: " + url);
    }
    size_t host_start = scheme_end + 3;
    size_t path_start = url.find('/', host_start);
    std::string authority = path_start == std::string::npos
                                ? url.substr(host_start)
                                : url.substr(host_start, path_start - host_start);
    out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    size_t colon = authority.rfind(':');
    if (colon == std::string::npos) {
        out.host = authority;
        out.port = out.scheme == "https" ? 443 : 80;
    } else {
        out.host = authority.substr(0, colon);
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("endpoint has an invalid port: " + url);
        }
    }
    if (out.host.empty()) throw ConfigError("endpoint has an empty host: " + url);
    return out;
}

}  // namespace

HttpProvider::HttpProvider(HttpProviderOptions options) : options_(std::move(options)) {
    ParsedUrl url = parse_url(options_.endpoint);
    scheme_ = url.scheme;
    host_ = url.host;
    port_ = url.port;
    path_ = url.path;
    if (scheme_ == "https") {
        throw ConfigError("https endpoints require a TLS build; use an http endpoint or a proxy");
    }
    if (options_.max_in_flight < 1) options_.max_in_flight = 1;
    if (options_.attempts < 1) options_.attempts = 1;
}

ProviderResponse HttpProvider::complete(const ProviderRequest& request) {
    // In-flight slot; released on every exit path.
    std::unique_lock<std::mutex> lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return slots_in_use_ < options_.max_in_flight; });
    ++slots_in_use_;
    lock.unlock();
    struct SlotRelease {
        HttpProvider* self;
        ~SlotRelease() {
            {
                std::lock_guard<std::mutex> guard(self->slots_mutex_);
                --self->slots_in_use_;
            }
            self->slots_cv_.notify_one();
        }
    } release{this};

    nlohmann::ordered_json body;
    body["model"] = options_.model;
    body["messages"] = nlohmann::json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", request.rendered_prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    body["n"] = request.n;
    body["frequency_penalty"] = request.frequency_penalty;
    body["presence_penalty"] = request.presence_penalty;
    const std::string payload = body.dump();

    std::string last_failure = "no attempt made";
    for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
        if (attempt > 1) {
            const int backoff = options_.backoff_base_ms << (attempt - 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
        httplib::Client client(host_, port_);
        client.set_connection_timeout(options_.timeout_seconds, 0);
        client.set_read_timeout(options_.timeout_seconds, 0);
        client.set_write_timeout(options_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!options_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + options_.api_key);
        }
        auto result = client.Post(path_, headers, payload, "application/json");
        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 429 || result->status >= 500) {
            last_failure = "status " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw ProviderUnavailable("endpoint " + options_.endpoint + " answered status " +
                                      std::to_string(result->status));
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception&) {
            last_failure = "unparseable response body";
            continue;
        }
        try {
            ProviderResponse response;
            response.raw_text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
            response.provider_id = options_.model + "@" + host_;
            if (doc.contains("usage") && doc["usage"].is_object()) {
                TokenUsage usage;
                usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0LL);
                usage.completion_tokens = doc["usage"].value("completion_tokens", 0LL);
                usage.total_tokens = doc["usage"].value("total_tokens", 0LL);
                response.usage = usage;
            }
            return response;
        } catch (const nlohmann::json::exception&) {
            last_failure = "response body missing choices[0].message.content";
            continue;
        }
    }
    throw ProviderUnavailable("endpoint " + options_.endpoint + " failed after " +
                              std::to_string(options_.attempts) + " attempts (" + last_failure +
                              ")");
}

// ---- BudgetedProvider ----

BudgetedProvider::BudgetedProvider(Provider& inner, long long budget)
    : inner_(inner), budget_(budget) {}

ProviderResponse BudgetedProvider::complete(const ProviderRequest& request) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (budget_ > 0 && calls_ >= budget_) {
            throw BudgetExceeded("request budget of " + std::to_string(budget_) +
                                 " provider calls exhausted");
        }
        ++calls_;
    }
    return inner_.complete(request);
}

long long BudgetedProvider::calls_made() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

// ---- TracingProvider ----

ProviderResponse TracingProvider::complete(const ProviderRequest& request) {
    ProviderResponse response = inner_.complete(request);
    if (sink_) {
        sink_->push_back(TraceEntry{request.unit_name, source_id_,
                                    digest_hex(request.rendered_prompt), response.raw_text});
    }
    return response;
}

// ---- RecordingProvider ----

RecordingProvider::RecordingProvider(Provider& inner) : inner_(inner) {}

ProviderResponse RecordingProvider::complete(const ProviderRequest& request) {
    ProviderResponse response = inner_.complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    records_.push_back(Record{request.unit_name, digest_hex(request.rendered_prompt),
                              request.rendered_prompt, response.raw_text});
    return response;
}

std::vector<RecordingProvider::Record> RecordingProvider::records() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_;
}

}  // namespace apikg
