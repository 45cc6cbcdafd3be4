#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apikg/errors.hpp"

namespace apikg {

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    long long total_tokens = 0;
};

struct ProviderRequest {
    std::string rendered_prompt;
    double temperature = 0.0;  // pinned: deterministic decoding
    int max_tokens = 1024;
    int n = 1;                 // pinned: single sample
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    std::string unit_name;
};

struct ProviderResponse {
    std::string raw_text;
    std::string provider_id;
    std::optional<TokenUsage> usage;
};

// Completion cap per unit. Entity extraction emits short lists; the two
// fusion units return the whole type system with definitions and get the
// large cap; everything else fits comfortably in 1024.
int max_tokens_for_unit(const std::string& unit_name);

ProviderRequest make_request(const std::string& unit_name, std::string rendered_prompt);

// Completion backend. Implementations must be safe to call from several
// workers at once.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderResponse complete(const ProviderRequest& request) = 0;
};

// Replays recorded responses keyed by (unit name, digest of the rendered
// prompt). Immutable after construction. A missing key is fatal — that is
// the point: offline runs either replay exactly or fail loudly.
class FixtureProvider : public Provider {
public:
    // File format: JSON array of {"unit", "prompt_hash", "response"}.
    static FixtureProvider from_file(const std::string& path);
    ProviderResponse complete(const ProviderRequest& request) override;

    void add(const std::string& unit, const std::string& prompt_hash, std::string response);
    // Registers a response for a prompt given in the clear (test helper).
    void add_for_prompt(const std::string& unit, std::string_view rendered_prompt,
                        std::string response);
    size_t size() const { return responses_.size(); }

private:
    std::map<std::pair<std::string, std::string>, std::string> responses_;
};

struct HttpProviderOptions {
    std::string endpoint;      // e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string model;
    std::string api_key;       // usually from APIKG_API_KEY
    int max_in_flight = 4;
    int attempts = 3;          // total tries per request
    int backoff_base_ms = 500; // doubles per retry
    int timeout_seconds = 60;
};

// Chat-completion-style JSON POST client with bounded retries, a hard
// per-call timeout, and an in-flight limit shared by all callers.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderOptions options);
    ProviderResponse complete(const ProviderRequest& request) override;

private:
    HttpProviderOptions options_;
    std::string scheme_, host_, path_;
    int port_ = 0;
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int slots_in_use_ = 0;
};

// Decorator enforcing a total request cap. budget = 0 means unlimited.
// The counter covers dispatched calls: the call that would exceed the
// budget is never forwarded.
class BudgetedProvider : public Provider {
public:
    BudgetedProvider(Provider& inner, long long budget);
    ProviderResponse complete(const ProviderRequest& request) override;
    long long calls_made() const;

private:
    Provider& inner_;
    long long budget_;
    mutable std::mutex mutex_;
    long long calls_ = 0;
};

// One provider invocation, as written to the --trace transcript.
struct TraceEntry {
    std::string unit;
    std::string source_id;  // "*" for corpus-global units
    std::string input_digest;
    std::string output;
};

// Decorator appending a TraceEntry for every forwarded call. The sink is
// borrowed; pass nullptr to make it a transparent pass-through.
class TracingProvider : public Provider {
public:
    TracingProvider(Provider& inner, std::string source_id, std::vector<TraceEntry>* sink)
        : inner_(inner), source_id_(std::move(source_id)), sink_(sink) {}
    ProviderResponse complete(const ProviderRequest& request) override;

private:
    Provider& inner_;
    std::string source_id_;
    std::vector<TraceEntry>* sink_;
};

// Decorator capturing (unit, prompt hash, prompt, response) for every
// forwarded call — this is how shipped fixture files are produced.
class RecordingProvider : public Provider {
public:
    struct Record {
        std::string unit;
        std::string prompt_hash;
        std::string prompt;
        std::string response;
    };

    explicit RecordingProvider(Provider& inner);
    ProviderResponse complete(const ProviderRequest& request) override;
    std::vector<Record> records() const;

private:
    Provider& inner_;
    mutable std::mutex mutex_;
    std::vector<Record> records_;
};

// Runs a request whose raw response must satisfy `parse`. On a
// MalformedOutput the request is retried once with a terse format-only
// reminder appended to the prompt; a second failure propagates.
template <typename T>
T complete_and_parse(Provider& provider, const ProviderRequest& request,
                     const std::function<T(const std::string&)>& parse);

extern const char* const kRepairInstruction;

template <typename T>
T complete_and_parse(Provider& provider, const ProviderRequest& request,
                     const std::function<T(const std::string&)>& parse) {
    ProviderResponse first = provider.complete(request);
    try {
        return parse(first.raw_text);
    } catch (const MalformedOutput&) {
        ProviderRequest repair = request;
        repair.rendered_prompt += kRepairInstruction;
        ProviderResponse second = provider.complete(repair);
        return parse(second.raw_text);
    }
}

}  // namespace apikg
