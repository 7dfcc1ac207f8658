#pragma once

#include "hadmin/fhir/store.hpp"

#include <chrono>
#include <memory>
#include <string>
#include <thread>

namespace hadmin::fhir {

struct RestOptions {
    std::string base_url;  // e.g. "http://127.0.0.1:8080/fhir"
    std::chrono::milliseconds timeout{10000};
    int retries = 2;
    int page_size = 500;
};

/// FHIR REST client: create = POST [type], update = PUT [type]/[id], read = GET, delete =
/// DELETE, search = GET [type]?params with Bundle paging. A create whose POST failed in
/// transit is retried as PUT by its client-assigned id. Failures raise BackendError carrying
/// the resource id.
class RestStore final : public ResourceStore {
public:
    explicit RestStore(RestOptions options);
    ~RestStore() override;

    void create(const Json& resource) override;
    void update(const Json& resource) override;
    std::optional<Json> read(std::string_view type, std::string_view id) override;
    bool remove(std::string_view type, std::string_view id) override;
    std::vector<Json> search(std::string_view type, const SearchParams& params = {}) override;

    /// GET [base]/metadata-free liveness probe: true if the server answers at all.
    bool ping();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Minimal FHIR server over a MemoryStore for tests and local runs. Honors client ids on
/// POST, answers searches with paged searchset Bundles.
class StubFhirServer {
public:
    explicit StubFhirServer(std::string prefix = "/fhir");
    ~StubFhirServer();
    StubFhirServer(const StubFhirServer&) = delete;
    StubFhirServer& operator=(const StubFhirServer&) = delete;

    /// Binds to `host`:`port` (0 = any free port) and serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Serves on the calling thread until stop() is called from elsewhere.
    void run(const std::string& host, int port);
    void stop();

    std::string base_url() const;
    MemoryStore& backing() { return store_; }
    std::size_t request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    MemoryStore store_;
    std::string prefix_;
    std::string host_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace hadmin::fhir
