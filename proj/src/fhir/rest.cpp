#include "hadmin/fhir/rest.hpp"

#include "hadmin/core/errors.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>

namespace hadmin::fhir {

namespace {

constexpr const char* kFhirJson = "application/fhir+json";

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("FHIR base URL needs a scheme: '" + url + "'");
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, ""};
    std::string path = url.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, slash), path};
}

std::string str_or(const Json& j, const char* key) {
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

} // namespace

struct RestStore::Impl {
    RestOptions opt;
    ParsedUrl url;
    httplib::Client client;

    explicit Impl(RestOptions o) : opt(std::move(o)), url(split_url(opt.base_url)), client(url.scheme_host_port) {
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(opt.timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opt.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        client.set_keep_alive(true);
    }

    std::string path(std::string_view type, std::string_view id = {}) const {
        std::string p = url.path + "/" + std::string(type);
        if (!id.empty()) p += "/" + httplib::detail::encode_url(std::string(id));
        return p;
    }

    template <class F>
    httplib::Result attempt(F&& f) {
        httplib::Result r = f();
        for (int i = 0; i < opt.retries && (!r || r->status >= 500); ++i) r = f();
        return r;
    }
};

RestStore::RestStore(RestOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
RestStore::~RestStore() = default;

void RestStore::create(const Json& resource) {
    const std::string type = str_or(resource, "resourceType");
    const std::string id = str_or(resource, "id");
    if (type.empty() || id.empty()) throw FormatError("create needs resourceType and a client-assigned id");
    const std::string body = resource.dump();
    auto r = impl_->client.Post(impl_->path(type), body, kFhirJson);
    if (r && r->status < 300) return;
    if (r && r->status < 500) {
        throw BackendError("POST " + type + " failed with HTTP " + std::to_string(r->status) + ": " + r->body, id);
    }
    // Lost or failed in transit: the id is client-assigned, so a PUT is a safe retry.
    update(resource);
}

void RestStore::update(const Json& resource) {
    const std::string type = str_or(resource, "resourceType");
    const std::string id = str_or(resource, "id");
    if (type.empty() || id.empty()) throw FormatError("update needs resourceType and id");
    const std::string body = resource.dump();
    auto r = impl_->attempt([&] { return impl_->client.Put(impl_->path(type, id), body, kFhirJson); });
    if (!r) throw BackendError("PUT " + type + " failed: " + httplib::to_string(r.error()), id);
    if (r->status >= 300) {
        throw BackendError("PUT " + type + " failed with HTTP " + std::to_string(r->status) + ": " + r->body, id);
    }
}

std::optional<Json> RestStore::read(std::string_view type, std::string_view id) {
    auto r = impl_->attempt([&] { return impl_->client.Get(impl_->path(type, id)); });
    if (!r) throw BackendError("GET failed: " + httplib::to_string(r.error()), std::string(id));
    if (r->status == 404 || r->status == 410) return std::nullopt;
    if (r->status >= 300) throw BackendError("GET failed with HTTP " + std::to_string(r->status), std::string(id));
    try {
        return Json::parse(r->body);
    } catch (const Json::exception& e) {
        throw BackendError(std::string("unparseable resource body: ") + e.what(), std::string(id));
    }
}

bool RestStore::remove(std::string_view type, std::string_view id) {
    auto r = impl_->attempt([&] { return impl_->client.Delete(impl_->path(type, id)); });
    if (!r) throw BackendError("DELETE failed: " + httplib::to_string(r.error()), std::string(id));
    if (r->status == 404 || r->status == 410) return false;
    if (r->status >= 300) throw BackendError("DELETE failed with HTTP " + std::to_string(r->status), std::string(id));
    return true;
}

std::vector<Json> RestStore::search(std::string_view type, const SearchParams& params) {
    std::string query = impl_->path(type) + "?_count=" + std::to_string(impl_->opt.page_size);
    for (const auto& [k, v] : params) {
        query += "&" + httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
    }
    std::vector<Json> out;
    std::string next = query;
    while (!next.empty()) {
        auto r = impl_->attempt([&] { return impl_->client.Get(next); });
        if (!r) throw BackendError("search " + std::string(type) + " failed: " + httplib::to_string(r.error()));
        if (r->status >= 300) {
            throw BackendError("search " + std::string(type) + " failed with HTTP " + std::to_string(r->status));
        }
        Json bundle;
        try {
            bundle = Json::parse(r->body);
        } catch (const Json::exception& e) {
            throw BackendError(std::string("unparseable search bundle: ") + e.what());
        }
        if (bundle.contains("entry")) {
            for (auto& e : bundle["entry"]) {
                if (e.contains("resource")) out.push_back(std::move(e["resource"]));
            }
        }
        next.clear();
        if (bundle.contains("link")) {
            for (const auto& l : bundle["link"]) {
                if (str_or(l, "relation") != "next") continue;
                std::string u = str_or(l, "url");
                auto scheme = u.find("://");
                if (scheme != std::string::npos) {
                    auto slash = u.find('/', scheme + 3);
                    u = slash == std::string::npos ? "/" : u.substr(slash);
                }
                next = u;
            }
        }
    }
    // Servers may page in any order; the store contract is id order.
    std::stable_sort(out.begin(), out.end(),
                     [](const Json& a, const Json& b) { return str_or(a, "id") < str_or(b, "id"); });
    return out;
}

bool RestStore::ping() {
    auto r = impl_->client.Get(impl_->path("Practitioner") + "?_count=1");
    return static_cast<bool>(r);
}

// ---------------------------------------------------------------------------

struct StubFhirServer::Impl {
    httplib::Server server;
    std::atomic<std::size_t> requests{0};
};

StubFhirServer::StubFhirServer(std::string prefix) : impl_(std::make_unique<Impl>()), prefix_(std::move(prefix)) {
    auto& srv = impl_->server;
    const std::string type_re = prefix_ + R"(/([A-Za-z]+))";
    const std::string id_re = type_re + R"(/([^/]+))";

    auto send = [](httplib::Response& res, int status, const Json& body) {
        res.status = status;
        res.set_content(body.dump(), kFhirJson);
    };
    auto outcome = [&send](httplib::Response& res, int status, const std::string& msg) {
        Json o = {{"resourceType", "OperationOutcome"},
                  {"issue", Json::array({Json{{"severity", "error"}, {"code", "processing"}, {"diagnostics", msg}}})}};
        send(res, status, o);
    };
    auto parse_body = [](const httplib::Request& req, const std::string& type, Json& out, std::string& err) {
        try {
            out = Json::parse(req.body);
        } catch (const Json::exception& e) {
            err = e.what();
            return false;
        }
        if (str_or(out, "resourceType") != type) {
            err = "resourceType does not match the endpoint";
            return false;
        }
        return true;
    };

    srv.Post(type_re, [this, send, outcome, parse_body](const httplib::Request& req, httplib::Response& res) {
        ++impl_->requests;
        Json body;
        std::string err;
        if (!parse_body(req, req.matches[1], body, err)) return outcome(res, 400, err);
        if (str_or(body, "id").empty()) return outcome(res, 400, "client-assigned id required");
        store_.create(body);
        res.set_header("Location", req.path + "/" + str_or(body, "id"));
        send(res, 201, body);
    });
    srv.Put(id_re, [this, send, outcome, parse_body](const httplib::Request& req, httplib::Response& res) {
        ++impl_->requests;
        Json body;
        std::string err;
        if (!parse_body(req, req.matches[1], body, err)) return outcome(res, 400, err);
        if (str_or(body, "id") != std::string(req.matches[2])) return outcome(res, 400, "id does not match the URL");
        bool existed = store_.read(std::string(req.matches[1]), std::string(req.matches[2])).has_value();
        store_.update(body);
        send(res, existed ? 200 : 201, body);
    });
    srv.Get(id_re, [this, send, outcome](const httplib::Request& req, httplib::Response& res) {
        ++impl_->requests;
        auto r = store_.read(std::string(req.matches[1]), std::string(req.matches[2]));
        if (!r) return outcome(res, 404, "not found");
        send(res, 200, *r);
    });
    srv.Delete(id_re, [this, outcome](const httplib::Request& req, httplib::Response& res) {
        ++impl_->requests;
        if (!store_.remove(std::string(req.matches[1]), std::string(req.matches[2]))) {
            return outcome(res, 404, "not found");
        }
        res.status = 204;
    });
    srv.Get(type_re, [this, send](const httplib::Request& req, httplib::Response& res) {
        ++impl_->requests;
        const std::string type = req.matches[1];
        SearchParams params;
        std::size_t count = 100, offset = 0;
        for (const auto& [k, v] : req.params) {
            if (k == "_count") {
                count = std::max<std::size_t>(1, std::stoul(v));
            } else if (k == "_offset") {
                offset = std::stoul(v);
            } else {
                params.emplace_back(k, v);
            }
        }
        auto all = store_.search(type, params);
        Json bundle = {{"resourceType", "Bundle"}, {"type", "searchset"}, {"total", all.size()}};
        Json entries = Json::array();
        for (std::size_t i = offset; i < all.size() && i < offset + count; ++i) {
            entries.push_back(Json{{"resource", std::move(all[i])}});
        }
        bundle["entry"] = std::move(entries);
        if (offset + count < all.size()) {
            std::string next = req.path + "?_count=" + std::to_string(count) + "&_offset=" + std::to_string(offset + count);
            for (const auto& [k, v] : params) {
                next += "&" + httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
            }
            bundle["link"] = Json::array({Json{{"relation", "next"}, {"url", next}}});
        }
        send(res, 200, bundle);
    });
}

StubFhirServer::~StubFhirServer() { stop(); }

int StubFhirServer::start(const std::string& host, int port) {
    host_ = host;
    port_ = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (port_ <= 0) throw BackendError("cannot bind stub FHIR server to " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void StubFhirServer::run(const std::string& host, int port) {
    host_ = host;
    port_ = port;
    if (!impl_->server.listen(host, port)) {
        throw BackendError("cannot serve on " + host + ":" + std::to_string(port));
    }
}

void StubFhirServer::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

std::string StubFhirServer::base_url() const {
    return "http://" + host_ + ":" + std::to_string(port_) + prefix_;
}

std::size_t StubFhirServer::request_count() const { return impl_->requests.load(); }

} // namespace hadmin::fhir
