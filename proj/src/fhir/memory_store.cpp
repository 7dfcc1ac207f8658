#include "hadmin/core/errors.hpp"
#include "hadmin/fhir/store.hpp"

#include <mutex>

namespace hadmin::fhir {

namespace {

std::string type_of(const Json& r) {
    if (!r.is_object() || !r.contains("resourceType") || !r["resourceType"].is_string()) {
        throw FormatError("resource without resourceType");
    }
    return r["resourceType"].get<std::string>();
}

std::string id_of(const Json& r) {
    if (!r.contains("id") || !r["id"].is_string() || r["id"].get<std::string>().empty()) {
        throw FormatError("resource without a client-assigned id");
    }
    return r["id"].get<std::string>();
}

bool any_reference(const Json& list, const std::string& value, bool nested_actor) {
    if (!list.is_array()) return false;
    for (const auto& e : list) {
        const Json* ref = &e;
        if (nested_actor) {
            if (!e.contains("actor")) continue;
            ref = &e["actor"];
        }
        if (ref->contains("reference") && (*ref)["reference"] == value) return true;
    }
    return false;
}

// References the secondary index tracks for a resource.
std::vector<std::string> indexed_refs(const std::string& type, const Json& r) {
    std::vector<std::string> out;
    if (type == "Slot" && r.contains("schedule")) {
        out.push_back(r["schedule"].value("reference", ""));
    } else if (type == "Appointment" && r.contains("participant")) {
        for (const auto& p : r["participant"]) {
            if (p.contains("actor")) out.push_back(p["actor"].value("reference", ""));
        }
    }
    return out;
}

} // namespace

bool matches(const Json& r, const SearchParams& params) {
    for (const auto& [key, value] : params) {
        bool ok = false;
        if (key == "_id") {
            ok = r.value("id", "") == value;
        } else if (key == "schedule") {
            ok = r.contains("schedule") && r["schedule"].value("reference", "") == value;
        } else if (key == "actor") {
            ok = (r.contains("actor") && any_reference(r["actor"], value, false)) ||
                 (r.contains("participant") && any_reference(r["participant"], value, true));
        } else if (key == "practitioner") {
            ok = r.contains("practitioner") && r["practitioner"].value("reference", "") == value;
        } else if (key == "slot") {
            ok = r.contains("slot") && any_reference(r["slot"], value, false);
        } else {
            auto it = r.find(key);
            ok = it != r.end() && it->is_string() && it->get<std::string>() == value;
        }
        if (!ok) return false;
    }
    return true;
}

void MemoryStore::index_locked(const std::string& type, const Json& r) {
    for (auto& ref : indexed_refs(type, r)) by_ref_[{type, ref}].insert(r["id"].get<std::string>());
}

void MemoryStore::unindex_locked(const std::string& type, const Json& r) {
    for (auto& ref : indexed_refs(type, r)) {
        auto it = by_ref_.find({type, ref});
        if (it == by_ref_.end()) continue;
        it->second.erase(r["id"].get<std::string>());
        if (it->second.empty()) by_ref_.erase(it);
    }
}

void MemoryStore::upsert_locked(const Json& resource) {
    std::string type = type_of(resource);
    std::string id = id_of(resource);
    auto& bucket = data_[type];
    auto it = bucket.find(id);
    if (it != bucket.end()) {
        unindex_locked(type, it->second);
        it->second = resource;
    } else {
        bucket.emplace(id, resource);
    }
    index_locked(type, resource);
}

void MemoryStore::create(const Json& resource) {
    std::unique_lock lock(mutex_);
    upsert_locked(resource);
}

void MemoryStore::update(const Json& resource) {
    std::unique_lock lock(mutex_);
    upsert_locked(resource);
}

std::optional<Json> MemoryStore::read(std::string_view type, std::string_view id) {
    std::shared_lock lock(mutex_);
    auto t = data_.find(type);
    if (t == data_.end()) return std::nullopt;
    auto it = t->second.find(id);
    if (it == t->second.end()) return std::nullopt;
    return it->second;
}

bool MemoryStore::remove(std::string_view type, std::string_view id) {
    std::unique_lock lock(mutex_);
    auto t = data_.find(type);
    if (t == data_.end()) return false;
    auto it = t->second.find(id);
    if (it == t->second.end()) return false;
    unindex_locked(std::string(type), it->second);
    t->second.erase(it);
    return true;
}

std::vector<Json> MemoryStore::search(std::string_view type, const SearchParams& params) {
    std::shared_lock lock(mutex_);
    std::vector<Json> out;
    auto t = data_.find(type);
    if (t == data_.end()) return out;

    // Narrow through the reference index when possible.
    for (const auto& [key, value] : params) {
        bool indexed = (type == "Slot" && key == "schedule") || (type == "Appointment" && key == "actor");
        if (!indexed) continue;
        auto ids = by_ref_.find({std::string(type), value});
        if (ids == by_ref_.end()) return out;
        for (const auto& id : ids->second) {
            const Json& r = t->second.find(id)->second;
            if (matches(r, params)) out.push_back(r);
        }
        return out;
    }
    for (const auto& [id, r] : t->second) {
        if (matches(r, params)) out.push_back(r);
    }
    return out;
}

std::size_t MemoryStore::size(std::string_view type) const {
    std::shared_lock lock(mutex_);
    auto t = data_.find(type);
    return t == data_.end() ? 0 : t->second.size();
}

std::size_t MemoryStore::size() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& [type, bucket] : data_) n += bucket.size();
    return n;
}

void MemoryStore::clear() {
    std::unique_lock lock(mutex_);
    data_.clear();
    by_ref_.clear();
}

const std::vector<std::string>& resource_types() {
    static const std::vector<std::string> types{"Practitioner", "PractitionerRole", "Schedule",
                                                "Slot",         "Patient",          "Appointment"};
    return types;
}

std::string canonical_dump(ResourceStore& store, const std::vector<std::string>& types) {
    Json out = Json::object();
    for (const auto& type : types) out[type] = store.search(type);
    return out.dump();
}

} // namespace hadmin::fhir
