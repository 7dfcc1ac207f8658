#pragma once

#include "hadmin/fhir/resources.hpp"

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hadmin::fhir {

/// Search parameters as (name, value) pairs, all of which must match.
///   _id          resource id
///   schedule     Slot.schedule.reference
///   actor        Schedule.actor[*] / Appointment.participant[*].actor reference
///   practitioner PractitionerRole.practitioner.reference
///   slot         Appointment.slot[*].reference
///   anything else: equality with a top-level string field (status, gender, ...)
using SearchParams = std::vector<std::pair<std::string, std::string>>;

bool matches(const Json& resource, const SearchParams& params);

/// Storage for FHIR resources keyed by (resourceType, id). Implementations serialize
/// writers; readers may run concurrently between writes.
class ResourceStore {
public:
    virtual ~ResourceStore() = default;

    /// Create with a client-assigned id (POST). Overwrites an existing resource with the
    /// same id, which keeps interrupted uploads resumable.
    virtual void create(const Json& resource) = 0;
    /// Update by id (PUT), creating the resource if absent.
    virtual void update(const Json& resource) = 0;
    virtual std::optional<Json> read(std::string_view type, std::string_view id) = 0;
    /// Returns false if nothing was deleted.
    virtual bool remove(std::string_view type, std::string_view id) = 0;
    /// Matching resources ordered by id.
    virtual std::vector<Json> search(std::string_view type, const SearchParams& params = {}) = 0;
};

class MemoryStore final : public ResourceStore {
public:
    void create(const Json& resource) override;
    void update(const Json& resource) override;
    std::optional<Json> read(std::string_view type, std::string_view id) override;
    bool remove(std::string_view type, std::string_view id) override;
    std::vector<Json> search(std::string_view type, const SearchParams& params = {}) override;

    std::size_t size(std::string_view type) const;
    std::size_t size() const;
    void clear();

private:
    void upsert_locked(const Json& resource);
    void unindex_locked(const std::string& type, const Json& resource);
    void index_locked(const std::string& type, const Json& resource);

    mutable std::shared_mutex mutex_;
    std::map<std::string, std::map<std::string, Json, std::less<>>, std::less<>> data_;
    // (type, reference) -> ids, for Slot.schedule and Appointment actors.
    std::map<std::pair<std::string, std::string>, std::set<std::string>> by_ref_;
};

/// Every resource of the listed types, type by type and id-ordered, as one JSON document.
/// Two stores with identical observable state produce identical strings.
std::string canonical_dump(ResourceStore& store, const std::vector<std::string>& types);

const std::vector<std::string>& resource_types();

} // namespace hadmin::fhir
