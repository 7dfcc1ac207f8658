#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hadmin::fhir {

/// Resources travel as insertion-ordered JSON so the wire layout is stable.
using Json = nlohmann::ordered_json;

struct HumanName {
    std::string family;
    std::vector<std::string> given;
    std::vector<std::string> prefix;

    /// "Dr. Lincoln Bendzus" -> prefix ["Dr."], given ["Lincoln"], family "Bendzus".
    static HumanName split(std::string_view display);
    std::string display() const;
    bool operator==(const HumanName&) const = default;
};

struct Practitioner {
    std::string id;
    bool active = true;
    HumanName name;
    std::string phone;
    std::string gender;
    std::string birth_date;
    bool operator==(const Practitioner&) const = default;
};

struct PractitionerRole {
    std::string id;  // {practitioner id}-role
    bool active = true;
    std::string practitioner;  // "Practitioner/<id>"
    std::string specialty_code;
    std::string specialty_display;
    std::string department;
    int capacity_per_hour = 0;
    int capacity = 0;
    bool operator==(const PractitionerRole&) const = default;
};

struct Schedule {
    std::string id;  // {practitioner id}-schedule
    bool active = true;
    std::string actor;  // "Practitioner/<id>"
    std::string horizon_start;
    std::string horizon_end;
    bool operator==(const Schedule&) const = default;
};

struct Slot {
    std::string id;  // {practitioner id}-{YYYYMMDD}-slot{index}
    std::string schedule;  // "Schedule/<id>"
    std::string status;    // free | busy
    std::string start;
    std::string end;
    bool operator==(const Slot&) const = default;
};

struct Patient {
    std::string id;
    std::string identifier_use = "official";
    std::string identifier;
    bool active = true;
    HumanName name;
    std::string phone;
    std::string phone_use = "mobile";
    std::string gender;
    std::string birth_date;
    std::string address_use = "home";
    std::string address_type = "postal";
    std::string address;
    bool operator==(const Patient&) const = default;
};

struct Participant {
    std::string reference;
    std::string display;
    std::string status = "accepted";
    bool operator==(const Participant&) const = default;
};

struct Appointment {
    std::string id;  // {practitioner id}-{YYYYMMDD}-appn{k}-{j}
    std::string status = "booked";
    std::string start;
    std::string end;
    std::vector<std::string> slots;  // "Slot/<id>"
    std::vector<Participant> participants;

    /// Reference of the first participant whose reference starts with `type` + "/".
    std::optional<std::string> actor_of_type(std::string_view type) const;
    bool operator==(const Appointment&) const = default;
};

Json to_json(const Practitioner& r);
Json to_json(const PractitionerRole& r);
Json to_json(const Schedule& r);
Json to_json(const Slot& r);
Json to_json(const Patient& r);
Json to_json(const Appointment& r);

// Parsers throw FormatError on missing fields or a wrong resourceType.
Practitioner practitioner_from_json(const Json& j);
PractitionerRole practitioner_role_from_json(const Json& j);
Schedule schedule_from_json(const Json& j);
Slot slot_from_json(const Json& j);
Patient patient_from_json(const Json& j);
Appointment appointment_from_json(const Json& j);

/// "Practitioner/abc" -> "abc"; returns the input when it has no slash.
std::string reference_id(std::string_view reference);
std::string reference_to(std::string_view type, std::string_view id);

} // namespace hadmin::fhir
