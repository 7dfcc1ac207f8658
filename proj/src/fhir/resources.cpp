#include "hadmin/fhir/resources.hpp"

#include "hadmin/core/errors.hpp"

#include <sstream>

namespace hadmin::fhir {

namespace {

const Json& at(const Json& j, const char* key, std::string_view type) {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(std::string(type) + ": missing '" + key + "'");
    return *it;
}

std::string str(const Json& j, const char* key, std::string_view type) {
    const Json& v = at(j, key, type);
    if (!v.is_string()) throw FormatError(std::string(type) + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

bool boolean(const Json& j, const char* key, std::string_view type) {
    auto it = j.find(key);
    if (it == j.end()) return true;
    if (!it->is_boolean()) throw FormatError(std::string(type) + ": '" + key + "' must be a boolean");
    return it->get<bool>();
}

const Json& first(const Json& j, const char* key, std::string_view type) {
    const Json& v = at(j, key, type);
    if (!v.is_array() || v.empty()) throw FormatError(std::string(type) + ": '" + key + "' must be a non-empty list");
    return v[0];
}

void expect_type(const Json& j, std::string_view type) {
    if (!j.is_object() || !j.contains("resourceType") || j["resourceType"] != type) {
        throw FormatError("expected a " + std::string(type) + " resource");
    }
}

std::vector<std::string> strings(const Json& j, const char* key, std::string_view type) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end()) return out;
    if (!it->is_array()) throw FormatError(std::string(type) + ": '" + key + "' must be a list");
    for (const auto& v : *it) out.push_back(v.get<std::string>());
    return out;
}

Json name_json(const HumanName& n) {
    Json j;
    j["family"] = n.family;
    j["given"] = n.given;
    if (!n.prefix.empty()) j["prefix"] = n.prefix;
    return j;
}

HumanName name_from(const Json& j, std::string_view type) {
    HumanName n;
    n.family = str(j, "family", type);
    n.given = strings(j, "given", type);
    n.prefix = strings(j, "prefix", type);
    return n;
}

Json phone_json(const std::string& value, const std::string& use) {
    return Json::array({Json{{"system", "phone"}, {"value", value}, {"use", use}}});
}

int characteristic(const Json& role, const std::string& code) {
    for (const auto& c : at(role, "characteristic", "PractitionerRole")) {
        for (const auto& coding : c.value("coding", Json::array())) {
            if (coding.value("code", "") == code) {
                try {
                    return std::stoi(coding.at("display").get<std::string>());
                } catch (const std::exception&) {
                    throw FormatError("PractitionerRole: characteristic '" + code + "' is not an integer");
                }
            }
        }
    }
    throw FormatError("PractitionerRole: missing characteristic '" + code + "'");
}

} // namespace

HumanName HumanName::split(std::string_view display) {
    std::vector<std::string> words;
    std::istringstream in{std::string(display)};
    for (std::string w; in >> w;) words.push_back(w);
    HumanName n;
    std::size_t i = 0;
    if (!words.empty() && words[0] == "Dr.") {
        n.prefix.push_back(words[0]);
        i = 1;
    }
    if (words.size() > i) {
        n.family = words.back();
        for (std::size_t k = i; k + 1 < words.size(); ++k) n.given.push_back(words[k]);
    }
    return n;
}

std::string HumanName::display() const {
    std::string out;
    auto add = [&](const std::string& w) {
        if (!out.empty()) out += ' ';
        out += w;
    };
    for (const auto& p : prefix) add(p);
    for (const auto& g : given) add(g);
    add(family);
    return out;
}

std::optional<std::string> Appointment::actor_of_type(std::string_view type) const {
    std::string head = std::string(type) + "/";
    for (const auto& p : participants) {
        if (p.reference.rfind(head, 0) == 0) return p.reference;
    }
    return std::nullopt;
}

std::string reference_id(std::string_view reference) {
    auto pos = reference.rfind('/');
    return std::string(pos == std::string_view::npos ? reference : reference.substr(pos + 1));
}

std::string reference_to(std::string_view type, std::string_view id) { return std::string(type) + "/" + std::string(id); }

Json to_json(const Practitioner& r) {
    Json j;
    j["resourceType"] = "Practitioner";
    j["id"] = r.id;
    j["active"] = r.active;
    j["name"] = Json::array({name_json(r.name)});
    j["telecom"] = phone_json(r.phone, "work");
    j["gender"] = r.gender;
    j["birthDate"] = r.birth_date;
    return j;
}

Json to_json(const PractitionerRole& r) {
    Json j;
    j["resourceType"] = "PractitionerRole";
    j["id"] = r.id;
    j["active"] = r.active;
    j["practitioner"] = Json{{"reference", r.practitioner}};
    j["specialty"] = Json::array(
        {Json{{"coding", Json::array({Json{{"code", r.specialty_code}, {"display", r.specialty_display}}})},
              {"text", r.department}}});
    auto ch = [](const char* code, int v) {
        return Json{{"coding", Json::array({Json{{"code", code}, {"display", std::to_string(v)}}})}, {"text", code}};
    };
    j["characteristic"] = Json::array({ch("capacity_per_hour", r.capacity_per_hour), ch("capacity", r.capacity)});
    return j;
}

Json to_json(const Schedule& r) {
    Json j;
    j["resourceType"] = "Schedule";
    j["id"] = r.id;
    j["active"] = r.active;
    j["actor"] = Json::array({Json{{"reference", r.actor}}});
    j["planningHorizon"] = Json{{"start", r.horizon_start}, {"end", r.horizon_end}};
    return j;
}

Json to_json(const Slot& r) {
    Json j;
    j["resourceType"] = "Slot";
    j["id"] = r.id;
    j["schedule"] = Json{{"reference", r.schedule}};
    j["status"] = r.status;
    j["start"] = r.start;
    j["end"] = r.end;
    return j;
}

Json to_json(const Patient& r) {
    Json j;
    j["resourceType"] = "Patient";
    j["id"] = r.id;
    j["identifier"] = Json::array({Json{{"use", r.identifier_use}, {"value", r.identifier}}});
    j["active"] = r.active;
    j["name"] = Json::array({name_json(r.name)});
    j["telecom"] = phone_json(r.phone, r.phone_use);
    j["gender"] = r.gender;
    j["birthDate"] = r.birth_date;
    j["address"] = Json::array({Json{{"use", r.address_use}, {"type", r.address_type}, {"text", r.address}}});
    return j;
}

Json to_json(const Appointment& r) {
    Json j;
    j["resourceType"] = "Appointment";
    j["id"] = r.id;
    j["status"] = r.status;
    j["start"] = r.start;
    j["end"] = r.end;
    Json slots = Json::array();
    for (const auto& s : r.slots) slots.push_back(Json{{"reference", s}});
    j["slot"] = std::move(slots);
    Json parts = Json::array();
    for (const auto& p : r.participants) {
        parts.push_back(Json{{"actor", Json{{"reference", p.reference}, {"display", p.display}}}, {"status", p.status}});
    }
    j["participant"] = std::move(parts);
    return j;
}

Practitioner practitioner_from_json(const Json& j) {
    constexpr std::string_view t = "Practitioner";
    expect_type(j, t);
    Practitioner r;
    r.id = str(j, "id", t);
    r.active = boolean(j, "active", t);
    r.name = name_from(first(j, "name", t), t);
    r.phone = str(first(j, "telecom", t), "value", t);
    r.gender = str(j, "gender", t);
    r.birth_date = str(j, "birthDate", t);
    return r;
}

PractitionerRole practitioner_role_from_json(const Json& j) {
    constexpr std::string_view t = "PractitionerRole";
    expect_type(j, t);
    PractitionerRole r;
    r.id = str(j, "id", t);
    r.active = boolean(j, "active", t);
    r.practitioner = str(at(j, "practitioner", t), "reference", t);
    const Json& spec = first(j, "specialty", t);
    const Json& coding = first(spec, "coding", t);
    r.specialty_code = str(coding, "code", t);
    r.specialty_display = str(coding, "display", t);
    r.department = str(spec, "text", t);
    r.capacity_per_hour = characteristic(j, "capacity_per_hour");
    r.capacity = characteristic(j, "capacity");
    return r;
}

Schedule schedule_from_json(const Json& j) {
    constexpr std::string_view t = "Schedule";
    expect_type(j, t);
    Schedule r;
    r.id = str(j, "id", t);
    r.active = boolean(j, "active", t);
    r.actor = str(first(j, "actor", t), "reference", t);
    const Json& h = at(j, "planningHorizon", t);
    r.horizon_start = str(h, "start", t);
    r.horizon_end = str(h, "end", t);
    return r;
}

Slot slot_from_json(const Json& j) {
    constexpr std::string_view t = "Slot";
    expect_type(j, t);
    Slot r;
    r.id = str(j, "id", t);
    r.schedule = str(at(j, "schedule", t), "reference", t);
    r.status = str(j, "status", t);
    if (r.status != "free" && r.status != "busy") throw FormatError("Slot: status must be free or busy");
    r.start = str(j, "start", t);
    r.end = str(j, "end", t);
    return r;
}

Patient patient_from_json(const Json& j) {
    constexpr std::string_view t = "Patient";
    expect_type(j, t);
    Patient r;
    r.id = str(j, "id", t);
    const Json& ident = first(j, "identifier", t);
    r.identifier_use = str(ident, "use", t);
    r.identifier = str(ident, "value", t);
    r.active = boolean(j, "active", t);
    r.name = name_from(first(j, "name", t), t);
    const Json& tel = first(j, "telecom", t);
    r.phone = str(tel, "value", t);
    r.phone_use = str(tel, "use", t);
    r.gender = str(j, "gender", t);
    r.birth_date = str(j, "birthDate", t);
    const Json& addr = first(j, "address", t);
    r.address_use = str(addr, "use", t);
    r.address_type = str(addr, "type", t);
    r.address = str(addr, "text", t);
    return r;
}

Appointment appointment_from_json(const Json& j) {
    constexpr std::string_view t = "Appointment";
    expect_type(j, t);
    Appointment r;
    r.id = str(j, "id", t);
    r.status = str(j, "status", t);
    r.start = str(j, "start", t);
    r.end = str(j, "end", t);
    for (const auto& s : at(j, "slot", t)) r.slots.push_back(str(s, "reference", t));
    for (const auto& p : at(j, "participant", t)) {
        const Json& actor = at(p, "actor", t);
        r.participants.push_back({str(actor, "reference", t), actor.value("display", ""), p.value("status", "accepted")});
    }
    return r;
}

} // namespace hadmin::fhir
