#include "hadmin/agents/workflows.hpp"

#include "hadmin/agents/prompts.hpp"
#include "hadmin/core/errors.hpp"
#include "hadmin/timeflow/clock.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace hadmin::agents {

namespace {

std::string fold(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string percent(std::pair<long, long> frac) {
    char buf[32];
    double v = frac.second == 0 ? 0.0 : 100.0 * static_cast<double>(frac.first) / static_cast<double>(frac.second);
    std::snprintf(buf, sizeof buf, "%.1f%%", v);
    return buf;
}

bool is_scheduling_tool(std::string_view t) {
    return t == kGetAllTimeTool || t == kDateFilterTool || t == kPhysicianFilterTool;
}

std::string receipt_text(const fhir::BookedAppointment& b, const std::string& department, const TimeSystem& ts) {
    const int s = ts.start_minute() + b.appt.run.first * ts.unit_minutes();
    const int e = s + b.appt.run.length * ts.unit_minutes();
    return "{'patient': '" + b.patient_name + "', 'attending_physician': '" + b.physician_name + "', 'department': '" +
           department + "', 'date': '" + b.appt.run.date.str() + "', 'schedule': [" +
           scheduler::hour_text(minutes_to_hours(s)) + ", " + scheduler::hour_text(minutes_to_hours(e)) + "]}";
}

// Why a proposal cannot be written to the grid as a booking for `department`; empty if it can.
std::string unbookable_reason(const std::optional<scheduler::Proposal>& grid, const fhir::Hospital& hospital,
                              const std::string& department, TimePoint now, const std::string& ignore = {}) {
    if (!grid) return "proposal does not fit the slot grid";
    const Physician& p = hospital.physician(grid->physician_id);
    if (p.department != department) return "physician is not in " + department;
    const SlotRun run = scheduler::to_run(*grid, hospital.time());
    if (run.length != hospital.run_length(p)) return "duration does not match the consultation length";
    if (hospital.start_of(run) <= now) return "start is not after the current time";
    if (!hospital.run_is_free(grid->physician_id, run, ignore)) return "slots are not free";
    return {};
}

} // namespace

std::string_view to_string(SchedulingMode m) { return m == SchedulingMode::tools ? "tools" : "reasoning"; }

SchedulingMode parse_scheduling_mode(std::string_view s) {
    if (s == "tools") return SchedulingMode::tools;
    if (s == "reasoning") return SchedulingMode::reasoning;
    throw ConfigError("unknown scheduling mode '" + std::string(s) + "' (expected tools or reasoning)");
}

bool draw_rejection(Rng& rng, double reject_prob) { return rng.bernoulli(reject_prob); }

std::optional<TaskKind> draw_event(Rng& rng, double p_reschedule, double p_cancel) {
    const double u = rng.uniform01();
    if (u < p_reschedule) return TaskKind::reschedule;
    if (u < p_reschedule + p_cancel) return TaskKind::cancel;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Intake
// ---------------------------------------------------------------------------

IntakeResult run_intake(const PatientProfile& patient, const std::vector<std::string>& departments, StaffAgent& staff,
                        PatientAgent& patient_agent, const WorkflowOptions& options) {
    IntakeResult r;
    r.transcript.kind = TaskKind::intake;
    IntakeContext ctx{&patient, departments, 1, options.max_rounds};
    for (int round = 1; round <= options.max_rounds; ++round) {
        ctx.round = round;
        r.transcript.rounds = round;
        std::string s = staff.intake_turn(ctx, r.transcript);
        auto answer = find_answer_department(s, departments);
        r.transcript.say(Speaker::staff, std::move(s), round);
        if (answer) {
            r.answer_department = answer;
            r.decision_round = round;
            break;
        }
        r.transcript.say(Speaker::patient, patient_agent.intake_reply(ctx, r.transcript), round);
    }
    r.raw_extraction = staff.extract(ctx, r.transcript);
    try {
        r.extracted = parse_extraction(r.raw_extraction);
    } catch (const FormatError& e) {
        r.format_error = e.what();
    }
    return r;
}

std::string scheduling_department(const IntakeResult& intake, const PatientProfile& patient,
                                  const std::vector<std::string>& departments) {
    if (intake.extracted) {
        std::string d = normalize_department(intake.extracted->department, departments);
        if (!d.empty()) return d;
    }
    if (intake.answer_department) return *intake.answer_department;
    return patient.department;
}

// ---------------------------------------------------------------------------
// Proposals
// ---------------------------------------------------------------------------

std::string raw_proposal_text(const RawProposal& p) {
    std::string body;
    for (const auto& name : p.physicians) {
        if (!body.empty()) body += ", ";
        body += "'" + name + "': {'date': '" + p.date + "', 'start': " + scheduler::hour_text(p.start) +
                ", 'end': " + scheduler::hour_text(p.end) + "}";
    }
    return "{'schedule': {" + body + "}}";
}

RawProposal to_raw(const scheduler::Proposal& p) {
    return RawProposal{{p.physician_name}, p.date.str(), p.start_hour(), p.end_hour()};
}

std::optional<scheduler::Proposal> to_grid(const RawProposal& p, const fhir::Hospital& hospital) {
    if (p.physicians.size() != 1) return std::nullopt;
    const Physician* doc = hospital.physician_by_name(p.physicians.front());
    if (!doc) return std::nullopt;
    Date d;
    try {
        d = Date::parse(p.date);
    } catch (const FormatError&) {
        return std::nullopt;
    }
    const TimeSystem& ts = hospital.time();
    int s = 0;
    int e = 0;
    if (!try_hours_to_minutes(p.start, s) || !try_hours_to_minutes(p.end, e)) return std::nullopt;
    if (!ts.in_horizon(d) || s < ts.start_minute() || e > ts.end_minute() || e <= s) return std::nullopt;
    if ((s - ts.start_minute()) % ts.unit_minutes() != 0 || (e - s) % ts.unit_minutes() != 0) return std::nullopt;
    return scheduler::Proposal{doc->id, doc->name, d, s, e};
}

std::string_view tool_for(Preference p) {
    switch (p) {
    case Preference::physician: return kPhysicianFilterTool;
    case Preference::date: return kDateFilterTool;
    case Preference::asap: break;
    }
    return kGetAllTimeTool;
}

std::pair<std::string, std::string> reasoning_prompts(const fhir::Hospital& hospital, const std::string& department,
                                                      const std::string& utterance, TimePoint now, bool rescheduling,
                                                      const std::optional<std::string>& only_physician_id,
                                                      const std::string& ignore_appointment,
                                                      const PromptLibrary& lib) {
    const TimeSystem& ts = hospital.time();
    nlohmann::ordered_json doctors = nlohmann::ordered_json::object();
    for (const Physician* p : hospital.physicians_in(department)) {
        if (only_physician_id && p->id != *only_physician_id) continue;
        nlohmann::ordered_json schedule = nlohmann::ordered_json::object();
        for (Date d : p->working_days) {
            if (d < now.date()) continue;
            std::vector<SlotStatus> day(static_cast<std::size_t>(ts.slots_per_day()), SlotStatus::free);
            for (int i = 0; i < ts.slots_per_day(); ++i) {
                const bool past = TimePoint::at(d, ts.start_minute() + i * ts.unit_minutes()) <= now;
                const auto* own = hospital.owner(p->id, d, i);
                const bool held = hospital.is_busy(p->id, d, i) &&
                                  !(own && !ignore_appointment.empty() && own->appt.id == ignore_appointment);
                if (past || held) day[static_cast<std::size_t>(i)] = SlotStatus::busy;
            }
            nlohmann::ordered_json intervals = nlohmann::ordered_json::array();
            for (auto [s, e] : synth::busy_intervals(day, ts)) {
                intervals.push_back({minutes_to_hours(s), minutes_to_hours(e)});
            }
            schedule[d.str()] = std::move(intervals);
        }
        nlohmann::ordered_json doc;
        doc["department"] = p->department;
        doc["workload"] = percent(hospital.workload(p->id, now));
        doc["outpatient_duration"] = 1.0 / p->capacity_per_hour;
        doc["schedule"] = std::move(schedule);
        doctors[p->name] = std::move(doc);
    }
    Vars vars{
        {"START_HOUR", scheduler::hour_text(ts.start_hour())},
        {"END_HOUR", scheduler::hour_text(ts.end_hour())},
        {"TIME_UNIT", scheduler::hour_text(ts.time_unit())},
        {"CURRENT_TIME", now.iso_local()},
        {"DEPARTMENT", department},
        {"PREFERENCE", utterance},
        {"RESCHEDULING_FLAG", rescheduling ? "true" : "false"},
        {"DAY", std::to_string(ts.days())},
        {"DOCTOR", doctors.dump(2)},
        {"SCHEDULING_RULES", lib.text("scheduling_rules")},
    };
    return {lib.text("schedule_staff_system"), render(lib.text("schedule_staff_user"), vars)};
}

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

scheduler::SchedulingRequest ground_truth_request(const PatientProfile& patient, const std::string& department,
                                                  Preference pref, TimePoint now) {
    scheduler::SchedulingRequest req;
    req.department = department;
    req.mode = pref;
    req.not_before = now;
    if (pref == Preference::physician) req.preferred_physician = patient.preferred_physician;
    if (pref == Preference::date) req.valid_from = patient.valid_from;
    return req;
}

SchedulingResult run_scheduling(const PatientProfile& patient, const std::string& department,
                                fhir::Hospital& hospital, TimePoint now, StaffAgent& staff,
                                PatientAgent& patient_agent, Rng& rng, const WorkflowOptions& options,
                                const SchedulingHook& before_commit) {
    SchedulingResult r;
    r.department = department;
    Transcript& t = r.transcript;
    t.kind = TaskKind::scheduling;

    Preference active = patient.preference_primary;
    PreferenceContext pctx{&patient, department, active, std::nullopt};
    int round = 1;
    t.say(Speaker::staff, std::string(lines::kAskPreference), round);
    t.say(Speaker::patient, patient_agent.state_preference(pctx, t), round);

    auto fallback = [&]() -> std::optional<RawProposal> {
        r.used_fallback = true;
        const Turn* last = t.last(Speaker::patient);
        const std::string utterance = last ? last->text : std::string();
        auto [sys, user] = reasoning_prompts(hospital, department, utterance, now, false);
        ReasoningContext rc{sys, user, utterance, false, department, now, &hospital, std::nullopt, std::nullopt, {}};
        return parse_schedule_answer(staff.reason(rc));
    };

    bool done = false;
    while (!done) {
        std::optional<RawProposal> answer;
        bool from_fallback = false;
        try {
            if (options.mode == SchedulingMode::reasoning) {
                answer = fallback();
                from_fallback = true;
            } else {
                Dispatch d = interpret(staff.dispatch(t), &t.notes);
                if (auto* q = std::get_if<Clarify>(&d)) {
                    if (++round > options.max_rounds) break;
                    t.say(Speaker::staff, q->question, round);
                    pctx.preference = active;
                    t.say(Speaker::patient, patient_agent.state_preference(pctx, t), round);
                    continue;
                }
                bool tool_done = false;
                if (auto* call = std::get_if<ToolCall>(&d)) {
                    ToolEvent ev{round, *call, false, {}};
                    if (call->tool != tool_for(active)) r.wrong_tool = true;
                    if (is_scheduling_tool(call->tool)) {
                        scheduler::SchedulingRequest req;
                        req.department = department;
                        req.not_before = now;
                        try {
                            if (call->tool == kPhysicianFilterTool) {
                                req.mode = Preference::physician;
                                req.preferred_physician = call->arg("preferred_doctor");
                            } else if (call->tool == kDateFilterTool) {
                                req.mode = Preference::date;
                                req.valid_from = Date::parse(call->arg("date"));
                            }
                            auto p = scheduler::find_earliest(req, hospital);
                            ev.ok = true;
                            if (p) {
                                answer = to_raw(*p);
                                ev.result = scheduler::proposal_text(*p);
                            } else {
                                ev.result = "no availability";
                            }
                            tool_done = true;
                        } catch (const Error& e) {
                            ev.result = e.what();
                        }
                    } else {
                        ev.result = "tool does not apply to new appointments";
                    }
                    t.tools.push_back(std::move(ev));
                }
                if (!tool_done) {
                    answer = fallback();
                    from_fallback = true;
                }
            }
        } catch (const FormatError& e) {
            r.format_ok = false;
            r.format_error = e.what();
            r.completed = true;
            break;
        }

        if (!answer) {
            t.say(Speaker::staff, std::string(lines::kNoTimes), ++round);
            r.claimed_none = true;
            r.completed = true;
            break;
        }
        ++round;
        t.say(Speaker::staff, "How about this schedule: " + raw_proposal_text(*answer), round);
        if (!r.rejected && patient.preference_secondary != active && draw_rejection(rng, options.reject_prob)) {
            r.rejected = true;
            pctx.rejected = active;
            active = patient.preference_secondary;
            pctx.preference = active;
            t.say(Speaker::patient, patient_agent.state_preference(pctx, t), round);
            pctx.rejected.reset();
            if (round >= options.max_rounds) break;
            continue;
        }
        t.say(Speaker::patient, std::string(lines::kThanks), round);
        r.proposal = answer;
        r.final_from_fallback = from_fallback;
        r.completed = true;
        done = true;
    }
    t.rounds = std::min(round, options.max_rounds);
    r.final_preference = active;
    r.request = ground_truth_request(patient, department, active, now);

    if (before_commit) before_commit(r);
    if (r.proposal) {
        auto grid = to_grid(*r.proposal, hospital);
        std::string why;
        try {
            why = unbookable_reason(grid, hospital, department, now);
            if (why.empty()) {
                r.appointment_id = hospital.book(patient, grid->physician_id, scheduler::to_run(*grid, hospital.time()))
                                       .appt.id;
            }
        } catch (const Error& e) {
            why = e.what();
        }
        r.booking_error = why;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

EventResult run_event(TaskKind kind, const std::string& target_appointment_id, fhir::Hospital& hospital,
                      TimePoint now, StaffAgent& staff, PatientAgent& patient_agent, const WorkflowOptions& options) {
    const fhir::BookedAppointment* target = hospital.find(target_appointment_id);
    if (!target) throw NotFound("appointment '" + target_appointment_id + "'");
    const TimeSystem& ts = hospital.time();
    const Physician& doc = hospital.physician(target->appt.physician_id);

    EventResult r;
    r.kind = kind;
    r.target_id = target_appointment_id;
    Transcript& t = r.transcript;
    t.kind = kind;
    EventContext ectx{kind, target->patient_name, target->physician_name, doc.department, target->appt.run.date,
                      ts.start_minute() + target->appt.run.first * ts.unit_minutes()};
    if (kind == TaskKind::reschedule) r.request = scheduler::move_earlier_request(hospital, *target, now);

    int round = 1;
    t.say(Speaker::staff, std::string(lines::kEventGreeting), round);
    t.say(Speaker::patient, patient_agent.event_reply(ectx, t), round);

    std::optional<ToolCall> call;
    while (!call) {
        Dispatch d = interpret(staff.dispatch(t), &t.notes);
        if (auto* q = std::get_if<Clarify>(&d)) {
            if (++round > options.max_rounds) break;
            t.say(Speaker::staff, q->question, round);
            t.say(Speaker::patient, patient_agent.event_reply(ectx, t), round);
            continue;
        }
        if (auto* c = std::get_if<ToolCall>(&d)) {
            call = *c;
        } else {
            t.notes.push_back("no tool call for an appointment change");
        }
        break;
    }
    t.rounds = std::min(round, options.max_rounds);
    if (!call) return r;

    ToolEvent ev{round, *call, false, {}};
    auto finish = [&](std::string staff_line) {
        t.tools.push_back(ev);
        ++round;
        t.rounds = std::min(round, options.max_rounds + 1);
        t.say(Speaker::staff, std::move(staff_line), round);
        t.say(Speaker::patient, std::string(lines::kThanks), round);
    };

    if (call->tool != kCancelTool && call->tool != kRescheduleTool) {
        ev.result = "tool does not apply to existing appointments";
        finish("I could not find a way to change that appointment.");
        return r;
    }
    const fhir::BookedAppointment* found = nullptr;
    try {
        const Date date = Date::parse(call->arg("date"));
        for (const auto* b : hospital.appointments()) {
            if (b->appt.status == AppointmentStatus::cancelled || b->appt.run.date != date) continue;
            if (fold(b->patient_name) == fold(call->arg("patient_name")) &&
                fold(b->physician_name) == fold(call->arg("doctor_name"))) {
                found = b;
                break;
            }
        }
    } catch (const FormatError& e) {
        ev.result = e.what();
    }
    if (!found || !timeflow::can_modify(*found, hospital, now)) {
        if (ev.result.empty()) ev.result = "no modifiable appointment matches";
        finish("I'm sorry, I could not find that appointment.");
        return r;
    }
    r.retrieved_id = found->appt.id;
    r.action = call->tool;
    const std::string found_id = found->appt.id;
    const Physician& fdoc = hospital.physician(found->appt.physician_id);

    if (call->tool == kCancelTool) {
        const std::string receipt = receipt_text(*found, fdoc.department, ts);
        auto c = scheduler::cancel(hospital, found->appt.patient_id, found->appt.physician_id, found->appt.run.date, now);
        r.reassignments = c.reassignments;
        ev.ok = true;
        ev.result = "cancelled " + c.appointment_id;
        finish("I've cancelled this schedule: " + receipt);
        return r;
    }

    const auto req = scheduler::move_earlier_request(hospital, *found, now);
    std::optional<scheduler::Proposal> proposal;
    try {
        if (options.mode == SchedulingMode::tools) {
            proposal = scheduler::find_earliest(req, hospital);
        } else {
            r.used_fallback = true;
            const std::string utterance = t.utterances(Speaker::patient).front();
            auto [sys, user] = reasoning_prompts(hospital, fdoc.department, utterance, now, true,
                                                 found->appt.physician_id, found_id);
            ReasoningContext rc{sys, user, utterance, true, fdoc.department, now, &hospital,
                                found->appt.physician_id, req.before, found_id};
            if (auto raw = parse_schedule_answer(staff.reason(rc))) {
                r.proposal = raw;
                proposal = to_grid(*raw, hospital);
                if (!proposal) {
                    r.booking_error = "proposal does not fit the slot grid";
                    ev.result = r.booking_error;
                    finish("How about this schedule: " + raw_proposal_text(*raw));
                    return r;
                }
            }
        }
    } catch (const FormatError& e) {
        r.format_ok = false;
        r.format_error = e.what();
        ev.result = e.what();
        t.tools.push_back(ev);
        return r;
    }

    // An answer that is not earlier than the current booking leaves nothing to move to.
    if (proposal && proposal->physician_id == found->appt.physician_id &&
        hospital.start_of(scheduler::to_run(*proposal, ts)) >= *req.before) {
        proposal.reset();
    }
    if (proposal) {
        if (!r.proposal) r.proposal = to_raw(*proposal);
        std::string why = unbookable_reason(proposal, hospital, fdoc.department, now, found_id);
        if (why.empty() && proposal->physician_id != found->appt.physician_id) why = "physician differs";
        if (why.empty() && hospital.start_of(scheduler::to_run(*proposal, ts)) >= *req.before) {
            why = "not earlier than the current appointment";
        }
        if (!why.empty()) {
            r.booking_error = why;
            ev.result = why;
            finish("How about this schedule: " + raw_proposal_text(*r.proposal));
            return r;
        }
        const std::string before_text = receipt_text(*found, fdoc.department, ts);
        scheduler::apply_move(hospital, found_id, *proposal);
        r.moved = true;
        ev.ok = true;
        ev.result = scheduler::proposal_text(*proposal);
        finish("I've moved this schedule: " + before_text + " to " + raw_proposal_text(*r.proposal));
        return r;
    }
    r.claimed_none = true;
    const std::string receipt = receipt_text(*found, fdoc.department, ts);
    scheduler::enqueue_waiting(hospital, found_id);
    r.waitlisted = true;
    ev.ok = true;
    ev.result = "waitlisted";
    finish(std::string(lines::kNoTimes) + " I've added this schedule to the waiting list: " + receipt);
    return r;
}

} // namespace hadmin::agents
