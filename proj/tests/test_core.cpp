#include "hadmin/core/errors.hpp"
#include "hadmin/core/model.hpp"
#include "hadmin/core/rng.hpp"
#include "hadmin/core/time.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace hadmin;

TEST(TimeSystem, EightHourQuarterDayHas32Slots) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 17.0, 0.25, Date(2025, 3, 17), 7);
    EXPECT_EQ(slots_per_day(ts), 32);
}

TEST(TimeSystem, NineToSixteenHasSlotsFromIntegerDivision) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 18.0, 0.25, Date(2025, 3, 17), 7);
    EXPECT_EQ(slots_per_day(ts), (18 - 9) * 4);
}

TEST(TimeSystem, SingleSlotDay) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 10.0, 1.0, Date(2025, 3, 17), 1);
    EXPECT_EQ(slots_per_day(ts), 1);
}

TEST(TimeSystem, RejectsInvalidGrids) {
    EXPECT_THROW(TimeSystem::from_hours(9.0, 9.0, 0.25, Date(2025, 1, 1), 1), ConfigError);
    EXPECT_THROW(TimeSystem::from_hours(9.0, 10.1, 0.25, Date(2025, 1, 1), 1), ConfigError);
    EXPECT_THROW(TimeSystem::from_hours(9.0, 10.0, 0.4, Date(2025, 1, 1), 1), ConfigError);  // 60 % 24 != 0
    EXPECT_THROW(TimeSystem::from_hours(9.0, 10.0, 0.25, Date(2025, 1, 1), 0), ConfigError);
}

TEST(TimeSystem, SlotCountTimesUnitEqualsSpanExactly) {
    for (int unit : {1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60}) {
        for (int start = 0; start < 12 * 60; start += 60) {
            int end = start + 9 * 60;
            TimeSystem ts(start, end, unit, Date(2025, 1, 1), 1);
            EXPECT_EQ(ts.slots_per_day() * unit, end - start);
        }
    }
}

TEST(Capacity, SlotCountPerConsultation) {
    TimeSystem quarter = TimeSystem::from_hours(9.0, 18.0, 0.25, Date(2025, 3, 17), 7);
    EXPECT_EQ(appointment_slot_count(2, quarter), 2);
    EXPECT_EQ(appointment_slot_count(4, quarter), 1);
    EXPECT_EQ(appointment_slot_count(1, quarter), 4);
    EXPECT_THROW(appointment_slot_count(3, quarter), ConfigError);
    TimeSystem fine = TimeSystem::from_hours(9.0, 18.0, 0.05, Date(2025, 3, 17), 7);
    EXPECT_EQ(appointment_slot_count(20, fine), 1);
}

TEST(Capacity, DurationIdentityHoldsForEveryDivisor) {
    for (int unit : {3, 5, 15, 30, 60}) {
        TimeSystem ts(9 * 60, 18 * 60, unit, Date(2025, 1, 1), 1);
        for (int c = 1; c <= 60 / unit; ++c) {
            if ((60 / unit) % c != 0) {
                EXPECT_FALSE(is_valid_capacity(c, ts));
                continue;
            }
            // slots * capacity * unit minutes = 60 minutes
            EXPECT_EQ(appointment_slot_count(c, ts) * c * unit, 60);
        }
    }
}

TEST(SlotClock, SlotTenAtTenOClockStartIsHalfPastTwelve) {
    TimeSystem ts = TimeSystem::from_hours(10.0, 18.0, 0.25, Date(2025, 3, 22), 7);
    TimePoint t = slot_to_clock({Date(2025, 3, 25), 10}, ts);
    EXPECT_EQ(t.iso_local(), "2025-03-25T12:30:00");
    EXPECT_EQ(t.iso(9 * 60), "2025-03-25T12:30:00+09:00");
    EXPECT_EQ(slot_end_clock({Date(2025, 3, 25), 10}, ts).iso(9 * 60), "2025-03-25T12:45:00+09:00");
}

TEST(SlotClock, IndexZeroIsOpeningTime) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 18.0, 0.25, Date(2025, 3, 17), 3);
    EXPECT_EQ(slot_to_clock({Date(2025, 3, 18), 0}, ts).minute_of_day(), 9 * 60);
}

TEST(SlotClock, RoundTripEveryIndexAndTruncation) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 18.0, 0.25, Date(2025, 3, 17), 2);
    ASSERT_EQ(ts.slots_per_day(), 36);
    for (Date d : ts.dates()) {
        for (int i = 0; i < 36; ++i) {
            SlotRef ref{d, i};
            TimePoint t = slot_to_clock(ref, ts);
            EXPECT_EQ(clock_to_slot(t, ts), ref);
            // Any minute inside the slot maps back to the same slot start.
            EXPECT_EQ(slot_to_clock(clock_to_slot(t.plus_minutes(14), ts), ts), t);
        }
    }
}

TEST(SlotClock, OutOfRangeSignalsRangeError) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 18.0, 0.25, Date(2025, 3, 17), 2);
    EXPECT_THROW(clock_to_slot(TimePoint::at(Date(2025, 3, 17), 8 * 60 + 59), ts), RangeError);
    EXPECT_THROW(clock_to_slot(TimePoint::at(Date(2025, 3, 17), 18 * 60), ts), RangeError);
    EXPECT_THROW(clock_to_slot(TimePoint::at(Date(2025, 3, 19), 10 * 60), ts), RangeError);
    EXPECT_THROW(slot_to_clock({Date(2025, 3, 17), 36}, ts), RangeError);
    EXPECT_THROW(slot_to_clock({Date(2025, 3, 16), 0}, ts), RangeError);
}

TEST(SlotRef, OrderingAgreesWithChronology) {
    TimeSystem ts = TimeSystem::from_hours(9.0, 12.0, 0.5, Date(2025, 3, 17), 3);
    std::vector<SlotRef> refs;
    for (Date d : ts.dates()) {
        for (int i = 0; i < ts.slots_per_day(); ++i) refs.push_back({d, i});
    }
    for (const auto& a : refs) {
        for (const auto& b : refs) {
            EXPECT_EQ(a < b, slot_to_clock(a, ts) < slot_to_clock(b, ts));
        }
    }
}

TEST(TimePoint, ParsesOffsetsIntoLocalTime) {
    TimePoint local = TimePoint::parse_iso("2025-03-25T12:30:00+09:00", 540);
    EXPECT_EQ(local.iso(540), "2025-03-25T12:30:00+09:00");
    EXPECT_EQ(TimePoint::parse_iso("2025-03-25T03:30:00Z", 540), local);
    EXPECT_EQ(TimePoint::parse_iso("2025-03-25T12:30", 540), local);
    EXPECT_THROW(TimePoint::parse_iso("2025-03-25 noon", 540), FormatError);
}

TEST(Date, ParseAndFormat) {
    Date d = Date::parse("2025-09-18");
    EXPECT_EQ(d.str(), "2025-09-18");
    EXPECT_EQ(d.compact(), "20250918");
    EXPECT_EQ(d.plus_days(13).str(), "2025-10-01");
    EXPECT_THROW(Date::parse("2025-02-30"), FormatError);
    EXPECT_THROW(Date::parse("25-02-03"), FormatError);
}

TEST(Identifiers, CompositionRules) {
    EXPECT_EQ(id_fragment("Dr. Lincoln Bendzus"), "Dr.LincolnBendzus");
    EXPECT_EQ(hospital_prefix("hospital_01"), "hospital01");
}

TEST(Departments, NineKnownSpecialties) {
    EXPECT_EQ(department_catalog().size(), 9u);
    EXPECT_TRUE(is_known_department("endocrinology/metabolism"));
    EXPECT_EQ(find_department("endocrinology/metabolism")->code, "IMEND");
    EXPECT_EQ(find_department("endocrinology/metabolism")->subspecialties[1], "Osteoporosis and Metabolic Bone Disease");
    EXPECT_EQ(find_department("allergy")->subspecialties[1], "Food and Drug Allergy");
    EXPECT_FALSE(is_known_department("asthma-clinic"));
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, ChildStreamsIgnoreParentPosition) {
    Rng a(7), b(7);
    for (int i = 0; i < 10; ++i) b.next();
    Rng ca = a.child("physician", 3), cb = b.child("physician", 3);
    EXPECT_EQ(ca.next(), cb.next());
    EXPECT_NE(a.child("physician", 3).next(), a.child("physician", 4).next());
    EXPECT_NE(a.child("patient", 3).next(), a.child("physician", 3).next());
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
    Rng r(1);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 7000; ++i) {
        auto v = r.below(7);
        ASSERT_LT(v, 7u);
        ++counts[v];
    }
    EXPECT_EQ(counts.size(), 7u);
    for (auto [k, n] : counts) EXPECT_NEAR(n, 1000, 150);
}

TEST(Rng, SampleIsDistinct) {
    Rng r(3);
    for (int t = 0; t < 100; ++t) {
        auto s = r.sample(20, 8);
        EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 8u);
        for (auto v : s) EXPECT_LT(v, 20u);
    }
}
