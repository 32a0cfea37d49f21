#include <catch2/catch_amalgamated.hpp>

#include "edr/reconstruct.hpp"

using namespace edr;
using namespace edr::recon;

namespace {

struct Fixture {
    pki::Pki pki{29, 100};
    rec::Recorder recorder;
    crypto::KeyPair vehicle_keys = crypto::keypair_from_seed(crypto::derive_seed(29, "veh"));
    v2x::TicketStore tickets;
    std::uint64_t seq = 0;

    EnrichedRecord record(Tick tick, RecordCategory cat, SourceId source, Bytes payload) {
        EnrichedRecord r;
        r.record_id = RecordId{0x77, seq++};
        r.tick = tick;
        r.wall_time = tick * 100;
        r.source = std::move(source);
        r.category = cat;
        r.consent = ConsentMarker{"veh-a", cat, ConsentState::Granted, 2, 0};
        r.payload = std::move(payload);
        return r;
    }

    access::QueryResult result_over(Tick first, Tick last) {
        access::QueryResult q;
        q.role = access::PartyRole::CompetentAuthority;
        q.purpose = access::Purpose::AccidentInvestigation;
        q.range_first = first;
        q.range_last = last;
        for (const rec::StoredRecord& s : recorder.primary().records) {
            if (s.record.tick >= first && s.record.tick <= last) q.records.push_back(s);
        }
        return q;
    }
};

} // namespace

TEST_CASE("build_timeline returns exactly the windowed records in order") {
    Fixture f;
    EcuId wheel{"veh-a", 0, EcuRole::DataSource};
    EcuId decision{"veh-a", 1, EcuRole::DecisionMaking};
    EcuId actuator{"veh-a", 2, EcuRole::Actuating};

    auto wheel_rec = f.record(99, RecordCategory::VehicleDynamics, SourceId{wheel},
                              payload::wheel_speed(20.0));
    (void)f.recorder.append(wheel_rec);
    (void)f.recorder.append(
        f.record(100, RecordCategory::DecisionTrace, SourceId{decision},
                 payload::decision_trace(payload::DecisionCode::HardBrake,
                                         {wheel_rec.record_id})));
    (void)f.recorder.append(f.record(100, RecordCategory::ActuationCommand, SourceId{actuator},
                                     payload::brake_command(1.0)));
    (void)f.recorder.append(f.record(300, RecordCategory::VehicleDynamics, SourceId{wheel},
                                     payload::wheel_speed(0.0))); // outside window

    auto timeline = build_timeline(f.result_over(0, 400), 100, 50);
    REQUIRE(timeline.ok());
    const EventTimeline& tl = timeline.value();
    REQUIRE(tl.entries.size() == 3);
    CHECK(tl.entries[0].tick == 99);
    CHECK(tl.entries[1].tick == 100);
    CHECK(tl.entries[2].tick == 100);
    CHECK(tl.entries[1].source < tl.entries[2].source);

    // causal link parsed from the decision trace
    REQUIRE(tl.entries[1].causes.size() == 1);
    CHECK(tl.entries[1].causes[0] == wheel_rec.record_id);
}

TEST_CASE("W=0 keeps only event-tick records") {
    Fixture f;
    EcuId wheel{"veh-a", 0, EcuRole::DataSource};
    (void)f.recorder.append(f.record(99, RecordCategory::VehicleDynamics, SourceId{wheel}, {1}));
    (void)f.recorder.append(f.record(100, RecordCategory::VehicleDynamics, SourceId{wheel}, {2}));
    (void)f.recorder.append(f.record(101, RecordCategory::VehicleDynamics, SourceId{wheel}, {3}));
    auto tl = build_timeline(f.result_over(0, 400), 100, 0);
    REQUIRE(tl.ok());
    REQUIRE(tl.value().entries.size() == 1);
    CHECK(tl.value().entries[0].tick == 100);
}

TEST_CASE("windows that escape the covered range are rejected") {
    Fixture f;
    auto past_start = build_timeline(f.result_over(0, 400), 100, 150);
    REQUIRE_FALSE(past_start.ok());
    CHECK(past_start.code() == Errc::WindowNotCovered);

    auto outside_range = build_timeline(f.result_over(50, 120), 100, 30);
    REQUIRE_FALSE(outside_range.ok());
    CHECK(outside_range.code() == Errc::WindowNotCovered);
}

TEST_CASE("verify_provenance is clean on an untampered log") {
    Fixture f;
    EcuId wheel{"veh-a", 0, EcuRole::DataSource};
    for (Tick t = 90; t <= 110; ++t)
        (void)f.recorder.append(
            f.record(t, RecordCategory::VehicleDynamics, SourceId{wheel}, {std::uint8_t(t)}));
    (void)f.recorder.seal_segment(0, 20, f.vehicle_keys.sec);

    auto tl = build_timeline(f.result_over(0, 400), 100, 10);
    REQUIRE(tl.ok());
    EventTimeline timeline = tl.value();
    ProvenanceReport report =
        verify_provenance(timeline, f.recorder.primary(), f.recorder.segments(),
                          f.recorder.genesis(), f.pki.trust(), f.vehicle_keys.pub, f.tickets);
    CHECK(report.chain.ok());
    REQUIRE(report.segments.size() == 1);
    CHECK(report.segments[0].second == rec::SegmentStatus::Valid);
    for (const TimelineEntry& e : timeline.entries)
        CHECK(e.integrity == IntegrityStatus::ChainVerified);
}

TEST_CASE("a tampered record inside the window surfaces as IntegrityFailure") {
    Fixture f;
    EcuId wheel{"veh-a", 0, EcuRole::DataSource};
    for (Tick t = 90; t <= 110; ++t)
        (void)f.recorder.append(
            f.record(t, RecordCategory::VehicleDynamics, SourceId{wheel}, {std::uint8_t(t)}));

    auto tl = build_timeline(f.result_over(0, 400), 100, 10);
    EventTimeline timeline = tl.value();

    f.recorder.damage_primary().records[10].record.payload[0] ^= 0x01; // tick 100

    ProvenanceReport report =
        verify_provenance(timeline, f.recorder.primary(), f.recorder.segments(),
                          f.recorder.genesis(), f.pki.trust(), f.vehicle_keys.pub, f.tickets);
    REQUIRE_FALSE(report.chain.ok());
    CHECK(*report.chain.first_bad == 10);
    std::size_t failures = 0;
    for (const TimelineEntry& e : timeline.entries)
        if (e.integrity == IntegrityStatus::IntegrityFailure) ++failures;
    CHECK(failures == 1);
}

TEST_CASE("tombstoned entries report TombstonePayload") {
    Fixture f;
    rec::RetentionPolicy policy;
    policy.set(RecordCategory::SensorRaw, rec::RetentionRule{true, Tick{2}, {}});
    rec::Recorder recorder(policy);
    EcuId cam{"veh-a", 1, EcuRole::DataSource};
    (void)recorder.append(f.record(100, RecordCategory::SensorRaw, SourceId{cam}, {9}));
    (void)recorder.append(f.record(105, RecordCategory::SensorRaw, SourceId{cam}, {9}));
    recorder.expire(105);

    access::QueryResult q;
    q.range_first = 90;
    q.range_last = 110;
    for (const rec::StoredRecord& s : recorder.primary().records) q.records.push_back(s);
    auto tl = build_timeline(q, 100, 10);
    EventTimeline timeline = tl.value();
    ProvenanceReport report =
        verify_provenance(timeline, recorder.primary(), {}, recorder.genesis(), f.pki.trust(),
                          f.vehicle_keys.pub, f.tickets);
    CHECK(report.chain.ok());
    CHECK(timeline.entries[0].integrity == IntegrityStatus::TombstonePayload);
    CHECK(timeline.entries[1].integrity == IntegrityStatus::ChainVerified);
}

TEST_CASE("remote tickets are re-verified, with post-hoc revocation visible") {
    Fixture f;
    auto e = f.pki.enrol("veh-remote");
    auto pool = f.pki.request_tickets(e.value().credential, 1, 0).value();
    f.tickets.emplace(pool[0].pseudonym, pool[0]);

    (void)f.recorder.append(f.record(100, RecordCategory::V2xInbound,
                                     SourceId{pool[0].pseudonym}, {1, 2, 3}));
    auto tl = build_timeline(f.result_over(50, 150), 100, 5);
    EventTimeline timeline = tl.value();

    SECTION("valid ticket reports Ok") {
        ProvenanceReport report =
            verify_provenance(timeline, f.recorder.primary(), {}, f.recorder.genesis(),
                              f.pki.trust(), f.vehicle_keys.pub, f.tickets);
        CHECK(report.ticket_status.at(pool[0].pseudonym) == "Ok");
    }

    SECTION("post-hoc revocation flips the status") {
        REQUIRE(f.pki.revoke_ticket(pool[0].pseudonym).ok());
        ProvenanceReport report =
            verify_provenance(timeline, f.recorder.primary(), {}, f.recorder.genesis(),
                              f.pki.trust(), f.vehicle_keys.pub, f.tickets);
        CHECK(report.ticket_status.at(pool[0].pseudonym) == "Revoked");
    }

    SECTION("a missing ticket is reported") {
        ProvenanceReport report =
            verify_provenance(timeline, f.recorder.primary(), {}, f.recorder.genesis(),
                              f.pki.trust(), f.vehicle_keys.pub, {});
        CHECK(report.ticket_status.at(pool[0].pseudonym) == "TicketMissing");
    }
}

TEST_CASE("resolution maps timeline pseudonyms under a warrant") {
    Fixture f;
    auto e1 = f.pki.enrol("veh-b");
    auto e2 = f.pki.enrol("veh-c");
    auto p1 = f.pki.request_tickets(e1.value().credential, 1, 0).value()[0];
    auto p2 = f.pki.request_tickets(e2.value().credential, 1, 0).value()[0];

    (void)f.recorder.append(
        f.record(100, RecordCategory::V2xInbound, SourceId{p1.pseudonym}, {1}));
    (void)f.recorder.append(
        f.record(101, RecordCategory::V2xInbound, SourceId{p2.pseudonym}, {2}));

    auto tl = build_timeline(f.result_over(50, 150), 100, 5);
    EventTimeline timeline = tl.value();
    ProvenanceReport report;

    SECTION("both scripted senders resolve") {
        pki::Warrant w = f.pki.issue_warrant({p1.pseudonym, p2.pseudonym});
        REQUIRE(resolve_remote_senders(timeline, f.pki, w, report).ok());
        CHECK(report.resolved.at(p1.pseudonym) == "veh-b");
        CHECK(report.resolved.at(p2.pseudonym) == "veh-c");
        CHECK(f.pki.resolution_audit().size() == 2);
    }

    SECTION("no warrant leaves the timeline unresolved") {
        auto r = resolve_remote_senders(timeline, f.pki, std::nullopt, report);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::NoWarrant);
        CHECK(report.resolved.empty());
    }

    SECTION("out-of-scope warrant is a scope mismatch") {
        pki::Warrant w = f.pki.issue_warrant({p1.pseudonym});
        auto r = resolve_remote_senders(timeline, f.pki, w, report);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::WarrantScopeMismatch);
    }

    SECTION("forged pseudonyms from rejection records are noted, not fatal") {
        (void)f.recorder.append(
            f.record(102, RecordCategory::SystemHealth, SourceId{EcuId{"veh-a", 4, EcuRole::DataCollection}},
                     payload::health_text("v2x-reject reason=UntrustedRoot pseudonym=dead")));
        auto tl2 = build_timeline(f.result_over(50, 150), 100, 5);
        EventTimeline t2 = tl2.value();
        pki::Warrant w = f.pki.issue_warrant({p1.pseudonym, p2.pseudonym, 0xdead});
        REQUIRE(resolve_remote_senders(t2, f.pki, w, report).ok());
        CHECK(report.unresolved.at(0xdead) == "UnknownPseudonym");
        CHECK_FALSE(report.resolved.contains(0xdead));
    }
}

TEST_CASE("report export is deterministic and lists every failure") {
    Fixture f;
    EcuId wheel{"veh-a", 0, EcuRole::DataSource};
    for (Tick t = 95; t <= 105; ++t)
        (void)f.recorder.append(
            f.record(t, RecordCategory::VehicleDynamics, SourceId{wheel}, {std::uint8_t(t)}));
    f.recorder.damage_primary().records[5].record.payload[0] ^= 1;

    auto tl = build_timeline(f.result_over(50, 150), 100, 5);
    EventTimeline timeline = tl.value();
    ProvenanceReport report =
        verify_provenance(timeline, f.recorder.primary(), {}, f.recorder.genesis(), f.pki.trust(),
                          f.vehicle_keys.pub, f.tickets);

    std::string a = export_report(timeline, report);
    std::string b = export_report(timeline, report);
    CHECK(a == b);
    CHECK(a.find("== TIMELINE ==") != std::string::npos);
    CHECK(a.find("== PROVENANCE ==") != std::string::npos);
    CHECK(a.find("== RESOLUTIONS ==") != std::string::npos);
    CHECK(a.find("status=IntegrityFailure") != std::string::npos);
    CHECK(a.find("chain=FirstBadIndex(5)") != std::string::npos);
}

TEST_CASE("an empty timeline exports a minimal valid report") {
    EventTimeline timeline;
    timeline.event_tick = 10;
    timeline.window = 2;
    ProvenanceReport report;
    std::string text = export_report(timeline, report);
    CHECK(text.find("entries=0") != std::string::npos);
    CHECK(text.find("== TIMELINE ==") != std::string::npos);
}
