#include <catch2/catch_amalgamated.hpp>

#include "edr/access.hpp"

using namespace edr;
using namespace edr::access;

namespace {

struct Fixture {
    AccessPolicy policy = default_policy();
    CredentialIssuer issuer{21};
    ConsentRegistry registry;
    Enricher enricher{"veh-a", "veh-a", default_message_types(), ScenarioClock{0, 100}};
    rec::Recorder recorder;
    EcuId edr_node{"veh-a", 4, EcuRole::DataCollection};

    Fixture() { registry.register_subject("veh-a", 0); }

    EnrichedRecord record(Tick tick, RecordCategory cat, ConsentState consent,
                          SourceId source = EcuId{"veh-a", 0, EcuRole::DataSource},
                          Bytes payload = {1, 2}) {
        EnrichedRecord r;
        r.record_id = RecordId{1, next_seq++};
        r.tick = tick;
        r.wall_time = tick * 100;
        r.source = std::move(source);
        r.category = cat;
        r.consent = ConsentMarker{"veh-a", cat, consent, 1, 0};
        r.payload = std::move(payload);
        return r;
    }

    QueryRequest request(PartyRole role, Purpose purpose, AccessChannel channel,
                         std::set<RecordCategory> cats, Tick first = 0, Tick last = 1000) {
        QueryRequest q;
        q.credential = issuer.issue("requester-1", role);
        q.channel = channel;
        q.range_first = first;
        q.range_last = last;
        q.categories = std::move(cats);
        q.purpose = purpose;
        return q;
    }

    std::uint64_t next_seq = 0;
};

} // namespace

TEST_CASE("decide: consent gates service providers") {
    Fixture f;
    CHECK(decide(f.policy, PartyRole::ServiceProvider, RecordCategory::SensorRaw,
                 Purpose::ServiceProvision, AccessChannel::Server,
                 ConsentState::Denied) == DecideOutcome::DeniedNoConsent);
    CHECK(decide(f.policy, PartyRole::ServiceProvider, RecordCategory::SensorRaw,
                 Purpose::ServiceProvision, AccessChannel::Server,
                 ConsentState::Granted) == DecideOutcome::Allowed);
}

TEST_CASE("decide: regulated purpose overrides consent for the competent authority only") {
    Fixture f;
    CHECK(decide(f.policy, PartyRole::CompetentAuthority, RecordCategory::DecisionTrace,
                 Purpose::AccidentInvestigation, AccessChannel::Server,
                 ConsentState::Denied) == DecideOutcome::Allowed);
    CHECK(decide(f.policy, PartyRole::VehicleManufacturer, RecordCategory::DecisionTrace,
                 Purpose::AccidentInvestigation, AccessChannel::Server,
                 ConsentState::Denied) == DecideOutcome::DeniedNoRule);
}

TEST_CASE("decide: the OBD channel is restricted to diagnostics-grade categories") {
    Fixture f;
    CHECK(decide(f.policy, PartyRole::RepairShop, RecordCategory::VehicleDynamics, Purpose::Repair,
                 AccessChannel::Obd, ConsentState::Granted) == DecideOutcome::DeniedChannel);
    CHECK(decide(f.policy, PartyRole::RepairShop, RecordCategory::Diagnostic, Purpose::Repair,
                 AccessChannel::Obd, ConsentState::Denied) == DecideOutcome::Allowed);
    // even the competent authority cannot pull dynamics over OBD
    CHECK(decide(f.policy, PartyRole::CompetentAuthority, RecordCategory::VehicleDynamics,
                 Purpose::AccidentInvestigation, AccessChannel::Obd,
                 ConsentState::Granted) == DecideOutcome::DeniedChannel);
}

TEST_CASE("decisions never depend on requester identity") {
    Fixture f;
    for (std::uint8_t role = 0; role < kRoleCount; ++role) {
        for (std::uint8_t cat = 0; cat < kCategoryCount; ++cat) {
            for (std::uint8_t purpose = 0; purpose < kPurposeCount; ++purpose) {
                for (std::uint8_t ch = 0; ch < kChannelCount; ++ch) {
                    QueryRequest a = f.request(static_cast<PartyRole>(role),
                                               static_cast<Purpose>(purpose),
                                               static_cast<AccessChannel>(ch),
                                               {static_cast<RecordCategory>(cat)});
                    QueryRequest b = a;
                    b.credential = f.issuer.issue("completely-different-requester",
                                                  static_cast<PartyRole>(role));
                    auto pa = authorize(f.policy, a, f.issuer);
                    auto pb = authorize(f.policy, b, f.issuer);
                    REQUIRE(pa.ok());
                    REQUIRE(pb.ok());
                    CHECK(pa.value().granted == pb.value().granted);
                    CHECK(pa.value().denials == pb.value().denials);
                }
            }
        }
    }
}

TEST_CASE("authorize rejects forged credentials and malformed requests") {
    Fixture f;
    QueryRequest q = f.request(PartyRole::DataSubject, Purpose::Research, AccessChannel::Server,
                               {RecordCategory::VehicleDynamics});
    q.credential.role = PartyRole::CompetentAuthority; // role swap breaks the tag
    auto r = authorize(f.policy, q, f.issuer);
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Errc::BadCredential);

    QueryRequest empty_cats = f.request(PartyRole::DataSubject, Purpose::Research,
                                        AccessChannel::Server, {});
    CHECK(authorize(f.policy, empty_cats, f.issuer).code() == Errc::BadRequest);

    QueryRequest inverted = f.request(PartyRole::DataSubject, Purpose::Research,
                                      AccessChannel::Server, {RecordCategory::VehicleDynamics},
                                      10, 5);
    CHECK(authorize(f.policy, inverted, f.issuer).code() == Errc::BadRequest);
}

TEST_CASE("execute_query equals a brute-force scan") {
    Fixture f;
    crypto::Rng rng(31);
    rec::LogCopy log;
    rec::Recorder recorder;
    for (int i = 0; i < 500; ++i) {
        auto cat = static_cast<RecordCategory>(rng.below(kCategoryCount));
        auto consent = rng.below(2) ? ConsentState::Granted : ConsentState::Denied;
        (void)recorder.append(f.record(rng.below(200), cat, consent));
    }
    log = recorder.primary();

    QueryRequest q = f.request(PartyRole::ServiceProvider, Purpose::ServiceProvision,
                               AccessChannel::Server,
                               {RecordCategory::VehicleDynamics, RecordCategory::SensorRaw}, 20,
                               120);
    Permit permit = authorize(f.policy, q, f.issuer).value();
    QueryResult result = execute_query(log, permit, q);

    // Oracle: independent scan with the same predicate.
    std::size_t expected = 0;
    for (const rec::StoredRecord& s : log.records) {
        const EnrichedRecord& r = s.record;
        if (r.tick < 20 || r.tick > 120) continue;
        if (r.category != RecordCategory::VehicleDynamics &&
            r.category != RecordCategory::SensorRaw)
            continue;
        if (r.consent.state != ConsentState::Granted) continue;
        ++expected;
    }
    CHECK(result.records.size() == expected);
    // every returned record passed authorization
    for (const rec::StoredRecord& s : result.records)
        CHECK(s.record.consent.state == ConsentState::Granted);
}

TEST_CASE("requested-but-withheld categories carry denial reasons") {
    Fixture f;
    QueryRequest q = f.request(PartyRole::RepairShop, Purpose::Repair, AccessChannel::Obd,
                               {RecordCategory::Diagnostic, RecordCategory::VehicleDynamics});
    Permit permit = authorize(f.policy, q, f.issuer).value();
    QueryResult result = execute_query(rec::LogCopy{}, permit, q);
    REQUIRE(result.denials.size() == 1);
    CHECK(result.denials.at(RecordCategory::VehicleDynamics) == DenyReason::ChannelRestricted);
}

TEST_CASE("redaction aliases remote pseudonyms per query") {
    Fixture f;
    rec::Recorder recorder;
    (void)recorder.append(f.record(1, RecordCategory::V2xInbound, ConsentState::Granted,
                                   SourceId{PseudonymId{0xaaaa}}));
    (void)recorder.append(f.record(2, RecordCategory::V2xInbound, ConsentState::Granted,
                                   SourceId{PseudonymId{0xbbbb}}));
    (void)recorder.append(f.record(3, RecordCategory::V2xInbound, ConsentState::Granted,
                                   SourceId{PseudonymId{0xaaaa}}));

    QueryRequest q = f.request(PartyRole::ServiceProvider, Purpose::ServiceProvision,
                               AccessChannel::Server, {RecordCategory::V2xInbound});
    Permit permit = authorize(f.policy, q, f.issuer).value();
    QueryResult result = execute_query(recorder.primary(), permit, q);
    REQUIRE(result.records.size() == 3);

    // stable within the query: same station, same alias
    CHECK(result.records[0].record.source == SourceId{AliasRef{0}});
    CHECK(result.records[1].record.source == SourceId{AliasRef{1}});
    CHECK(result.records[2].record.source == SourceId{AliasRef{0}});

    // the competent authority sees raw pseudonyms
    QueryRequest ca = f.request(PartyRole::CompetentAuthority, Purpose::AccidentInvestigation,
                                AccessChannel::Server, {RecordCategory::V2xInbound});
    QueryResult ca_result =
        execute_query(recorder.primary(), authorize(f.policy, ca, f.issuer).value(), ca);
    REQUIRE(ca_result.records.size() == 3);
    CHECK(ca_result.records[0].record.source == SourceId{PseudonymId{0xaaaa}});
}

TEST_CASE("own-vehicle ECU identifiers survive redaction") {
    Fixture f;
    rec::Recorder recorder;
    EcuId ecu{"veh-a", 2, EcuRole::DataSource};
    (void)recorder.append(
        f.record(1, RecordCategory::VehicleDynamics, ConsentState::Granted, SourceId{ecu}));
    QueryRequest q = f.request(PartyRole::ServiceProvider, Purpose::ServiceProvision,
                               AccessChannel::Server, {RecordCategory::VehicleDynamics});
    QueryResult result =
        execute_query(recorder.primary(), authorize(f.policy, q, f.issuer).value(), q);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].record.source == SourceId{ecu});
}

TEST_CASE("aliases do not link across queries") {
    // Same remote station in two separate queries must not be correlatable:
    // alias indices are assigned per query in first-seen order.
    Fixture f;
    rec::Recorder recorder;
    (void)recorder.append(f.record(1, RecordCategory::V2xInbound, ConsentState::Granted,
                                   SourceId{PseudonymId{0xaaaa}}));
    (void)recorder.append(f.record(2, RecordCategory::V2xInbound, ConsentState::Granted,
                                   SourceId{PseudonymId{0xbbbb}}));

    QueryRequest q1 = f.request(PartyRole::ServiceProvider, Purpose::ServiceProvision,
                                AccessChannel::Server, {RecordCategory::V2xInbound}, 0, 1000);
    QueryRequest q2 = f.request(PartyRole::ServiceProvider, Purpose::ServiceProvision,
                                AccessChannel::Server, {RecordCategory::V2xInbound}, 2, 1000);
    QueryResult r1 =
        execute_query(recorder.primary(), authorize(f.policy, q1, f.issuer).value(), q1);
    QueryResult r2 =
        execute_query(recorder.primary(), authorize(f.policy, q2, f.issuer).value(), q2);

    // 0xbbbb is alias-1 in the first query but alias-0 in the second: the
    // mapping is a function of the query, not of the station.
    CHECK(r1.records[1].record.source == SourceId{AliasRef{1}});
    CHECK(r2.records[0].record.source == SourceId{AliasRef{0}});
}

TEST_CASE("query engine writes exactly one audit record per authorize call") {
    Fixture f;
    (void)f.recorder.append(f.record(5, RecordCategory::VehicleDynamics, ConsentState::Granted));
    QueryEngine engine(f.policy, f.issuer);

    QueryRequest q = f.request(PartyRole::DataSubject, Purpose::Research, AccessChannel::Server,
                               {RecordCategory::VehicleDynamics});
    std::uint64_t before = f.recorder.primary().size();
    auto result = engine.run(f.recorder, f.enricher, f.registry, f.edr_node, q, 100);
    REQUIRE(result.ok());
    CHECK(f.recorder.primary().size() == before + 1);
    CHECK(result.value().audit_ref == before);
    const rec::StoredRecord& audit = f.recorder.primary().records[before];
    CHECK(audit.record.category == RecordCategory::SystemHealth);
    CHECK(f.recorder.verify().ok());

    SECTION("empty results still audit") {
        QueryRequest empty = f.request(PartyRole::DataSubject, Purpose::Research,
                                       AccessChannel::Server, {RecordCategory::Diagnostic}, 900,
                                       901);
        std::uint64_t n = f.recorder.primary().size();
        auto r = engine.run(f.recorder, f.enricher, f.registry, f.edr_node, empty, 100);
        REQUIRE(r.ok());
        CHECK(r.value().records.empty());
        CHECK(f.recorder.primary().size() == n + 1);
    }

    SECTION("tampering with an audit record is chain-visible") {
        f.recorder.damage_primary().records[before].record.payload[0] ^= 1;
        auto status = f.recorder.verify();
        REQUIRE_FALSE(status.ok());
        CHECK(*status.first_bad == before);
    }
}

TEST_CASE("query results export and re-import losslessly") {
    Fixture f;
    rec::Recorder recorder;
    (void)recorder.append(f.record(1, RecordCategory::V2xInbound, ConsentState::Granted,
                                   SourceId{PseudonymId{0xcc}}));
    (void)recorder.append(f.record(2, RecordCategory::VehicleDynamics, ConsentState::Granted));
    QueryRequest q = f.request(PartyRole::ServiceProvider, Purpose::ServiceProvision,
                               AccessChannel::Server,
                               {RecordCategory::V2xInbound, RecordCategory::VehicleDynamics,
                                RecordCategory::DecisionTrace});
    QueryResult result =
        execute_query(recorder.primary(), authorize(f.policy, q, f.issuer).value(), q);
    result.audit_ref = 7;

    auto blob = export_result(result, ExportFormat::Binary);
    REQUIRE(blob.ok());
    CHECK(export_result(result, ExportFormat::Binary).value() == blob.value());

    auto imported = import_result(view(blob.value()));
    REQUIRE(imported.ok());
    CHECK(imported.value() == result);

    auto text = export_result(result, ExportFormat::Text);
    REQUIRE(text.ok());
    std::string t(text.value().begin(), text.value().end());
    CHECK(t.find("alias:1") != std::string::npos);

    auto bad = export_result(result, static_cast<ExportFormat>(9));
    REQUIRE_FALSE(bad.ok());
    CHECK(bad.code() == Errc::UnsupportedFormat);
}

TEST_CASE("empty results produce a valid minimal container") {
    Fixture f;
    QueryRequest q = f.request(PartyRole::DataSubject, Purpose::Research, AccessChannel::Server,
                               {RecordCategory::Diagnostic});
    QueryResult result = execute_query(rec::LogCopy{}, authorize(f.policy, q, f.issuer).value(), q);
    auto blob = export_result(result, ExportFormat::Binary);
    auto imported = import_result(view(blob.value()));
    REQUIRE(imported.ok());
    CHECK(imported.value().records.empty());
}

TEST_CASE("tombstoned records come back marked expired") {
    Fixture f;
    rec::RetentionPolicy policy;
    policy.set(RecordCategory::VehicleDynamics, rec::RetentionRule{true, Tick{1}, {}});
    rec::Recorder recorder(policy);
    (void)recorder.append(f.record(0, RecordCategory::VehicleDynamics, ConsentState::Granted));
    (void)recorder.append(f.record(5, RecordCategory::VehicleDynamics, ConsentState::Granted));
    recorder.expire(5);

    QueryRequest q = f.request(PartyRole::DataSubject, Purpose::Research, AccessChannel::Server,
                               {RecordCategory::VehicleDynamics});
    QueryResult result =
        execute_query(recorder.primary(), authorize(f.policy, q, f.issuer).value(), q);
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].tombstoned);
    CHECK(result.records[0].record.payload.empty());
    CHECK(result.records[0].record.tick == 0); // metadata preserved
    CHECK_FALSE(result.records[1].tombstoned);
}
