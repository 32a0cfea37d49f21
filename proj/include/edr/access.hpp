#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "edr/bytes.hpp"
#include "edr/consent.hpp"
#include "edr/crypto.hpp"
#include "edr/enrich.hpp"
#include "edr/payloads.hpp"
#include "edr/recorder.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"

// Access management and privacy-preserving querying. Decisions are a pure
// function of (role, category, purpose, channel, consent state) — never of
// requester identity. Consent is evaluated from the marker embedded at
// enrichment time: a record captured under denial does not become exposable
// by a later grant. Regulated purposes are consent-exempt for the competent
// authority. Every authorize call leaves one tamper-evident audit record.

namespace edr::access {

enum class PartyRole : std::uint8_t {
    DataSubject = 0,
    VehicleManufacturer = 1,
    CompetentAuthority = 2,
    ServiceProvider = 3,
    NeutralServer = 4,
    RepairShop = 5,
};

inline constexpr std::uint8_t kRoleCount = 6;

inline std::string_view to_string(PartyRole r) {
    switch (r) {
        case PartyRole::DataSubject: return "DataSubject";
        case PartyRole::VehicleManufacturer: return "VehicleManufacturer";
        case PartyRole::CompetentAuthority: return "CompetentAuthority";
        case PartyRole::ServiceProvider: return "ServiceProvider";
        case PartyRole::NeutralServer: return "NeutralServer";
        case PartyRole::RepairShop: return "RepairShop";
    }
    return "?";
}

inline std::optional<PartyRole> role_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < kRoleCount; ++i) {
        auto r = static_cast<PartyRole>(i);
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

enum class AccessChannel : std::uint8_t { Server = 0, AdHoc = 1, Obd = 2 };

inline constexpr std::uint8_t kChannelCount = 3;

inline std::string_view to_string(AccessChannel c) {
    switch (c) {
        case AccessChannel::Server: return "Server";
        case AccessChannel::AdHoc: return "AdHoc";
        case AccessChannel::Obd: return "Obd";
    }
    return "?";
}

inline std::optional<AccessChannel> channel_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < kChannelCount; ++i) {
        auto c = static_cast<AccessChannel>(i);
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

enum class Purpose : std::uint8_t {
    AccidentInvestigation = 0, // regulated
    RoadworthinessInspection = 1, // regulated
    Repair = 2,
    ServiceProvision = 3,
    Research = 4,
};

inline constexpr std::uint8_t kPurposeCount = 5;

inline std::string_view to_string(Purpose p) {
    switch (p) {
        case Purpose::AccidentInvestigation: return "AccidentInvestigation";
        case Purpose::RoadworthinessInspection: return "RoadworthinessInspection";
        case Purpose::Repair: return "Repair";
        case Purpose::ServiceProvision: return "ServiceProvision";
        case Purpose::Research: return "Research";
    }
    return "?";
}

inline std::optional<Purpose> purpose_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < kPurposeCount; ++i) {
        auto p = static_cast<Purpose>(i);
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

/// The OBD connector only exposes diagnostics-grade data.
inline bool channel_allows(AccessChannel channel, RecordCategory category) {
    if (channel != AccessChannel::Obd) return true;
    return category == RecordCategory::Diagnostic || category == RecordCategory::SystemHealth;
}

enum class RuleDecision : std::uint8_t { Deny = 0, AllowWithConsent = 1, Allow = 2 };

class AccessPolicy {
public:
    void set_rule(PartyRole role, RecordCategory category, Purpose purpose, RuleDecision d) {
        rules_[key(role, category, purpose)] = d;
    }

    /// Total lookup; absent rules deny.
    RuleDecision rule(PartyRole role, RecordCategory category, Purpose purpose) const {
        auto it = rules_.find(key(role, category, purpose));
        return it == rules_.end() ? RuleDecision::Deny : it->second;
    }

    void set_regulated(Purpose p, bool regulated) {
        if (regulated) regulated_.insert(p);
        else regulated_.erase(p);
    }

    bool regulated(Purpose p) const { return regulated_.contains(p); }

private:
    using Key = std::tuple<std::uint8_t, std::uint8_t, std::uint8_t>;

    static Key key(PartyRole role, RecordCategory category, Purpose purpose) {
        return {static_cast<std::uint8_t>(role), static_cast<std::uint8_t>(category),
                static_cast<std::uint8_t>(purpose)};
    }

    std::map<Key, RuleDecision> rules_;
    std::set<Purpose> regulated_;
};

/// Baseline policy. Consent gates every non-regulated flow, the data
/// subject's own reads included (a record captured under denial stays
/// sealed); the competent authority relies on the regulated-purpose
/// exemption; the repair shop gets diagnostics for repair.
inline AccessPolicy default_policy() {
    AccessPolicy p;
    p.set_regulated(Purpose::AccidentInvestigation, true);
    p.set_regulated(Purpose::RoadworthinessInspection, true);
    for (std::uint8_t c = 0; c < kCategoryCount; ++c) {
        auto cat = static_cast<RecordCategory>(c);
        for (std::uint8_t u = 0; u < kPurposeCount; ++u) {
            auto purpose = static_cast<Purpose>(u);
            p.set_rule(PartyRole::DataSubject, cat, purpose, RuleDecision::AllowWithConsent);
            p.set_rule(PartyRole::ServiceProvider, cat, purpose, RuleDecision::AllowWithConsent);
            p.set_rule(PartyRole::NeutralServer, cat, purpose, RuleDecision::AllowWithConsent);
        }
        p.set_rule(PartyRole::VehicleManufacturer, cat, Purpose::Research,
                   RuleDecision::AllowWithConsent);
        p.set_rule(PartyRole::VehicleManufacturer, cat, Purpose::ServiceProvision,
                   RuleDecision::AllowWithConsent);
    }
    p.set_rule(PartyRole::VehicleManufacturer, RecordCategory::Diagnostic, Purpose::Repair,
               RuleDecision::Allow);
    p.set_rule(PartyRole::VehicleManufacturer, RecordCategory::SystemHealth, Purpose::Repair,
               RuleDecision::Allow);
    p.set_rule(PartyRole::RepairShop, RecordCategory::Diagnostic, Purpose::Repair,
               RuleDecision::Allow);
    p.set_rule(PartyRole::RepairShop, RecordCategory::SystemHealth, Purpose::Repair,
               RuleDecision::Allow);
    p.set_rule(PartyRole::RepairShop, RecordCategory::VehicleDynamics, Purpose::Repair,
               RuleDecision::AllowWithConsent);
    return p;
}

enum class DecideOutcome : std::uint8_t {
    Allowed,
    DeniedNoRule,
    DeniedNoConsent,
    DeniedChannel,
};

inline std::string_view to_string(DecideOutcome d) {
    switch (d) {
        case DecideOutcome::Allowed: return "Allowed";
        case DecideOutcome::DeniedNoRule: return "DeniedNoRule";
        case DecideOutcome::DeniedNoConsent: return "DeniedNoConsent";
        case DecideOutcome::DeniedChannel: return "DeniedChannel";
    }
    return "?";
}

/// The core decision function. Identity never enters; regulated purposes
/// override consent for the competent authority only; the channel
/// restriction binds everyone.
inline DecideOutcome decide(const AccessPolicy& policy, PartyRole role, RecordCategory category,
                            Purpose purpose, AccessChannel channel, ConsentState consent) {
    if (!channel_allows(channel, category)) return DecideOutcome::DeniedChannel;
    if (policy.regulated(purpose) && role == PartyRole::CompetentAuthority)
        return DecideOutcome::Allowed;
    switch (policy.rule(role, category, purpose)) {
        case RuleDecision::Allow:
            return DecideOutcome::Allowed;
        case RuleDecision::AllowWithConsent:
            return consent == ConsentState::Granted ? DecideOutcome::Allowed
                                                    : DecideOutcome::DeniedNoConsent;
        case RuleDecision::Deny:
            return DecideOutcome::DeniedNoRule;
    }
    return DecideOutcome::DeniedNoRule;
}

/// Role-bearing requester credential: a bearer tag issued by the scenario's
/// registration actor. The tag binds (id, role); decisions never read id.
struct RequesterCredential {
    std::string requester_id;
    PartyRole role = PartyRole::ServiceProvider;
    crypto::Mac128 tag{};
};

class CredentialIssuer {
public:
    explicit CredentialIssuer(std::uint64_t seed)
        : key_(crypto::derive_mac_key(seed, "requester-credentials")) {}

    RequesterCredential issue(std::string requester_id, PartyRole role) const {
        RequesterCredential c;
        c.requester_id = std::move(requester_id);
        c.role = role;
        c.tag = crypto::hmac128(key_, view(message(c)));
        return c;
    }

    bool valid(const RequesterCredential& c) const {
        return crypto::mac_equal(c.tag, crypto::hmac128(key_, view(message(c))));
    }

private:
    static Bytes message(const RequesterCredential& c) {
        ByteWriter w;
        w.str(c.requester_id);
        w.u8(static_cast<std::uint8_t>(c.role));
        return w.take();
    }

    crypto::MacKey key_;
};

struct QueryRequest {
    RequesterCredential credential;
    AccessChannel channel = AccessChannel::Server;
    Tick range_first = 0;
    Tick range_last = 0;
    std::set<RecordCategory> categories;
    Purpose purpose = Purpose::Research;
};

inline Result<void> validate_request(const QueryRequest& r) {
    if (r.range_last < r.range_first) return make_error(Errc::BadRequest, "inverted time range");
    if (r.categories.empty()) return make_error(Errc::BadRequest, "empty category set");
    return {};
}

enum class GrantMode : std::uint8_t { Always, IfConsentGranted };

enum class DenyReason : std::uint8_t { NoRule = 0, NoConsent = 1, ChannelRestricted = 2 };

inline std::string_view to_string(DenyReason r) {
    switch (r) {
        case DenyReason::NoRule: return "NoRule";
        case DenyReason::NoConsent: return "NoConsent";
        case DenyReason::ChannelRestricted: return "ChannelRestricted";
    }
    return "?";
}

struct Permit {
    PartyRole role = PartyRole::ServiceProvider;
    Purpose purpose = Purpose::Research;
    AccessChannel channel = AccessChannel::Server;
    std::map<RecordCategory, GrantMode> granted;
    std::map<RecordCategory, DenyReason> denials;

    bool allows(const EnrichedRecord& rec) const {
        auto it = granted.find(rec.category);
        if (it == granted.end()) return false;
        if (it->second == GrantMode::Always) return true;
        return rec.consent.state == ConsentState::Granted;
    }
};

/// Per-category authorization. A category is granted unconditionally when
/// the decision ignores consent, conditionally when only granted-consent
/// records may flow; otherwise it appears in denials with the reason.
inline Result<Permit> authorize(const AccessPolicy& policy, const QueryRequest& request,
                                const CredentialIssuer& issuer) {
    if (!issuer.valid(request.credential))
        return make_error(Errc::BadCredential, request.credential.requester_id);
    auto valid = validate_request(request);
    if (!valid) return valid.error();
    Permit permit;
    permit.role = request.credential.role;
    permit.purpose = request.purpose;
    permit.channel = request.channel;
    for (RecordCategory cat : request.categories) {
        DecideOutcome with = decide(policy, permit.role, cat, request.purpose, request.channel,
                                    ConsentState::Granted);
        DecideOutcome without = decide(policy, permit.role, cat, request.purpose, request.channel,
                                       ConsentState::Denied);
        if (with == DecideOutcome::Allowed && without == DecideOutcome::Allowed) {
            permit.granted[cat] = GrantMode::Always;
        } else if (with == DecideOutcome::Allowed) {
            permit.granted[cat] = GrantMode::IfConsentGranted;
        } else {
            switch (with) {
                case DecideOutcome::DeniedChannel:
                    permit.denials[cat] = DenyReason::ChannelRestricted;
                    break;
                case DecideOutcome::DeniedNoConsent:
                    permit.denials[cat] = DenyReason::NoConsent;
                    break;
                default:
                    permit.denials[cat] = DenyReason::NoRule;
            }
        }
    }
    return permit;
}

struct QueryResult {
    PartyRole role = PartyRole::ServiceProvider;
    AccessChannel channel = AccessChannel::Server;
    Purpose purpose = Purpose::Research;
    Tick range_first = 0;
    Tick range_last = 0;
    std::set<RecordCategory> requested;
    std::vector<rec::StoredRecord> records; // redacted; tombstoned == payload expired
    std::map<RecordCategory, DenyReason> denials;
    std::uint64_t audit_ref = 0;

    bool operator==(const QueryResult&) const = default;
};

/// Replaces remote-station pseudonyms with per-query aliases for everyone
/// but the competent authority. Aliases are assigned in first-seen order and
/// never reused across queries.
class AliasMap {
public:
    AliasRef alias_for(PseudonymId p) {
        auto [it, inserted] = map_.try_emplace(p, static_cast<std::uint32_t>(map_.size()));
        return AliasRef{it->second};
    }

    const std::map<PseudonymId, std::uint32_t>& mapping() const { return map_; }

private:
    std::map<PseudonymId, std::uint32_t> map_;
};

inline rec::StoredRecord redact(const rec::StoredRecord& stored, PartyRole role,
                                AliasMap& aliases) {
    if (role == PartyRole::CompetentAuthority) return stored;
    rec::StoredRecord out = stored;
    if (const auto* p = std::get_if<PseudonymId>(&out.record.source))
        out.record.source = aliases.alias_for(*p);
    return out;
}

/// Filters the log by time range and permit, then redacts. The result equals
/// a brute-force scan of the log under the same predicate.
inline QueryResult execute_query(const rec::LogCopy& log, const Permit& permit,
                                 const QueryRequest& request) {
    QueryResult result;
    result.role = permit.role;
    result.channel = permit.channel;
    result.purpose = permit.purpose;
    result.range_first = request.range_first;
    result.range_last = request.range_last;
    result.requested = request.categories;
    result.denials = permit.denials;
    AliasMap aliases;
    for (const rec::StoredRecord& stored : log.records) {
        const EnrichedRecord& r = stored.record;
        if (r.tick < request.range_first || r.tick > request.range_last) continue;
        if (!request.categories.contains(r.category)) continue;
        if (!permit.allows(r)) continue;
        result.records.push_back(redact(stored, permit.role, aliases));
    }
    return result;
}

/// Audit payload appended to the vehicle's own chain for every authorize
/// call: role, channel, purpose, decision summary, result digest, tick.
inline Bytes audit_payload(const QueryRequest& request, const Permit& permit,
                           const crypto::Hash256& result_digest, Tick now) {
    ByteWriter w;
    w.u8(payload::kAccessAudit);
    w.u8(static_cast<std::uint8_t>(request.credential.role));
    w.u8(static_cast<std::uint8_t>(request.channel));
    w.u8(static_cast<std::uint8_t>(request.purpose));
    w.u8(static_cast<std::uint8_t>(permit.granted.size()));
    w.u8(static_cast<std::uint8_t>(permit.denials.size()));
    w.raw(result_digest);
    w.u64(now);
    return w.take();
}

inline crypto::Hash256 result_digest(const QueryResult& result) {
    ByteWriter w;
    for (const rec::StoredRecord& s : result.records) {
        w.u8(s.tombstoned ? 1 : 0);
        w.blob(view(serialize_record(s.record)));
    }
    return crypto::sha256(view(w.bytes()));
}

enum class ExportFormat : std::uint8_t { Binary = 0, Text = 1 };

inline Bytes export_result_binary(const QueryResult& r) {
    ByteWriter w;
    w.raw(view(std::string_view(rec::kMagic, 4)));
    w.u16(rec::kContainerVersion);
    w.u8(rec::kKindQueryResult);
    w.u8(static_cast<std::uint8_t>(r.role));
    w.u8(static_cast<std::uint8_t>(r.channel));
    w.u8(static_cast<std::uint8_t>(r.purpose));
    w.u64(r.range_first);
    w.u64(r.range_last);
    w.u32(static_cast<std::uint32_t>(r.requested.size()));
    for (RecordCategory c : r.requested) w.u8(static_cast<std::uint8_t>(c));
    w.u64(r.audit_ref);
    w.u64(r.records.size());
    for (const rec::StoredRecord& s : r.records) {
        w.u8(s.tombstoned ? 1 : 0);
        w.blob(view(serialize_record(s.record)));
    }
    w.u32(static_cast<std::uint32_t>(r.denials.size()));
    for (const auto& [cat, reason] : r.denials) {
        w.u8(static_cast<std::uint8_t>(cat));
        w.u8(static_cast<std::uint8_t>(reason));
    }
    return w.take();
}

inline std::string export_result_text(const QueryResult& r) {
    std::ostringstream out;
    out << "query role=" << to_string(r.role) << " channel=" << to_string(r.channel)
        << " purpose=" << to_string(r.purpose) << " range=" << r.range_first << ":"
        << r.range_last << " audit_ref=" << r.audit_ref << "\n";
    for (const auto& [cat, reason] : r.denials)
        out << "denied category=" << to_string(cat) << " reason=" << to_string(reason) << "\n";
    for (const rec::StoredRecord& s : r.records) {
        out << "record id=" << to_string(s.record.record_id) << " tick=" << s.record.tick
            << " source=" << to_string(s.record.source)
            << " category=" << to_string(s.record.category)
            << " consent=" << to_string(s.record.consent.state) << ":v"
            << s.record.consent.version;
        if (s.tombstoned) out << " payload=EXPIRED";
        else out << " payload=" << to_hex(view(s.record.payload));
        out << "\n";
    }
    return out.str();
}

inline Result<Bytes> export_result(const QueryResult& r, ExportFormat format) {
    switch (format) {
        case ExportFormat::Binary:
            return export_result_binary(r);
        case ExportFormat::Text: {
            std::string t = export_result_text(r);
            return Bytes(t.begin(), t.end());
        }
    }
    return make_error(Errc::UnsupportedFormat,
                      "format " + std::to_string(static_cast<int>(format)));
}

inline Result<QueryResult> import_result(ByteView bytes) {
    ByteReader r(bytes);
    Bytes magic = r.raw(4);
    if (!r.ok() || std::string(magic.begin(), magic.end()) != std::string(rec::kMagic, 4))
        return make_error(Errc::BadContainer, "bad magic");
    if (r.u16() != rec::kContainerVersion) return make_error(Errc::BadContainer, "bad version");
    if (r.u8() != rec::kKindQueryResult)
        return make_error(Errc::BadContainer, "not a query-result container");
    QueryResult q;
    q.role = static_cast<PartyRole>(r.u8());
    q.channel = static_cast<AccessChannel>(r.u8());
    q.purpose = static_cast<Purpose>(r.u8());
    q.range_first = r.u64();
    q.range_last = r.u64();
    std::uint32_t ncat = r.u32();
    if (!r.ok() || ncat > kCategoryCount) return make_error(Errc::BadContainer, "bad category set");
    for (std::uint32_t i = 0; i < ncat; ++i)
        q.requested.insert(static_cast<RecordCategory>(r.u8()));
    q.audit_ref = r.u64();
    std::uint64_t n = r.u64();
    if (!r.ok() || n > bytes.size()) return make_error(Errc::BadContainer, "bad record count");
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint8_t flags = r.u8();
        Bytes rb = r.blob();
        if (!r.ok()) return make_error(Errc::BadContainer, "truncated record");
        auto record = parse_record(view(rb));
        if (!record) return make_error(Errc::BadContainer, "bad record");
        q.records.push_back(rec::StoredRecord{std::move(*record), (flags & 1) != 0});
    }
    std::uint32_t nd = r.u32();
    if (!r.ok() || nd > kCategoryCount) return make_error(Errc::BadContainer, "bad denial count");
    for (std::uint32_t i = 0; i < nd; ++i) {
        auto cat = static_cast<RecordCategory>(r.u8());
        q.denials[cat] = static_cast<DenyReason>(r.u8());
    }
    if (!r.done()) return make_error(Errc::BadContainer, "trailing bytes");
    return q;
}

/// One authorize + execute + audit round against a live recorder. The audit
/// record bypasses the retention filter: access accountability is not
/// subject to storage policy.
class QueryEngine {
public:
    QueryEngine(AccessPolicy policy, CredentialIssuer issuer)
        : policy_(std::move(policy)), issuer_(std::move(issuer)) {}

    const AccessPolicy& policy() const { return policy_; }
    const CredentialIssuer& issuer() const { return issuer_; }

    Result<QueryResult> run(rec::Recorder& recorder, Enricher& enricher,
                            const ConsentRegistry& registry, const EcuId& audit_source,
                            const QueryRequest& request, Tick now) {
        auto permit = authorize(policy_, request, issuer_);
        if (!permit) return permit.error();
        QueryResult result = execute_query(recorder.primary(), permit.value(), request);
        Bytes audit =
            audit_payload(request, permit.value(), result_digest(result), now);
        auto audit_record = enricher.enrich_system(audit_source, audit, now, "access-audit", registry);
        if (!audit_record) return audit_record.error();
        auto entry = recorder.append(audit_record.value());
        if (!entry) return entry.error();
        result.audit_ref = entry.value().seq;
        return result;
    }

private:
    AccessPolicy policy_;
    CredentialIssuer issuer_;
};

} // namespace edr::access
