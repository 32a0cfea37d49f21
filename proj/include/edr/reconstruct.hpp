#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edr/access.hpp"
#include "edr/payloads.hpp"
#include "edr/pki.hpp"
#include "edr/recorder.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"
#include "edr/v2x.hpp"

// Forensic event reconstruction over authorized query results: a causal
// timeline around the event tick, chain and segment re-verification, ticket
// checks for every remote-sourced record, and warrant-gated resolution of
// remote pseudonyms. Everything is a pure function of its inputs.

namespace edr::recon {

inline constexpr Tick kDefaultWindow = 150;

enum class IntegrityStatus : std::uint8_t {
    ChainVerified,
    TombstonePayload,
    IntegrityFailure,
};

inline std::string_view to_string(IntegrityStatus s) {
    switch (s) {
        case IntegrityStatus::ChainVerified: return "ChainVerified";
        case IntegrityStatus::TombstonePayload: return "TombstonePayload";
        case IntegrityStatus::IntegrityFailure: return "IntegrityFailure";
    }
    return "?";
}

struct TimelineEntry {
    RecordId record_id;
    Tick tick = 0;
    SourceId source;
    RecordCategory category = RecordCategory::VehicleDynamics;
    Bytes payload;
    bool tombstoned = false;
    IntegrityStatus integrity = IntegrityStatus::ChainVerified;
    std::vector<RecordId> causes; // decision-trace references
};

struct EventTimeline {
    Tick event_tick = 0;
    Tick window = 0;
    std::vector<TimelineEntry> entries;
};

/// Records in [event - W, event + W], ordered by (tick, source), with causal
/// references parsed from decision traces.
inline Result<EventTimeline> build_timeline(const access::QueryResult& result, Tick event_tick,
                                            Tick window) {
    if (event_tick < window)
        return make_error(Errc::WindowNotCovered, "window extends past log start");
    Tick lo = event_tick - window;
    Tick hi = event_tick + window;
    if (result.range_first > lo || result.range_last < hi)
        return make_error(Errc::WindowNotCovered,
                          "result covers [" + std::to_string(result.range_first) + "," +
                              std::to_string(result.range_last) + "]");
    EventTimeline tl;
    tl.event_tick = event_tick;
    tl.window = window;
    for (const rec::StoredRecord& s : result.records) {
        if (s.record.tick < lo || s.record.tick > hi) continue;
        TimelineEntry e;
        e.record_id = s.record.record_id;
        e.tick = s.record.tick;
        e.source = s.record.source;
        e.category = s.record.category;
        e.payload = s.record.payload;
        e.tombstoned = s.tombstoned;
        e.integrity =
            s.tombstoned ? IntegrityStatus::TombstonePayload : IntegrityStatus::ChainVerified;
        if (s.record.category == RecordCategory::DecisionTrace && !s.tombstoned) {
            if (auto refs = payload::parse_decision_refs(view(e.payload))) e.causes = *refs;
        }
        tl.entries.push_back(std::move(e));
    }
    std::sort(tl.entries.begin(), tl.entries.end(),
              [](const TimelineEntry& a, const TimelineEntry& b) {
                  if (a.tick != b.tick) return a.tick < b.tick;
                  if (a.source != b.source) return a.source < b.source;
                  return a.record_id < b.record_id;
              });
    return tl;
}

struct ProvenanceReport {
    rec::ChainStatus chain;
    std::vector<std::pair<rec::SignedSegment, rec::SegmentStatus>> segments;
    std::map<PseudonymId, std::string> ticket_status;
    std::map<PseudonymId, VehicleId> resolved;
    std::map<PseudonymId, std::string> unresolved;
};

/// Pseudonym embedded in a v2x rejection record, if any.
inline std::optional<PseudonymId> rejected_pseudonym(ByteView payload) {
    auto text = payload::parse_health_text(payload);
    if (!text || text->rfind("v2x-reject", 0) != 0) return std::nullopt;
    auto pos = text->find("pseudonym=");
    if (pos == std::string::npos) return std::nullopt;
    try {
        return std::stoull(text->substr(pos + 10), nullptr, 16);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

/// Re-runs chain verification, segment checks, and ticket verification for
/// every remote-sourced record; updates each timeline entry's integrity
/// status against the stored log. Failures are report content, not errors.
inline ProvenanceReport verify_provenance(EventTimeline& timeline, const rec::LogCopy& log,
                                          const std::vector<rec::SignedSegment>& segments,
                                          const crypto::Hash256& genesis,
                                          const pki::TrustContext& trust,
                                          const crypto::PublicKey& vehicle_key,
                                          const v2x::TicketStore& tickets) {
    ProvenanceReport report;
    report.chain = rec::verify_chain(log, genesis);
    for (const rec::SignedSegment& seg : segments)
        report.segments.emplace_back(seg, rec::verify_segment(seg, log, genesis, vehicle_key));

    std::map<RecordId, std::uint64_t> by_id;
    for (std::uint64_t i = 0; i < log.size(); ++i)
        by_id.emplace(log.records[i].record.record_id, i);

    for (TimelineEntry& e : timeline.entries) {
        auto it = by_id.find(e.record_id);
        if (it == by_id.end()) {
            e.integrity = IntegrityStatus::IntegrityFailure;
            continue;
        }
        std::uint64_t i = it->second;
        crypto::Hash256 prev = i == 0 ? genesis : log.entries[i - 1].chain;
        if (!rec::slot_valid(log, i, prev)) {
            e.integrity = IntegrityStatus::IntegrityFailure;
        } else if (log.records[i].tombstoned) {
            e.integrity = IntegrityStatus::TombstonePayload;
        } else {
            e.integrity = IntegrityStatus::ChainVerified;
        }

        if (e.category == RecordCategory::V2xInbound) {
            if (const auto* p = std::get_if<PseudonymId>(&e.source)) {
                auto ticket_it = tickets.find(*p);
                if (ticket_it == tickets.end()) {
                    report.ticket_status[*p] = "TicketMissing";
                } else {
                    auto status = pki::verify_ticket(ticket_it->second, trust, e.tick);
                    report.ticket_status[*p] =
                        status ? "Ok" : std::string(to_string(status.code()));
                }
            }
        }
    }
    return report;
}

/// Every remote pseudonym in the timeline, including ones named by rejection
/// records (forged senders never accepted into the log).
inline std::vector<PseudonymId> remote_pseudonyms(const EventTimeline& timeline) {
    std::vector<PseudonymId> out;
    for (const TimelineEntry& e : timeline.entries) {
        if (e.category == RecordCategory::V2xInbound) {
            if (const auto* p = std::get_if<PseudonymId>(&e.source)) out.push_back(*p);
        } else if (e.category == RecordCategory::SystemHealth) {
            if (auto p = rejected_pseudonym(view(e.payload))) out.push_back(*p);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Maps timeline pseudonyms to enrolment identities via warrant-gated escrow
/// lookup. Unknown (forged) pseudonyms are noted, not fatal; a warrant that
/// does not cover a known pseudonym is.
inline Result<void> resolve_remote_senders(const EventTimeline& timeline, pki::Pki& authority,
                                           const std::optional<pki::Warrant>& warrant,
                                           ProvenanceReport& report) {
    if (!warrant || !authority.warrant_valid(*warrant))
        return make_error(Errc::NoWarrant, "missing or invalid warrant");
    for (PseudonymId p : remote_pseudonyms(timeline)) {
        auto resolved = authority.resolve_pseudonym(p, warrant);
        if (resolved) {
            report.resolved[p] = resolved.value();
        } else if (resolved.code() == Errc::UnknownPseudonym) {
            report.unresolved[p] = "UnknownPseudonym";
        } else {
            return resolved.error();
        }
    }
    return {};
}

inline std::string format_pseudonym(PseudonymId p) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(p));
    return buf;
}

/// Deterministic structured-text report: TIMELINE, PROVENANCE, RESOLUTIONS.
inline std::string export_report(const EventTimeline& timeline, const ProvenanceReport& report) {
    std::ostringstream out;
    out << "EDR RECONSTRUCTION REPORT\n";
    out << "event_tick=" << timeline.event_tick << " window=" << timeline.window
        << " entries=" << timeline.entries.size() << "\n";
    out << "== TIMELINE ==\n";
    for (const TimelineEntry& e : timeline.entries) {
        out << "tick=" << e.tick << " source=" << to_string(e.source)
            << " category=" << to_string(e.category) << " status=" << to_string(e.integrity)
            << " id=" << to_string(e.record_id);
        if (e.tombstoned) out << " payload=EXPIRED";
        else out << " payload=" << to_hex(view(e.payload));
        if (!e.causes.empty()) {
            out << " refs=";
            for (std::size_t i = 0; i < e.causes.size(); ++i) {
                if (i) out << ",";
                out << to_string(e.causes[i]);
            }
        }
        out << "\n";
    }
    out << "== PROVENANCE ==\n";
    if (report.chain.ok()) out << "chain=Ok\n";
    else out << "chain=FirstBadIndex(" << *report.chain.first_bad << ")\n";
    for (const auto& [seg, status] : report.segments)
        out << "segment first=" << seg.first_seq << " last=" << seg.last_seq
            << " status=" << rec::to_string(status) << "\n";
    for (const auto& [p, status] : report.ticket_status)
        out << "ticket pseudonym=" << format_pseudonym(p) << " status=" << status << "\n";
    out << "== RESOLUTIONS ==\n";
    for (const auto& [p, vehicle] : report.resolved)
        out << "pseudonym=" << format_pseudonym(p) << " vehicle=" << vehicle << "\n";
    for (const auto& [p, reason] : report.unresolved)
        out << "unresolved pseudonym=" << format_pseudonym(p) << " reason=" << reason << "\n";
    return out.str();
}

} // namespace edr::recon
