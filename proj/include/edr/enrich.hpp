#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "edr/bytes.hpp"
#include "edr/can.hpp"
#include "edr/consent.hpp"
#include "edr/crypto.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"

// Metadata enrichment: every verified message is wrapped with identifier,
// tick and wall-clock timestamps, a category from the scenario's declared
// message-type table, and the consent marker current at enrichment time.

namespace edr {

inline constexpr std::uint32_t kSchemaVersion = 1;

/// Affine tick-to-wall-clock mapping supplied by the scenario; keeps record
/// timestamps reproducible without touching the real clock.
struct ScenarioClock {
    WallMs epoch_ms = 0;
    WallMs ms_per_tick = 100;

    WallMs wall(Tick tick) const { return epoch_ms + tick * ms_per_tick; }
};

/// Declared message types: name and wire id per descriptor, category for
/// access-rights management.
class MessageTypeTable {
public:
    Result<void> declare(std::uint8_t id, std::string name, RecordCategory category) {
        if (by_id_.contains(id))
            return make_error(Errc::InvalidScenario, "duplicate descriptor id " + std::to_string(id));
        if (by_name_.contains(name))
            return make_error(Errc::InvalidScenario, "duplicate descriptor name " + name);
        by_id_.emplace(id, Entry{name, category});
        by_name_.emplace(std::move(name), id);
        return {};
    }

    Result<RecordCategory> classify(std::string_view descriptor) const {
        auto it = by_name_.find(std::string(descriptor));
        if (it == by_name_.end())
            return make_error(Errc::UnknownDescriptor, std::string(descriptor));
        return by_id_.at(it->second).category;
    }

    Result<RecordCategory> classify_id(std::uint8_t id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end())
            return make_error(Errc::UnknownDescriptor, "id " + std::to_string(id));
        return it->second.category;
    }

    std::optional<std::string> name_of(std::uint8_t id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) return std::nullopt;
        return it->second.name;
    }

    std::optional<std::uint8_t> id_of(std::string_view name) const {
        auto it = by_name_.find(std::string(name));
        if (it == by_name_.end()) return std::nullopt;
        return it->second;
    }

private:
    struct Entry {
        std::string name;
        RecordCategory category;
    };

    std::map<std::uint8_t, Entry> by_id_;
    std::map<std::string, std::uint8_t> by_name_;
};

/// Built-in descriptor set; scenarios may extend it.
inline MessageTypeTable default_message_types() {
    MessageTypeTable t;
    (void)t.declare(1, "wheel-speed", RecordCategory::VehicleDynamics);
    (void)t.declare(2, "camera-frame", RecordCategory::SensorRaw);
    (void)t.declare(3, "decision-trace", RecordCategory::DecisionTrace);
    (void)t.declare(4, "brake-command", RecordCategory::ActuationCommand);
    (void)t.declare(5, "cam-inbound", RecordCategory::V2xInbound);
    (void)t.declare(6, "denm-inbound", RecordCategory::V2xInbound);
    (void)t.declare(7, "health", RecordCategory::SystemHealth);
    (void)t.declare(8, "diagnostic", RecordCategory::Diagnostic);
    (void)t.declare(9, "cam-outbound", RecordCategory::V2xOutbound);
    (void)t.declare(10, "denm-outbound", RecordCategory::V2xOutbound);
    (void)t.declare(11, "access-audit", RecordCategory::SystemHealth);
    return t;
}

struct EnrichedRecord {
    RecordId record_id;
    Tick tick = 0;
    WallMs wall_time = 0;
    SourceId source;
    RecordCategory category = RecordCategory::VehicleDynamics;
    ConsentMarker consent;
    Bytes payload;
    std::uint32_t schema_version = kSchemaVersion;

    bool operator==(const EnrichedRecord&) const = default;
};

/// Canonical serialization: fixed field order, length prefixes, big-endian.
/// This is the exact byte stream that gets hashed into the chain and stored
/// in the EDRA container.
inline Bytes serialize_record(const EnrichedRecord& r) {
    ByteWriter w;
    w.u32(r.schema_version);
    w.u64(r.record_id.hi);
    w.u64(r.record_id.lo);
    w.u64(r.tick);
    w.u64(r.wall_time);
    put_source(w, r.source);
    w.u8(static_cast<std::uint8_t>(r.category));
    w.str(r.consent.subject);
    w.u8(static_cast<std::uint8_t>(r.consent.category));
    w.u8(static_cast<std::uint8_t>(r.consent.state));
    w.u32(r.consent.version);
    w.u64(r.consent.decided_at);
    w.blob(view(r.payload));
    return w.take();
}

inline std::optional<EnrichedRecord> parse_record(ByteReader& r) {
    EnrichedRecord rec;
    rec.schema_version = r.u32();
    rec.record_id.hi = r.u64();
    rec.record_id.lo = r.u64();
    rec.tick = r.u64();
    rec.wall_time = r.u64();
    auto src = get_source(r);
    if (!src) return std::nullopt;
    rec.source = *src;
    rec.category = static_cast<RecordCategory>(r.u8());
    rec.consent.subject = r.str();
    rec.consent.category = static_cast<RecordCategory>(r.u8());
    rec.consent.state = static_cast<ConsentState>(r.u8());
    rec.consent.version = r.u32();
    rec.consent.decided_at = r.u64();
    rec.payload = r.blob();
    if (!r.ok()) return std::nullopt;
    if (static_cast<std::uint8_t>(rec.category) >= kCategoryCount) return std::nullopt;
    return rec;
}

inline std::optional<EnrichedRecord> parse_record(ByteView bytes) {
    ByteReader r(bytes);
    auto rec = parse_record(r);
    if (rec && !r.done()) return std::nullopt;
    return rec;
}

/// Vehicle tag for record ids: first 8 bytes of sha256(vehicle id).
inline std::uint64_t vehicle_tag(const VehicleId& vehicle) {
    crypto::Hash256 h = crypto::sha256(view(vehicle));
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | h[static_cast<std::size_t>(i)];
    return v;
}

/// Per-vehicle enrichment pipeline stage. Owns the record-id sequence; the
/// consent registry is read at call time so snapshots are historically
/// faithful.
class Enricher {
public:
    Enricher(VehicleId vehicle, std::string owner_subject, MessageTypeTable table,
             ScenarioClock clock)
        : vehicle_(std::move(vehicle)),
          owner_(std::move(owner_subject)),
          table_(std::move(table)),
          clock_(clock),
          tag_(vehicle_tag(vehicle_)) {}

    const MessageTypeTable& table() const { return table_; }
    const ScenarioClock& clock() const { return clock_; }
    const std::string& owner() const { return owner_; }

    /// In-vehicle path: message already authenticated by the CAN layer.
    Result<EnrichedRecord> enrich(const can::VerifiedMessage& msg, std::string_view descriptor,
                                  const ConsentRegistry& registry) {
        auto category = table_.classify(descriptor);
        if (!category) return category.error();
        return finish(SourceId{msg.sender}, msg.bus_tick, category.value(), msg.payload, registry);
    }

    /// Out-vehicle path: message verified by the V2X layer; remote-sourced
    /// records always carry V2xInbound.
    Result<EnrichedRecord> enrich_inbound(PseudonymId sender, const Bytes& payload, Tick tick,
                                          const ConsentRegistry& registry) {
        return finish(SourceId{sender}, tick, RecordCategory::V2xInbound, payload, registry);
    }

    /// System-generated records (rejections, attestation results, audit).
    Result<EnrichedRecord> enrich_system(const EcuId& source, const Bytes& payload, Tick tick,
                                         std::string_view descriptor,
                                         const ConsentRegistry& registry) {
        auto category = table_.classify(descriptor);
        if (!category) return category.error();
        return finish(SourceId{source}, tick, category.value(), payload, registry);
    }

private:
    Result<EnrichedRecord> finish(SourceId source, Tick tick, RecordCategory category,
                                  const Bytes& payload, const ConsentRegistry& registry) {
        auto marker = registry.snapshot(owner_, category);
        if (!marker) return marker.error();
        EnrichedRecord rec;
        rec.record_id = RecordId{tag_, seq_++};
        rec.tick = tick;
        rec.wall_time = clock_.wall(tick);
        rec.source = std::move(source);
        rec.category = category;
        rec.consent = marker.value();
        rec.payload = payload;
        return rec;
    }

    VehicleId vehicle_;
    std::string owner_;
    MessageTypeTable table_;
    ScenarioClock clock_;
    std::uint64_t tag_;
    std::uint64_t seq_ = 0;
};

} // namespace edr
