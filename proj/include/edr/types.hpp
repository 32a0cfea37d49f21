#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "edr/bytes.hpp"

namespace edr {

/// Simulation time: integer ticks. Wall-clock time is a scenario-supplied
/// affine mapping over ticks (see ScenarioClock).
using Tick = std::uint64_t;
using WallMs = std::uint64_t;

using VehicleId = std::string;
using PseudonymId = std::uint64_t;

enum class EcuRole : std::uint8_t {
    DataSource = 0,
    DecisionMaking = 1,
    Actuating = 2,
    DataCollection = 3,
};

inline std::string_view to_string(EcuRole r) {
    switch (r) {
        case EcuRole::DataSource: return "DataSource";
        case EcuRole::DecisionMaking: return "DecisionMaking";
        case EcuRole::Actuating: return "Actuating";
        case EcuRole::DataCollection: return "DataCollection";
    }
    return "?";
}

struct EcuId {
    VehicleId vehicle;
    std::uint16_t node = 0;
    EcuRole role = EcuRole::DataSource;

    auto operator<=>(const EcuId&) const = default;
};

inline std::string to_string(const EcuId& id) {
    return id.vehicle + "/" + std::to_string(id.node);
}

enum class RecordCategory : std::uint8_t {
    VehicleDynamics = 0,
    SensorRaw = 1,
    DecisionTrace = 2,
    ActuationCommand = 3,
    V2xInbound = 4,
    V2xOutbound = 5,
    SystemHealth = 6,
    Diagnostic = 7,
};

inline constexpr std::uint8_t kCategoryCount = 8;

inline std::string_view to_string(RecordCategory c) {
    switch (c) {
        case RecordCategory::VehicleDynamics: return "VehicleDynamics";
        case RecordCategory::SensorRaw: return "SensorRaw";
        case RecordCategory::DecisionTrace: return "DecisionTrace";
        case RecordCategory::ActuationCommand: return "ActuationCommand";
        case RecordCategory::V2xInbound: return "V2xInbound";
        case RecordCategory::V2xOutbound: return "V2xOutbound";
        case RecordCategory::SystemHealth: return "SystemHealth";
        case RecordCategory::Diagnostic: return "Diagnostic";
    }
    return "?";
}

inline std::optional<RecordCategory> category_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < kCategoryCount; ++i) {
        auto c = static_cast<RecordCategory>(i);
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

enum class ConsentState : std::uint8_t { Denied = 0, Granted = 1 };

inline std::string_view to_string(ConsentState s) {
    return s == ConsentState::Granted ? "Granted" : "Denied";
}

/// Redaction alias: stable within one query, meaningless across queries.
struct AliasRef {
    std::uint32_t index = 0;
    auto operator<=>(const AliasRef&) const = default;
};

/// Who a record came from: an in-vehicle ECU, a remote station pseudonym, or
/// a per-query alias substituted by redaction.
using SourceId = std::variant<EcuId, PseudonymId, AliasRef>;

inline std::string to_string(const SourceId& s) {
    if (const auto* e = std::get_if<EcuId>(&s)) return "ecu:" + to_string(*e);
    if (const auto* p = std::get_if<PseudonymId>(&s)) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(*p));
        return std::string("pseudonym:") + buf;
    }
    return "alias:" + std::to_string(std::get<AliasRef>(s).index + 1);
}

/// 128-bit record identifier: (vehicle tag, per-vehicle sequence). Never
/// random, so runs reproduce byte-identically.
struct RecordId {
    std::uint64_t hi = 0; // first 8 bytes of sha256(vehicle id)
    std::uint64_t lo = 0; // per-vehicle monotonic sequence

    auto operator<=>(const RecordId&) const = default;
};

inline std::string to_string(const RecordId& id) {
    char buf[34];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id.hi),
                  static_cast<unsigned long long>(id.lo));
    return buf;
}

inline void put_source(ByteWriter& w, const SourceId& s) {
    if (const auto* e = std::get_if<EcuId>(&s)) {
        w.u8(0);
        w.str(e->vehicle);
        w.u16(e->node);
        w.u8(static_cast<std::uint8_t>(e->role));
    } else if (const auto* p = std::get_if<PseudonymId>(&s)) {
        w.u8(1);
        w.u64(*p);
    } else {
        w.u8(2);
        w.u32(std::get<AliasRef>(s).index);
    }
}

inline std::optional<SourceId> get_source(ByteReader& r) {
    switch (r.u8()) {
        case 0: {
            EcuId e;
            e.vehicle = r.str();
            e.node = r.u16();
            e.role = static_cast<EcuRole>(r.u8());
            if (!r.ok()) return std::nullopt;
            return SourceId{e};
        }
        case 1: {
            PseudonymId p = r.u64();
            if (!r.ok()) return std::nullopt;
            return SourceId{p};
        }
        case 2: {
            AliasRef a{r.u32()};
            if (!r.ok()) return std::nullopt;
            return SourceId{a};
        }
        default:
            return std::nullopt;
    }
}

} // namespace edr
