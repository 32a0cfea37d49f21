#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edr/bytes.hpp"
#include "edr/types.hpp"

// Payload layouts used on the simulated CAN. Every payload starts with the
// descriptor id from the message-type table; the rest is fixed-order
// big-endian fields. Documented in docs/formats.md.

namespace edr::payload {

inline constexpr std::uint8_t kWheelSpeed = 1;
inline constexpr std::uint8_t kCameraFrame = 2;
inline constexpr std::uint8_t kDecisionTrace = 3;
inline constexpr std::uint8_t kBrakeCommand = 4;
inline constexpr std::uint8_t kCamInbound = 5;
inline constexpr std::uint8_t kDenmInbound = 6;
inline constexpr std::uint8_t kHealth = 7;
inline constexpr std::uint8_t kDiagnostic = 8;
inline constexpr std::uint8_t kCamOutbound = 9;
inline constexpr std::uint8_t kDenmOutbound = 10;
inline constexpr std::uint8_t kAccessAudit = 11;

enum class DecisionCode : std::uint8_t { HardBrake = 1, CollisionResponse = 2 };

inline Bytes wheel_speed(double speed_mps) {
    ByteWriter w;
    w.u8(kWheelSpeed);
    w.f64(speed_mps);
    return w.take();
}

inline std::optional<double> parse_wheel_speed(ByteView p) {
    ByteReader r(p);
    if (r.u8() != kWheelSpeed) return std::nullopt;
    double v = r.f64();
    if (!r.done()) return std::nullopt;
    return v;
}

inline Bytes camera_frame(std::uint32_t frame_seq, std::uint64_t digest) {
    ByteWriter w;
    w.u8(kCameraFrame);
    w.u32(frame_seq);
    w.u64(digest);
    return w.take();
}

/// Decision nodes embed the record ids that triggered them; reconstruction
/// links the causal chain from these references.
inline Bytes decision_trace(DecisionCode code, const std::vector<RecordId>& refs) {
    ByteWriter w;
    w.u8(kDecisionTrace);
    w.u8(static_cast<std::uint8_t>(code));
    w.u8(static_cast<std::uint8_t>(refs.size()));
    for (const RecordId& id : refs) {
        w.u64(id.hi);
        w.u64(id.lo);
    }
    return w.take();
}

inline std::optional<std::vector<RecordId>> parse_decision_refs(ByteView p) {
    ByteReader r(p);
    if (r.u8() != kDecisionTrace) return std::nullopt;
    r.u8(); // code
    std::uint8_t n = r.u8();
    std::vector<RecordId> refs;
    refs.reserve(n);
    for (std::uint8_t i = 0; i < n; ++i) {
        RecordId id;
        id.hi = r.u64();
        id.lo = r.u64();
        refs.push_back(id);
    }
    if (!r.done()) return std::nullopt;
    return refs;
}

inline Bytes brake_command(double magnitude) {
    ByteWriter w;
    w.u8(kBrakeCommand);
    w.f64(magnitude);
    return w.take();
}

inline Bytes health_text(std::string_view text) {
    ByteWriter w;
    w.u8(kHealth);
    w.str(text);
    return w.take();
}

inline std::optional<std::string> parse_health_text(ByteView p) {
    ByteReader r(p);
    if (r.u8() != kHealth) return std::nullopt;
    std::string s = r.str();
    if (!r.done()) return std::nullopt;
    return s;
}

inline Bytes diagnostic_text(std::string_view text) {
    ByteWriter w;
    w.u8(kDiagnostic);
    w.str(text);
    return w.take();
}

} // namespace edr::payload
