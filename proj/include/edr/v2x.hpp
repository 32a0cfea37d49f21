#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edr/bytes.hpp"
#include "edr/crypto.hpp"
#include "edr/payloads.hpp"
#include "edr/pki.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"

// Out-vehicle peer-to-peer messaging: range-limited CAM beacons,
// event-triggered DENMs, and capability advertisements. Messages carry the
// sender's current pseudonym ticket and a signature under its key; they
// never contain long-term vehicle identity. Receivers verify the ticket
// chain, the signature, freshness, and reject duplicates.
//
// Wire layout (big-endian, length prefixes), documented in docs/formats.md:
//   blob(body) | blob(ticket_message) | 64B ticket_sig | 64B body_sig
// CAM body:        u8 type=1 | u64 pseudonym | f64 x | f64 y | f64 heading
//                  | f64 speed | u64 generated_at
// DENM body:       u8 type=2 | u64 pseudonym | u8 cause | u64 event_time
//                  | f64 x | f64 y | u64 generated_at
// Capability body: u8 type=3 | u64 pseudonym | u8 willing | u32 n
//                  | n x str | u64 generated_at

namespace edr::v2x {

inline constexpr double kDefaultRangeMeters = 300.0;
inline constexpr Tick kDefaultCamPeriod = 10;
inline constexpr Tick kDefaultFreshnessWindow = 20;
inline constexpr double kDefaultDecelThreshold = 6.0; // m/s^2

enum class MessageType : std::uint8_t { Cam = 1, Denm = 2, Capability = 3 };

enum class DenmCause : std::uint8_t { HardBraking = 1, Collision = 2 };

inline std::string_view to_string(DenmCause c) {
    switch (c) {
        case DenmCause::HardBraking: return "HardBraking";
        case DenmCause::Collision: return "Collision";
    }
    return "?";
}

inline double normalize_heading(double degrees) {
    double h = std::fmod(degrees, 360.0);
    if (h < 0) h += 360.0;
    return h;
}

struct CamMessage {
    PseudonymId pseudonym = 0;
    double x = 0;
    double y = 0;
    double heading = 0; // [0, 360)
    double speed = 0;   // m/s, >= 0
    Tick generated_at = 0;
};

struct DenmMessage {
    PseudonymId pseudonym = 0;
    DenmCause cause = DenmCause::HardBraking;
    Tick event_time = 0;
    double x = 0;
    double y = 0;
    Tick generated_at = 0;
};

struct StationCapability {
    PseudonymId pseudonym = 0;
    bool willing = true;
    std::vector<std::string> capabilities;
    Tick generated_at = 0;
};

inline Bytes cam_body(const CamMessage& m) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MessageType::Cam));
    w.u64(m.pseudonym);
    w.f64(m.x);
    w.f64(m.y);
    w.f64(m.heading);
    w.f64(m.speed);
    w.u64(m.generated_at);
    return w.take();
}

inline Bytes denm_body(const DenmMessage& m) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MessageType::Denm));
    w.u64(m.pseudonym);
    w.u8(static_cast<std::uint8_t>(m.cause));
    w.u64(m.event_time);
    w.f64(m.x);
    w.f64(m.y);
    w.u64(m.generated_at);
    return w.take();
}

inline Bytes capability_body(const StationCapability& m) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MessageType::Capability));
    w.u64(m.pseudonym);
    w.u8(m.willing ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(m.capabilities.size()));
    for (const std::string& c : m.capabilities) w.str(c);
    w.u64(m.generated_at);
    return w.take();
}

/// A signed V2X message as it travels: body, the sender's ticket, and the
/// body signature under the ticket key.
struct SignedMessage {
    Bytes body;
    pki::AuthorizationTicket ticket;
    crypto::Signature sig{};

    bool operator==(const SignedMessage&) const = default;
};

inline Bytes serialize_message(const SignedMessage& m) {
    ByteWriter w;
    w.blob(view(m.body));
    pki::put_ticket(w, m.ticket);
    w.raw(m.sig);
    return w.take();
}

inline std::optional<SignedMessage> parse_message(ByteView bytes) {
    ByteReader r(bytes);
    SignedMessage m;
    m.body = r.blob();
    auto ticket = pki::get_ticket(r);
    if (!ticket) return std::nullopt;
    m.ticket = *ticket;
    m.sig = r.arr<64>();
    if (!r.done()) return std::nullopt;
    return m;
}

inline SignedMessage sign_message(Bytes body, const pki::AuthorizationTicket& ticket,
                                  const crypto::SecretKey& ticket_key) {
    SignedMessage m;
    m.body = std::move(body);
    m.ticket = ticket;
    m.sig = crypto::sign(ticket_key, view(m.body));
    return m;
}

/// Parsed, verified inbound message content.
struct Inbound {
    MessageType type = MessageType::Cam;
    PseudonymId pseudonym = 0;
    Tick generated_at = 0;
    std::optional<CamMessage> cam;
    std::optional<DenmMessage> denm;
    std::optional<StationCapability> capability;
};

inline std::optional<Inbound> parse_body(ByteView body) {
    ByteReader r(body);
    Inbound in;
    auto type = r.u8();
    in.pseudonym = r.u64();
    switch (type) {
        case 1: {
            CamMessage m;
            m.pseudonym = in.pseudonym;
            m.x = r.f64();
            m.y = r.f64();
            m.heading = r.f64();
            m.speed = r.f64();
            m.generated_at = r.u64();
            if (!r.done()) return std::nullopt;
            in.type = MessageType::Cam;
            in.generated_at = m.generated_at;
            in.cam = m;
            return in;
        }
        case 2: {
            DenmMessage m;
            m.pseudonym = in.pseudonym;
            m.cause = static_cast<DenmCause>(r.u8());
            m.event_time = r.u64();
            m.x = r.f64();
            m.y = r.f64();
            m.generated_at = r.u64();
            if (!r.done()) return std::nullopt;
            in.type = MessageType::Denm;
            in.generated_at = m.generated_at;
            in.denm = m;
            return in;
        }
        case 3: {
            StationCapability m;
            m.pseudonym = in.pseudonym;
            m.willing = r.u8() != 0;
            std::uint32_t n = r.u32();
            if (!r.ok() || n > body.size()) return std::nullopt;
            for (std::uint32_t i = 0; i < n; ++i) m.capabilities.push_back(r.str());
            m.generated_at = r.u64();
            if (!r.done()) return std::nullopt;
            in.type = MessageType::Capability;
            in.generated_at = m.generated_at;
            in.capability = m;
            return in;
        }
        default:
            return std::nullopt;
    }
}

/// Per-receiver replay defense: duplicate signatures are rejected, as are
/// messages older than the freshness window.
class ReceiverState {
public:
    bool seen(const crypto::Signature& sig) const { return seen_.contains(sig); }
    void remember(const crypto::Signature& sig) { seen_.insert(sig); }

private:
    std::set<crypto::Signature> seen_;
};

/// Verifies a hostile signed message: ticket chain, body signature,
/// freshness, duplicates. On success the caller records it as V2xInbound;
/// on failure the caller logs a SystemHealth rejection record.
inline Result<Inbound> receive(const SignedMessage& m, const pki::TrustContext& trust, Tick now,
                               Tick freshness_window, ReceiverState& state) {
    auto ticket_ok = pki::verify_ticket(m.ticket, trust, now);
    if (!ticket_ok) return ticket_ok.error();
    if (!crypto::verify(m.ticket.pub, view(m.body), m.sig))
        return make_error(Errc::BadSignature, "body signature invalid");
    auto in = parse_body(view(m.body));
    if (!in) return make_error(Errc::BadMessage, "unparseable body");
    if (in->pseudonym != m.ticket.pseudonym)
        return make_error(Errc::BadSignature, "body pseudonym does not match ticket");
    if (in->generated_at > now || now - in->generated_at > freshness_window)
        return make_error(Errc::StaleMessage,
                          "generated_at=" + std::to_string(in->generated_at) +
                              " now=" + std::to_string(now));
    if (state.seen(m.sig)) return make_error(Errc::DuplicateMessage, "signature already seen");
    state.remember(m.sig);
    return *in;
}

struct StationPos {
    std::string id;
    double x = 0;
    double y = 0;
};

inline double distance(double x1, double y1, double x2, double y2) {
    double dx = x1 - x2;
    double dy = y1 - y2;
    return std::sqrt(dx * dx + dy * dy);
}

/// Stations within range of the sender, excluding the sender itself.
inline std::vector<std::string> recipients(const std::vector<StationPos>& stations,
                                           const std::string& sender_id, double range) {
    const StationPos* sender = nullptr;
    for (const StationPos& s : stations) {
        if (s.id == sender_id) {
            sender = &s;
            break;
        }
    }
    std::vector<std::string> out;
    if (!sender) return out;
    for (const StationPos& s : stations) {
        if (s.id == sender_id) continue;
        if (distance(sender->x, sender->y, s.x, s.y) <= range) out.push_back(s.id);
    }
    return out;
}

/// Default deterministic event rules: scripted collision dominates, then
/// hard braking when deceleration exceeds the threshold.
inline std::optional<DenmCause> detect_event(double prev_speed, double speed, double dt_seconds,
                                             double decel_threshold, bool scripted_collision) {
    if (scripted_collision) return DenmCause::Collision;
    if (dt_seconds <= 0) return std::nullopt;
    double decel = (prev_speed - speed) / dt_seconds;
    if (decel > decel_threshold) return DenmCause::HardBraking;
    return std::nullopt;
}

/// Latest capability advertisement per station plus where it came from.
struct AdvertisedStation {
    double x = 0;
    double y = 0;
    StationCapability capability;
};

/// Brute filter over advertisements; results are pseudonymous.
inline std::vector<StationCapability> discover(
    const std::map<std::string, AdvertisedStation>& ads, double x, double y, double radius) {
    std::vector<StationCapability> out;
    for (const auto& [id, ad] : ads) {
        if (distance(x, y, ad.x, ad.y) <= radius) out.push_back(ad.capability);
    }
    return out;
}

/// Tickets attached to accepted inbound messages, kept for provenance
/// re-verification.
using TicketStore = std::map<PseudonymId, pki::AuthorizationTicket>;

inline Bytes serialize_ticket_store(const TicketStore& store) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(store.size()));
    for (const auto& [p, t] : store) {
        w.u64(p);
        pki::put_ticket(w, t);
    }
    return w.take();
}

inline Result<TicketStore> parse_ticket_store(ByteView bytes) {
    ByteReader r(bytes);
    TicketStore store;
    std::uint32_t n = r.u32();
    if (!r.ok() || n > bytes.size()) return make_error(Errc::BadContainer, "bad ticket count");
    for (std::uint32_t i = 0; i < n; ++i) {
        PseudonymId p = r.u64();
        auto t = pki::get_ticket(r);
        if (!t) return make_error(Errc::BadContainer, "bad ticket");
        store.emplace(p, *t);
    }
    if (!r.done()) return make_error(Errc::BadContainer, "trailing bytes");
    return store;
}

/// Inbound payloads as recorded: semantic content only, no pseudonym (the
/// pseudonym lives in the record source, where redaction can handle it).
inline Bytes cam_inbound_payload(const CamMessage& m) {
    ByteWriter w;
    w.u8(payload::kCamInbound);
    w.f64(m.x);
    w.f64(m.y);
    w.f64(m.heading);
    w.f64(m.speed);
    w.u64(m.generated_at);
    return w.take();
}

inline Bytes denm_inbound_payload(const DenmMessage& m) {
    ByteWriter w;
    w.u8(payload::kDenmInbound);
    w.u8(static_cast<std::uint8_t>(m.cause));
    w.u64(m.event_time);
    w.f64(m.x);
    w.f64(m.y);
    w.u64(m.generated_at);
    return w.take();
}

inline Bytes cam_outbound_payload(const CamMessage& m) {
    ByteWriter w;
    w.u8(payload::kCamOutbound);
    w.f64(m.x);
    w.f64(m.y);
    w.f64(m.heading);
    w.f64(m.speed);
    w.u64(m.generated_at);
    return w.take();
}

inline Bytes denm_outbound_payload(const DenmMessage& m) {
    ByteWriter w;
    w.u8(payload::kDenmOutbound);
    w.u8(static_cast<std::uint8_t>(m.cause));
    w.u64(m.event_time);
    w.f64(m.x);
    w.f64(m.y);
    w.u64(m.generated_at);
    return w.take();
}

} // namespace edr::v2x
