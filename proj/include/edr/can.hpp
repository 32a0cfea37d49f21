#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "edr/bytes.hpp"
#include "edr/crypto.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"

// In-vehicle CAN simulation: typed ECU nodes, per-sender session keys shared
// with the data-collection (EDR) node, authenticated frames with strictly
// increasing counters, and protocol-level software attestation. The bus is
// lossless and single-threaded; delivery order is a pure function of the
// queued frames.

namespace edr::can {

inline constexpr std::size_t kMaxPayload = 64; // CAN-FD frame bound

struct RawMessage {
    EcuId sender;
    Bytes payload;
    Tick bus_tick = 0;
};

inline Result<RawMessage> make_raw_message(EcuId sender, Bytes payload, Tick tick) {
    if (payload.size() > kMaxPayload)
        return make_error(Errc::PayloadTooLarge,
                          std::to_string(payload.size()) + " > " + std::to_string(kMaxPayload));
    return RawMessage{std::move(sender), std::move(payload), tick};
}

struct SessionKey {
    std::uint32_t key_id = 0;
    crypto::MacKey secret{};
    std::uint64_t counter = 0; // last value used by the sender
};

struct AuthenticatedFrame {
    RawMessage msg;
    std::uint64_t counter = 0;
    crypto::Mac128 tag{};
};

struct AttestationReport {
    EcuId node;
    crypto::Hash256 software_digest{};
    std::uint64_t fresh_nonce = 0;
    crypto::Mac128 tag{};
};

enum class AttestOutcome : std::uint8_t {
    Ok,
    UnknownNode,
    BadTag,
    StaleNonce,
    DigestMismatch,
};

inline std::string_view to_string(AttestOutcome o) {
    switch (o) {
        case AttestOutcome::Ok: return "Ok";
        case AttestOutcome::UnknownNode: return "UnknownNode";
        case AttestOutcome::BadTag: return "BadTag";
        case AttestOutcome::StaleNonce: return "StaleNonce";
        case AttestOutcome::DigestMismatch: return "DigestMismatch";
    }
    return "?";
}

/// MAC input layout, fixed for test-vector portability:
///   str(vehicle) | u16 node | u8 role | u64 counter | blob(payload)
inline Bytes frame_mac_input(const EcuId& sender, ByteView payload, std::uint64_t counter) {
    ByteWriter w;
    w.str(sender.vehicle);
    w.u16(sender.node);
    w.u8(static_cast<std::uint8_t>(sender.role));
    w.u64(counter);
    w.blob(payload);
    return w.take();
}

inline Bytes attest_mac_input(const EcuId& node, const crypto::Hash256& digest,
                              std::uint64_t nonce) {
    ByteWriter w;
    w.str(node.vehicle);
    w.u16(node.node);
    w.raw(digest);
    w.u64(nonce);
    return w.take();
}

struct VerifiedMessage {
    EcuId sender;
    Bytes payload;
    Tick bus_tick = 0;
    std::uint64_t counter = 0;
};

using KeyStore = std::map<EcuId, SessionKey>;

/// Receiver-side replay protection: strict last-accepted-counter per sender.
class ReplayState {
public:
    std::uint64_t last_accepted(const EcuId& sender) const {
        auto it = last_.find(sender);
        return it == last_.end() ? 0 : it->second;
    }

    void accept(const EcuId& sender, std::uint64_t counter) { last_[sender] = counter; }

private:
    std::map<EcuId, std::uint64_t> last_;
};

/// EDR-side verification. Hostile input expected: the frame may have been
/// forged, altered, or replayed.
inline Result<VerifiedMessage> authenticate_frame(const AuthenticatedFrame& frame,
                                                  const KeyStore& keys, ReplayState& window) {
    auto it = keys.find(frame.msg.sender);
    if (it == keys.end())
        return make_error(Errc::UnknownSender, to_string(frame.msg.sender));
    Bytes input = frame_mac_input(frame.msg.sender, view(frame.msg.payload), frame.counter);
    crypto::Mac128 expected = crypto::hmac128(it->second.secret, view(input));
    if (!crypto::mac_equal(expected, frame.tag))
        return make_error(Errc::BadMac, to_string(frame.msg.sender));
    if (frame.counter <= window.last_accepted(frame.msg.sender))
        return make_error(Errc::ReplayDetected,
                          "counter " + std::to_string(frame.counter) + " <= last accepted");
    window.accept(frame.msg.sender, frame.counter);
    return VerifiedMessage{frame.msg.sender, frame.msg.payload, frame.msg.bus_tick, frame.counter};
}

class Bus {
public:
    Bus(VehicleId vehicle, std::uint64_t seed) : vehicle_(std::move(vehicle)), seed_(seed) {}

    /// Registers a node and provisions its session + attestation keys with
    /// the EDR/AD node. At most one DataCollection node per vehicle.
    Result<EcuId> register_ecu(EcuRole role, const crypto::Hash256& expected_digest) {
        if (sealed_) return make_error(Errc::BusSealed, vehicle_);
        if (role == EcuRole::DataCollection && edr_node_)
            return make_error(Errc::DuplicateBlackBox, vehicle_);
        EcuId id{vehicle_, next_node_++, role};
        Node node;
        node.expected_digest = expected_digest;
        node.current_digest = expected_digest;
        node.attest_key = derive_key("attest", id.node);
        nodes_.emplace(id, node);
        SessionKey key;
        key.key_id = id.node;
        key.secret = derive_key("session", id.node);
        keys_.emplace(id, key);
        if (role == EcuRole::DataCollection) edr_node_ = id;
        return id;
    }

    void seal() { sealed_ = true; }
    bool sealed() const { return sealed_; }

    Result<AuthenticatedFrame> send(const EcuId& from, Bytes payload) {
        auto key_it = keys_.find(from);
        if (key_it == keys_.end())
            return make_error(Errc::UnregisteredSender, to_string(from));
        auto raw = make_raw_message(from, std::move(payload), now_);
        if (!raw) return raw.error();
        SessionKey& key = key_it->second;
        std::uint64_t counter = ++key.counter;
        Bytes input = frame_mac_input(from, view(raw.value().payload), counter);
        AuthenticatedFrame frame{std::move(raw).value(), counter,
                                 crypto::hmac128(key.secret, view(input))};
        pending_.push_back(frame);
        return frame;
    }

    /// Delivers all queued frames in (sender, counter) order, then advances
    /// the bus tick.
    std::vector<AuthenticatedFrame> tick() {
        std::vector<AuthenticatedFrame> out = std::move(pending_);
        pending_.clear();
        std::sort(out.begin(), out.end(), [](const AuthenticatedFrame& a, const AuthenticatedFrame& b) {
            if (a.msg.sender != b.msg.sender) return a.msg.sender < b.msg.sender;
            return a.counter < b.counter;
        });
        ++now_;
        return out;
    }

    Tick now() const { return now_; }
    const VehicleId& vehicle() const { return vehicle_; }
    const KeyStore& keys() const { return keys_; }
    std::optional<EcuId> edr_node() const { return edr_node_; }

    Result<AttestationReport> attest_node(const EcuId& node, std::uint64_t nonce) const {
        auto it = nodes_.find(node);
        if (it == nodes_.end()) return make_error(Errc::UnknownNode, to_string(node));
        AttestationReport report;
        report.node = node;
        report.software_digest = it->second.current_digest;
        report.fresh_nonce = nonce;
        Bytes input = attest_mac_input(node, report.software_digest, nonce);
        report.tag = crypto::hmac128(it->second.attest_key, view(input));
        return report;
    }

    /// Checks a report against the digest registry and the expected nonce.
    AttestOutcome verify_attestation(const AttestationReport& report,
                                     std::uint64_t expected_nonce) const {
        auto it = nodes_.find(report.node);
        if (it == nodes_.end()) return AttestOutcome::UnknownNode;
        Bytes input = attest_mac_input(report.node, report.software_digest, report.fresh_nonce);
        crypto::Mac128 expected = crypto::hmac128(it->second.attest_key, view(input));
        if (!crypto::mac_equal(expected, report.tag)) return AttestOutcome::BadTag;
        if (report.fresh_nonce != expected_nonce) return AttestOutcome::StaleNonce;
        if (report.software_digest != it->second.expected_digest)
            return AttestOutcome::DigestMismatch;
        return AttestOutcome::Ok;
    }

    /// Harness hook: compromises a node so the next attestation mismatches.
    Result<void> set_current_digest(const EcuId& node, const crypto::Hash256& digest) {
        auto it = nodes_.find(node);
        if (it == nodes_.end()) return make_error(Errc::UnknownNode, to_string(node));
        it->second.current_digest = digest;
        return {};
    }

    std::vector<EcuId> node_ids() const {
        std::vector<EcuId> out;
        out.reserve(nodes_.size());
        for (const auto& [id, _] : nodes_) out.push_back(id);
        return out;
    }

private:
    struct Node {
        crypto::Hash256 expected_digest{};
        crypto::Hash256 current_digest{};
        crypto::MacKey attest_key{};
    };

    crypto::MacKey derive_key(std::string_view label, std::uint16_t node) const {
        return crypto::derive_mac_key(seed_, std::string(label) + ":" + vehicle_, node);
    }

    VehicleId vehicle_;
    std::uint64_t seed_;
    std::uint16_t next_node_ = 0;
    bool sealed_ = false;
    Tick now_ = 0;
    std::map<EcuId, Node> nodes_;
    KeyStore keys_;
    std::optional<EcuId> edr_node_;
    std::vector<AuthenticatedFrame> pending_;
};

} // namespace edr::can
