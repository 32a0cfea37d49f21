#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edr/bytes.hpp"
#include "edr/crypto.hpp"
#include "edr/enrich.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"

// The EDR/AD storage engine: category filtering, a hash-chained append-only
// log, vehicle-signed segments, retention via integrity-preserving
// tombstones, and a synchronously mirrored copy. Entries are never removed;
// expiry drops payloads but keeps record hashes so the chain stays valid.

namespace edr::rec {

inline constexpr crypto::Hash256 kGenesis{}; // 256 bits of zero

struct RetentionRule {
    bool store = true;
    std::optional<Tick> max_age;                 // unlimited when absent
    std::optional<std::uint64_t> ring_capacity;  // unlimited when absent
};

/// Categories absent from the policy default to store-everything.
class RetentionPolicy {
public:
    void set(RecordCategory category, RetentionRule rule) { rules_[category] = rule; }

    RetentionRule rule(RecordCategory category) const {
        auto it = rules_.find(category);
        return it == rules_.end() ? RetentionRule{} : it->second;
    }

private:
    std::map<RecordCategory, RetentionRule> rules_;
};

inline bool filter(const EnrichedRecord& record, const RetentionPolicy& policy) {
    return policy.rule(record.category).store;
}

struct HashChainEntry {
    std::uint64_t seq = 0;
    crypto::Hash256 record_hash{};
    crypto::Hash256 prev{};
    crypto::Hash256 chain{}; // H(prev || record_hash)

    bool operator==(const HashChainEntry&) const = default;
};

struct StoredRecord {
    EnrichedRecord record;
    bool tombstoned = false;

    bool operator==(const StoredRecord&) const = default;
};

struct SignedSegment {
    std::uint64_t first_seq = 0;
    std::uint64_t last_seq = 0;
    crypto::Hash256 head_chain{};
    crypto::Signature signature{};

    bool operator==(const SignedSegment&) const = default;
};

inline Bytes segment_message(std::uint64_t first, std::uint64_t last,
                             const crypto::Hash256& head) {
    ByteWriter w;
    w.u64(first);
    w.u64(last);
    w.raw(head);
    return w.take();
}

struct LogCopy {
    std::vector<HashChainEntry> entries;
    std::vector<StoredRecord> records;

    bool operator==(const LogCopy&) const = default;

    std::uint64_t size() const { return entries.size(); }
    const crypto::Hash256& head(const crypto::Hash256& genesis) const {
        return entries.empty() ? genesis : entries.back().chain;
    }
};

struct ChainStatus {
    std::optional<std::uint64_t> first_bad;

    bool ok() const { return !first_bad.has_value(); }
};

/// Checks one log slot in isolation: sequence number, linkage equation, and
/// (for live records) that the stored content still hashes to record_hash.
inline bool slot_valid(const LogCopy& log, std::uint64_t i, const crypto::Hash256& prev_chain) {
    const HashChainEntry& e = log.entries[i];
    if (e.seq != i) return false;
    if (e.prev != prev_chain) return false;
    if (e.chain != crypto::chain_hash(e.prev, e.record_hash)) return false;
    const StoredRecord& s = log.records[i];
    if (!s.tombstoned && crypto::sha256(serialize_record(s.record)) != e.record_hash) return false;
    return true;
}

/// Full recomputation over a possibly hostile log. Returns the smallest seq
/// whose recomputation fails.
inline ChainStatus verify_chain(const LogCopy& log, const crypto::Hash256& genesis) {
    if (log.entries.size() != log.records.size())
        return ChainStatus{std::min<std::uint64_t>(log.entries.size(), log.records.size())};
    crypto::Hash256 prev = genesis;
    for (std::uint64_t i = 0; i < log.size(); ++i) {
        if (!slot_valid(log, i, prev)) return ChainStatus{i};
        prev = log.entries[i].chain;
    }
    return ChainStatus{};
}

enum class SegmentStatus : std::uint8_t { Valid, BadSignature, HeadMismatch, RangeMissing };

inline std::string_view to_string(SegmentStatus s) {
    switch (s) {
        case SegmentStatus::Valid: return "Valid";
        case SegmentStatus::BadSignature: return "BadSignature";
        case SegmentStatus::HeadMismatch: return "HeadMismatch";
        case SegmentStatus::RangeMissing: return "RangeMissing";
    }
    return "?";
}

/// Seal soundness: signature under the paired vehicle key plus the head
/// chain recomputed from the stored records themselves (tombstones fall back
/// to the stored record hash).
inline SegmentStatus verify_segment(const SignedSegment& seg, const LogCopy& log,
                                    const crypto::Hash256& genesis,
                                    const crypto::PublicKey& vehicle_key) {
    if (!crypto::verify(vehicle_key,
                        view(segment_message(seg.first_seq, seg.last_seq, seg.head_chain)),
                        seg.signature))
        return SegmentStatus::BadSignature;
    if (seg.last_seq >= log.size() || seg.first_seq > seg.last_seq)
        return SegmentStatus::RangeMissing;
    crypto::Hash256 chain = genesis;
    for (std::uint64_t i = 0; i <= seg.last_seq; ++i) {
        crypto::Hash256 record_hash = log.records[i].tombstoned
                                          ? log.entries[i].record_hash
                                          : crypto::sha256(serialize_record(log.records[i].record));
        chain = crypto::chain_hash(chain, record_hash);
    }
    if (chain != seg.head_chain) return SegmentStatus::HeadMismatch;
    return SegmentStatus::Valid;
}

enum class Side : std::uint8_t { Primary, Mirror };

struct RecoverOutcome {
    bool primary_repaired = false;
    bool mirror_repaired = false;
};

class Recorder {
public:
    explicit Recorder(RetentionPolicy policy = {}, crypto::Hash256 genesis = kGenesis)
        : policy_(std::move(policy)), genesis_(genesis) {}

    const crypto::Hash256& genesis() const { return genesis_; }
    const RetentionPolicy& policy() const { return policy_; }
    const LogCopy& primary() const { return primary_; }
    const LogCopy& mirror() const { return mirror_; }

    /// Tamper-injection surfaces for the harness; production code never
    /// mutates a copy directly.
    LogCopy& damage_primary() { return primary_; }
    LogCopy& damage_mirror() { return mirror_; }

    bool keep(const EnrichedRecord& record) const { return filter(record, policy_); }

    Result<HashChainEntry> append(const EnrichedRecord& record) {
        RetentionRule rule = policy_.rule(record.category);
        if (rule.ring_capacity) {
            if (*rule.ring_capacity == 0)
                return make_error(Errc::StorageFull,
                                  std::string(to_string(record.category)) + " ring capacity 0");
            auto& live = live_by_cat_[record.category];
            while (live.size() >= *rule.ring_capacity) {
                tombstone(live.front());
                live.pop_front();
            }
        }
        std::uint64_t seq = primary_.size();
        HashChainEntry entry;
        entry.seq = seq;
        entry.record_hash = crypto::sha256(serialize_record(record));
        entry.prev = primary_.head(genesis_);
        entry.chain = crypto::chain_hash(entry.prev, entry.record_hash);
        primary_.entries.push_back(entry);
        primary_.records.push_back(StoredRecord{record, false});
        mirror_.entries.push_back(entry);
        mirror_.records.push_back(StoredRecord{record, false});
        live_by_cat_[record.category].push_back(seq);
        return entry;
    }

    ChainStatus verify() const { return verify_chain(primary_, genesis_); }

    Result<SignedSegment> seal_segment(std::uint64_t first, std::uint64_t last,
                                       const crypto::SecretKey& vehicle_key) {
        if (last < first || last >= primary_.size())
            return make_error(Errc::RangeUnavailable,
                              "[" + std::to_string(first) + "," + std::to_string(last) + "]");
        // A previously sealed overlapping range whose head no longer
        // recomputes means the log was rewritten under the seal.
        for (const SignedSegment& seg : segments_) {
            bool overlaps = seg.first_seq <= last && first <= seg.last_seq;
            if (overlaps && primary_.entries[seg.last_seq].chain != seg.head_chain)
                return make_error(Errc::SegmentConflict,
                                  "sealed range [" + std::to_string(seg.first_seq) + "," +
                                      std::to_string(seg.last_seq) + "] head mismatch");
        }
        SignedSegment seg;
        seg.first_seq = first;
        seg.last_seq = last;
        seg.head_chain = primary_.entries[last].chain;
        seg.signature = crypto::sign(vehicle_key, view(segment_message(first, last, seg.head_chain)));
        segments_.push_back(seg);
        return seg;
    }

    const std::vector<SignedSegment>& segments() const { return segments_; }

    /// Replaces expired payloads with tombstones; entries stay, the chain
    /// stays valid.
    std::uint64_t expire(Tick now, const RetentionPolicy& policy) {
        std::uint64_t count = 0;
        for (std::uint64_t i = 0; i < primary_.size(); ++i) {
            StoredRecord& s = primary_.records[i];
            if (s.tombstoned) continue;
            RetentionRule rule = policy.rule(s.record.category);
            if (!rule.max_age) continue;
            if (now > s.record.tick && now - s.record.tick > *rule.max_age) {
                tombstone(i);
                auto& live = live_by_cat_[s.record.category];
                std::erase(live, i);
                ++count;
            }
        }
        return count;
    }

    std::uint64_t expire(Tick now) { return expire(now, policy_); }

    /// Cross-patches primary and mirror: per slot, whichever copy still
    /// recomputes wins. Fails only when the same slot is damaged in both.
    Result<RecoverOutcome> recover() {
        ChainStatus p = verify_chain(primary_, genesis_);
        ChainStatus m = verify_chain(mirror_, genesis_);
        if (p.ok() && m.ok()) {
            if (primary_ == mirror_) return RecoverOutcome{};
            return make_error(Errc::BothCopiesDamaged, "copies diverge but both verify");
        }
        if (primary_.size() != mirror_.size())
            return make_error(Errc::BothCopiesDamaged, "copies differ in length");
        LogCopy recovered;
        recovered.entries.reserve(primary_.size());
        recovered.records.reserve(primary_.size());
        crypto::Hash256 prev = genesis_;
        for (std::uint64_t i = 0; i < primary_.size(); ++i) {
            const LogCopy* pick = nullptr;
            if (slot_valid(primary_, i, prev)) pick = &primary_;
            else if (slot_valid(mirror_, i, prev)) pick = &mirror_;
            if (!pick)
                return make_error(Errc::BothCopiesDamaged, "seq " + std::to_string(i));
            recovered.entries.push_back(pick->entries[i]);
            recovered.records.push_back(pick->records[i]);
            prev = pick->entries[i].chain;
        }
        RecoverOutcome outcome{recovered != primary_, recovered != mirror_};
        primary_ = recovered;
        mirror_ = recovered;
        return outcome;
    }

private:
    void tombstone(std::uint64_t seq) {
        primary_.records[seq].record.payload.clear();
        primary_.records[seq].tombstoned = true;
        mirror_.records[seq].record.payload.clear();
        mirror_.records[seq].tombstoned = true;
    }

    RetentionPolicy policy_;
    crypto::Hash256 genesis_;
    LogCopy primary_;
    LogCopy mirror_;
    std::vector<SignedSegment> segments_;
    std::map<RecordCategory, std::deque<std::uint64_t>> live_by_cat_;
};

// --- EDRA container -------------------------------------------------------
//
// Log container, bit-exact layout (all integers big-endian):
//   magic "EDRA" | u16 version=1 | u8 kind=1
//   str vehicle | 32B genesis | u8 has_pubkey | [32B pubkey]
//   u64 n
//   n x entry  { u64 seq | 32B record_hash | 32B prev | 32B chain }
//   n x stored { u8 flags (bit0 = tombstoned) | blob(serialized record) }
//   u64 n_segments
//   n_segments x { u64 first | u64 last | 32B head_chain | 64B signature }

inline constexpr char kMagic[4] = {'E', 'D', 'R', 'A'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint8_t kKindLog = 1;
inline constexpr std::uint8_t kKindQueryResult = 2;

struct ExportedLog {
    VehicleId vehicle;
    crypto::Hash256 genesis{};
    std::optional<crypto::PublicKey> vehicle_pubkey;
    LogCopy log;
    std::vector<SignedSegment> segments;
};

inline Bytes export_log(const ExportedLog& e) {
    ByteWriter w;
    w.raw(view(std::string_view(kMagic, 4)));
    w.u16(kContainerVersion);
    w.u8(kKindLog);
    w.str(e.vehicle);
    w.raw(e.genesis);
    w.u8(e.vehicle_pubkey ? 1 : 0);
    if (e.vehicle_pubkey) w.raw(*e.vehicle_pubkey);
    w.u64(e.log.size());
    for (const HashChainEntry& entry : e.log.entries) {
        w.u64(entry.seq);
        w.raw(entry.record_hash);
        w.raw(entry.prev);
        w.raw(entry.chain);
    }
    for (const StoredRecord& s : e.log.records) {
        w.u8(s.tombstoned ? 1 : 0);
        w.blob(view(serialize_record(s.record)));
    }
    w.u64(e.segments.size());
    for (const SignedSegment& seg : e.segments) {
        w.u64(seg.first_seq);
        w.u64(seg.last_seq);
        w.raw(seg.head_chain);
        w.raw(seg.signature);
    }
    return w.take();
}

inline Result<ExportedLog> import_log(ByteView bytes) {
    ByteReader r(bytes);
    Bytes magic = r.raw(4);
    if (!r.ok() || std::string(magic.begin(), magic.end()) != std::string(kMagic, 4))
        return make_error(Errc::BadContainer, "bad magic");
    if (r.u16() != kContainerVersion) return make_error(Errc::BadContainer, "bad version");
    if (r.u8() != kKindLog) return make_error(Errc::BadContainer, "not a log container");
    ExportedLog e;
    e.vehicle = r.str();
    e.genesis = r.arr<32>();
    if (r.u8() == 1) e.vehicle_pubkey = r.arr<32>();
    std::uint64_t n = r.u64();
    if (!r.ok() || n > bytes.size()) return make_error(Errc::BadContainer, "bad entry count");
    e.log.entries.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        HashChainEntry entry;
        entry.seq = r.u64();
        entry.record_hash = r.arr<32>();
        entry.prev = r.arr<32>();
        entry.chain = r.arr<32>();
        e.log.entries.push_back(entry);
    }
    e.log.records.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint8_t flags = r.u8();
        Bytes rec_bytes = r.blob();
        if (!r.ok()) return make_error(Errc::BadContainer, "truncated record");
        auto rec = parse_record(view(rec_bytes));
        if (!rec) return make_error(Errc::BadContainer, "bad record at " + std::to_string(i));
        e.log.records.push_back(StoredRecord{std::move(*rec), (flags & 1) != 0});
    }
    std::uint64_t nseg = r.u64();
    if (!r.ok() || nseg > bytes.size()) return make_error(Errc::BadContainer, "bad segment count");
    for (std::uint64_t i = 0; i < nseg; ++i) {
        SignedSegment seg;
        seg.first_seq = r.u64();
        seg.last_seq = r.u64();
        seg.head_chain = r.arr<32>();
        seg.signature = r.arr<64>();
        e.segments.push_back(seg);
    }
    if (!r.done()) return make_error(Errc::BadContainer, "trailing bytes");
    return e;
}

/// Line-delimited structured-text dump for debugging.
inline std::string dump_text(const LogCopy& log) {
    std::ostringstream out;
    for (std::uint64_t i = 0; i < log.size(); ++i) {
        const HashChainEntry& e = log.entries[i];
        const StoredRecord& s = log.records[i];
        out << "seq=" << e.seq << " tick=" << s.record.tick
            << " source=" << to_string(s.record.source)
            << " category=" << to_string(s.record.category)
            << " consent=" << to_string(s.record.consent.state) << ":v" << s.record.consent.version
            << " tombstone=" << (s.tombstoned ? 1 : 0)
            << " payload=" << to_hex(view(s.record.payload))
            << " record_hash=" << to_hex(e.record_hash) << " chain=" << to_hex(e.chain) << "\n";
    }
    return out.str();
}

} // namespace edr::rec
