#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>

#include <sodium.h>

#include "edr/bytes.hpp"

// Single abstraction point for all cryptographic primitives. Everything is
// deterministic: hashes, HMAC tags, Ed25519 signatures, and key generation
// seeded from scenario material, so identical runs produce identical bytes.

namespace edr::crypto {

using Hash256 = std::array<std::uint8_t, 32>;
using Mac128 = std::array<std::uint8_t, 16>;
using MacKey = std::array<std::uint8_t, 16>;
using Signature = std::array<std::uint8_t, 64>;
using PublicKey = std::array<std::uint8_t, 32>;
using SecretKey = std::array<std::uint8_t, 64>;
using Seed = std::array<std::uint8_t, 32>;

inline void ensure_init() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("sodium_init failed");
}

inline Hash256 sha256(ByteView data) {
    ensure_init();
    Hash256 out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

inline Hash256 sha256(const Bytes& data) { return sha256(view(data)); }

/// Chain step: H(prev || leaf).
inline Hash256 chain_hash(const Hash256& prev, const Hash256& leaf) {
    ByteWriter w;
    w.raw(prev);
    w.raw(leaf);
    return sha256(view(w.bytes()));
}

/// HMAC-SHA256 truncated to a 128-bit tag.
inline Mac128 hmac128(ByteView key, ByteView data) {
    ensure_init();
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.data(), key.size());
    crypto_auth_hmacsha256_update(&st, data.data(), data.size());
    std::array<std::uint8_t, crypto_auth_hmacsha256_BYTES> full{};
    crypto_auth_hmacsha256_final(&st, full.data());
    Mac128 tag{};
    std::memcpy(tag.data(), full.data(), tag.size());
    return tag;
}

inline Mac128 hmac128(const MacKey& key, ByteView data) {
    return hmac128(ByteView{key.data(), key.size()}, data);
}

inline bool mac_equal(const Mac128& a, const Mac128& b) {
    ensure_init();
    return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

struct KeyPair {
    PublicKey pub{};
    SecretKey sec{};
};

/// Ed25519 keypair from a 32-byte seed; same seed, same pair.
inline KeyPair keypair_from_seed(const Seed& seed) {
    ensure_init();
    KeyPair kp;
    crypto_sign_seed_keypair(kp.pub.data(), kp.sec.data(), seed.data());
    return kp;
}

inline Signature sign(const SecretKey& sk, ByteView data) {
    ensure_init();
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, data.data(), data.size(), sk.data());
    return sig;
}

inline bool verify(const PublicKey& pk, ByteView data, const Signature& sig) {
    ensure_init();
    return crypto_sign_verify_detached(sig.data(), data.data(), data.size(), pk.data()) == 0;
}

/// Domain-separated derivation: H(be64(seed) || label || be64(index)).
inline Seed derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    ByteWriter w;
    w.u64(seed);
    w.str(label);
    w.u64(index);
    return sha256(view(w.bytes()));
}

inline MacKey derive_mac_key(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    Seed s = derive_seed(seed, label, index);
    MacKey k{};
    std::memcpy(k.data(), s.data(), k.size());
    return k;
}

inline std::uint64_t derive_u64(std::uint64_t seed, std::string_view label) {
    Seed s = derive_seed(seed, label);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
}

/// splitmix64; stdlib engines are avoided so streams stay stable across
/// library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound) via rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

private:
    std::uint64_t state_;
};

} // namespace edr::crypto
