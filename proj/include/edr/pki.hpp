#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edr/bytes.hpp"
#include "edr/crypto.hpp"
#include "edr/result.hpp"
#include "edr/types.hpp"

// C-ITS trust model: one root CA, one enrolment authority and one
// authorization authority per scenario, governed by a trust list manager.
// Long-term enrolment credentials stay inside the PKI; V2X traffic uses
// short-lived pseudonym tickets that share no linkable field. The AA keeps
// the only pseudonym-to-vehicle mapping (escrow), released solely under a
// warrant, and every release is appended to the authority's own audit chain.

namespace edr::pki {

inline constexpr Tick kDefaultRotationPeriod = 300;

enum class CertKind : std::uint8_t { Root = 0, Enrolment = 1, Authorization = 2 };

struct Certificate {
    std::string subject;
    CertKind kind = CertKind::Root;
    crypto::PublicKey pub{};
    Tick valid_from = 0;
    Tick valid_to = 0;
    std::string issuer;
    crypto::Signature sig{};

    bool operator==(const Certificate&) const = default;
};

inline Bytes certificate_message(const Certificate& c) {
    ByteWriter w;
    w.str(c.subject);
    w.u8(static_cast<std::uint8_t>(c.kind));
    w.raw(c.pub);
    w.u64(c.valid_from);
    w.u64(c.valid_to);
    w.str(c.issuer);
    return w.take();
}

struct TrustList {
    std::map<std::string, Certificate> roots;
    std::uint32_t version = 0;
    crypto::PublicKey manager_key{};
    crypto::Signature manager_sig{};
};

inline Bytes trust_list_message(const std::map<std::string, Certificate>& roots,
                                std::uint32_t version) {
    ByteWriter w;
    w.u32(version);
    w.u32(static_cast<std::uint32_t>(roots.size()));
    for (const auto& [id, cert] : roots) {
        w.str(id);
        w.blob(view(certificate_message(cert)));
        w.raw(cert.sig);
    }
    return w.take();
}

struct EnrolmentCredential {
    VehicleId vehicle;
    crypto::PublicKey pub{};
    std::string issuer;
    Tick valid_from = 0;
    Tick valid_to = 0;
    crypto::Signature sig{};

    bool operator==(const EnrolmentCredential&) const = default;
};

inline Bytes credential_message(const EnrolmentCredential& c) {
    ByteWriter w;
    w.str(c.vehicle);
    w.raw(c.pub);
    w.str(c.issuer);
    w.u64(c.valid_from);
    w.u64(c.valid_to);
    return w.take();
}

/// Short-lived pseudonym certificate. Carries nothing derivable from the
/// vehicle identity; consecutive tickets of one vehicle tile their windows.
struct AuthorizationTicket {
    PseudonymId pseudonym = 0;
    crypto::PublicKey pub{};
    Tick valid_from = 0;
    Tick valid_to = 0;
    std::string issuer;
    crypto::Signature sig{};

    bool operator==(const AuthorizationTicket&) const = default;
};

inline Bytes ticket_message(const AuthorizationTicket& t) {
    ByteWriter w;
    w.u64(t.pseudonym);
    w.raw(t.pub);
    w.u64(t.valid_from);
    w.u64(t.valid_to);
    w.str(t.issuer);
    return w.take();
}

inline void put_ticket(ByteWriter& w, const AuthorizationTicket& t) {
    w.blob(view(ticket_message(t)));
    w.raw(t.sig);
}

inline std::optional<AuthorizationTicket> get_ticket(ByteReader& r) {
    Bytes msg = r.blob();
    crypto::Signature sig = r.arr<64>();
    if (!r.ok()) return std::nullopt;
    ByteReader mr(view(msg));
    AuthorizationTicket t;
    t.pseudonym = mr.u64();
    t.pub = mr.arr<32>();
    t.valid_from = mr.u64();
    t.valid_to = mr.u64();
    t.issuer = mr.str();
    t.sig = sig;
    if (!mr.done()) return std::nullopt;
    return t;
}

struct RevocationState {
    std::set<VehicleId> credentials;
    std::set<PseudonymId> tickets;
};

/// What a verifier holds: the trust list, the authority certificates
/// distributed with it, and the current revocation state.
struct TrustContext {
    TrustList list;
    std::map<std::string, Certificate> authorities;
    RevocationState revoked;
};

inline bool certificate_signed_by(const Certificate& cert, const crypto::PublicKey& issuer_key) {
    return crypto::verify(issuer_key, view(certificate_message(cert)), cert.sig);
}

/// Chain walk for an authority certificate: its root must be on the trust
/// list and the signatures must hold.
inline Result<const Certificate*> chain_to_root(const std::string& authority_id,
                                                const TrustContext& ctx) {
    auto it = ctx.authorities.find(authority_id);
    if (it == ctx.authorities.end())
        return make_error(Errc::UntrustedRoot, "unknown authority " + authority_id);
    const Certificate& cert = it->second;
    auto root_it = ctx.list.roots.find(cert.issuer);
    if (root_it == ctx.list.roots.end())
        return make_error(Errc::UntrustedRoot, "root " + cert.issuer + " not on trust list");
    const Certificate& root = root_it->second;
    if (!certificate_signed_by(root, root.pub))
        return make_error(Errc::UntrustedRoot, "root self-signature invalid");
    if (!certificate_signed_by(cert, root.pub))
        return make_error(Errc::BadSignature, "authority certificate signature invalid");
    return &cert;
}

inline Result<void> verify_ticket(const AuthorizationTicket& t, const TrustContext& ctx,
                                  Tick now) {
    auto issuer = chain_to_root(t.issuer, ctx);
    if (!issuer) return issuer.error();
    if (!crypto::verify(issuer.value()->pub, view(ticket_message(t)), t.sig))
        return make_error(Errc::BadSignature, "ticket signature invalid");
    if (now < t.valid_from || now > t.valid_to)
        return make_error(Errc::Expired, "now=" + std::to_string(now));
    if (ctx.revoked.tickets.contains(t.pseudonym))
        return make_error(Errc::Revoked, "pseudonym revoked");
    return {};
}

inline Result<void> verify_credential(const EnrolmentCredential& c, const TrustContext& ctx,
                                      Tick now) {
    auto issuer = chain_to_root(c.issuer, ctx);
    if (!issuer) return issuer.error();
    if (!crypto::verify(issuer.value()->pub, view(credential_message(c)), c.sig))
        return make_error(Errc::BadSignature, "credential signature invalid");
    if (now < c.valid_from || now > c.valid_to)
        return make_error(Errc::Expired, "now=" + std::to_string(now));
    if (ctx.revoked.credentials.contains(c.vehicle))
        return make_error(Errc::Revoked, "credential revoked");
    return {};
}

/// The ticket whose window contains now; windows tile, so it is unique.
inline Result<AuthorizationTicket> active_ticket(const std::vector<AuthorizationTicket>& pool,
                                                 Tick now) {
    for (const AuthorizationTicket& t : pool) {
        if (now >= t.valid_from && now <= t.valid_to) return t;
    }
    return make_error(Errc::NoValidTicket, "now=" + std::to_string(now));
}

/// Legal authorization token: a bearer value scoped to concrete pseudonyms,
/// issued by the competent-authority actor. No legal workflow is modeled.
struct Warrant {
    std::uint64_t id = 0;
    std::set<PseudonymId> scope;
    crypto::Mac128 tag{};
};

inline Bytes warrant_message(std::uint64_t id, const std::set<PseudonymId>& scope) {
    ByteWriter w;
    w.u64(id);
    w.u32(static_cast<std::uint32_t>(scope.size()));
    for (PseudonymId p : scope) w.u64(p);
    return w.take();
}

inline std::string warrant_to_token(const Warrant& w) {
    std::ostringstream out;
    out << "W1:" << std::hex << w.id << ":";
    bool first = true;
    for (PseudonymId p : w.scope) {
        if (!first) out << ",";
        out << std::hex << p;
        first = false;
    }
    out << ":" << to_hex(ByteView{w.tag.data(), w.tag.size()});
    return out.str();
}

inline std::optional<Warrant> warrant_from_token(std::string_view token) {
    if (!token.starts_with("W1:")) return std::nullopt;
    std::string s(token.substr(3));
    auto colon1 = s.find(':');
    if (colon1 == std::string::npos) return std::nullopt;
    auto colon2 = s.find(':', colon1 + 1);
    if (colon2 == std::string::npos) return std::nullopt;
    Warrant w;
    try {
        w.id = std::stoull(s.substr(0, colon1), nullptr, 16);
        std::string scope = s.substr(colon1 + 1, colon2 - colon1 - 1);
        std::size_t pos = 0;
        while (pos < scope.size()) {
            auto comma = scope.find(',', pos);
            if (comma == std::string::npos) comma = scope.size();
            w.scope.insert(std::stoull(scope.substr(pos, comma - pos), nullptr, 16));
            pos = comma + 1;
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    auto tag = from_hex(s.substr(colon2 + 1));
    if (!tag || tag->size() != w.tag.size()) return std::nullopt;
    std::copy(tag->begin(), tag->end(), w.tag.begin());
    return w;
}

struct Enrolment {
    EnrolmentCredential credential;
    crypto::KeyPair vehicle_keys;
};

/// AA-private mapping from pseudonym to enrolled identity. Never serialized
/// into any V2X message or vehicle log; lives only in the authority state.
struct EscrowRecord {
    VehicleId vehicle;
    std::uint64_t key_index = 0; // ticket key derivation index
    Tick valid_from = 0;
    Tick valid_to = 0;
};

/// Resolution event on the authority's own tamper-evident chain.
struct ResolutionAudit {
    PseudonymId pseudonym = 0;
    VehicleId vehicle;
    std::uint64_t warrant_id = 0;
    crypto::Hash256 chain{};
};

/// Single member-state hierarchy: root + EA + AA + trust list manager, all
/// keyed deterministically from the scenario seed.
class Pki {
public:
    explicit Pki(std::uint64_t seed, Tick rotation_period = kDefaultRotationPeriod)
        : seed_(seed), rotation_period_(rotation_period) {
        root_keys_ = crypto::keypair_from_seed(crypto::derive_seed(seed, "root-ca"));
        ea_keys_ = crypto::keypair_from_seed(crypto::derive_seed(seed, "enrolment-authority"));
        aa_keys_ = crypto::keypair_from_seed(crypto::derive_seed(seed, "authorization-authority"));
        tlm_keys_ = crypto::keypair_from_seed(crypto::derive_seed(seed, "trust-list-manager"));
        warrant_key_ = crypto::derive_mac_key(seed, "competent-authority-warrant");
        pseudonym_rng_ = crypto::Rng(crypto::derive_u64(seed, "pseudonym-ids"));

        Certificate root;
        root.subject = "root-ca";
        root.kind = CertKind::Root;
        root.pub = root_keys_.pub;
        root.valid_to = ~Tick{0};
        root.issuer = "root-ca";
        root.sig = crypto::sign(root_keys_.sec, view(certificate_message(root)));
        ctx_.list.roots.emplace(root.subject, root);

        ctx_.authorities.emplace("ea", issue_authority_cert("ea", CertKind::Enrolment, ea_keys_.pub));
        ctx_.authorities.emplace("aa",
                                 issue_authority_cert("aa", CertKind::Authorization, aa_keys_.pub));

        ctx_.list.version = 1;
        ctx_.list.manager_key = tlm_keys_.pub;
        ctx_.list.manager_sig =
            crypto::sign(tlm_keys_.sec, view(trust_list_message(ctx_.list.roots, 1)));
    }

    Tick rotation_period() const { return rotation_period_; }
    const TrustContext& trust() const { return ctx_; }
    TrustContext& trust_mut() { return ctx_; }

    Result<Enrolment> enrol(const VehicleId& vehicle) {
        if (enrolled_.contains(vehicle)) return make_error(Errc::AlreadyEnrolled, vehicle);
        crypto::KeyPair keys =
            crypto::keypair_from_seed(crypto::derive_seed(seed_, "vehicle-key:" + vehicle));
        EnrolmentCredential cred;
        cred.vehicle = vehicle;
        cred.pub = keys.pub;
        cred.issuer = "ea";
        cred.valid_from = 0;
        cred.valid_to = ~Tick{0};
        cred.sig = crypto::sign(ea_keys_.sec, view(credential_message(cred)));
        enrolled_.emplace(vehicle, cred);
        return Enrolment{cred, keys};
    }

    /// Issues n tickets with consecutive windows tiling
    /// [start, start + n * rotation_period). One escrow record per ticket;
    /// tickets share no key material or identifiers.
    Result<std::vector<AuthorizationTicket>> request_tickets(const EnrolmentCredential& cred,
                                                             std::uint32_t n, Tick start) {
        if (ctx_.revoked.credentials.contains(cred.vehicle))
            return make_error(Errc::RevokedCredential, cred.vehicle);
        auto valid = verify_credential(cred, ctx_, start);
        if (!valid) {
            if (valid.code() == Errc::Expired)
                return make_error(Errc::ExpiredCredential, cred.vehicle);
            return valid.error();
        }
        std::vector<AuthorizationTicket> tickets;
        tickets.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            AuthorizationTicket t;
            t.pseudonym = fresh_pseudonym();
            t.pub = crypto::keypair_from_seed(crypto::derive_seed(seed_, "ticket-key", ticket_counter_))
                        .pub;
            t.valid_from = start + i * rotation_period_;
            t.valid_to = start + (i + 1) * rotation_period_ - 1;
            t.issuer = "aa";
            t.sig = crypto::sign(aa_keys_.sec, view(ticket_message(t)));
            escrow_.emplace(t.pseudonym,
                            EscrowRecord{cred.vehicle, ticket_counter_, t.valid_from, t.valid_to});
            issued_by_vehicle_[cred.vehicle].push_back(t.pseudonym);
            ++ticket_counter_;
            tickets.push_back(t);
        }
        return tickets;
    }

    /// The ticket's signing key, released to the owning vehicle only.
    Result<crypto::SecretKey> ticket_secret(PseudonymId pseudonym, const VehicleId& owner) const {
        auto esc = escrow_.find(pseudonym);
        if (esc == escrow_.end() || esc->second.vehicle != owner)
            return make_error(Errc::UnknownPseudonym, "not issued to " + owner);
        return crypto::keypair_from_seed(
                   crypto::derive_seed(seed_, "ticket-key", esc->second.key_index))
            .sec;
    }

    /// The vehicle's pseudonym whose window contains now (escrow view).
    Result<PseudonymId> active_pseudonym(const VehicleId& vehicle, Tick now) const {
        for (const auto& [p, e] : escrow_) {
            if (e.vehicle == vehicle && now >= e.valid_from && now <= e.valid_to) return p;
        }
        return make_error(Errc::NoValidTicket,
                          vehicle + " has no window containing " + std::to_string(now));
    }

    Result<void> revoke_credential(const VehicleId& vehicle) {
        auto it = enrolled_.find(vehicle);
        if (it == enrolled_.end()) return make_error(Errc::UnknownSubject, vehicle);
        ctx_.revoked.credentials.insert(vehicle);
        // Cascade: every pseudonym issued under the credential.
        auto issued = issued_by_vehicle_.find(vehicle);
        if (issued != issued_by_vehicle_.end()) {
            for (PseudonymId p : issued->second) ctx_.revoked.tickets.insert(p);
        }
        return {};
    }

    Result<void> revoke_ticket(PseudonymId pseudonym) {
        if (!escrow_.contains(pseudonym))
            return make_error(Errc::UnknownSubject, "pseudonym never issued");
        ctx_.revoked.tickets.insert(pseudonym);
        return {};
    }

    /// Competent-authority actor: issues bearer warrants.
    Warrant issue_warrant(std::set<PseudonymId> scope) {
        Warrant w;
        w.id = ++warrant_counter_;
        w.scope = std::move(scope);
        w.tag = crypto::hmac128(warrant_key_, view(warrant_message(w.id, w.scope)));
        return w;
    }

    bool warrant_valid(const Warrant& w) const {
        return crypto::mac_equal(w.tag,
                                 crypto::hmac128(warrant_key_, view(warrant_message(w.id, w.scope))));
    }

    /// Escrow lookup, gated by a valid warrant scoped to the pseudonym.
    /// Every resolution appends one entry to the authority's audit chain.
    Result<VehicleId> resolve_pseudonym(PseudonymId pseudonym,
                                        const std::optional<Warrant>& warrant) {
        if (!warrant || !warrant_valid(*warrant))
            return make_error(Errc::NoWarrant, "missing or invalid warrant");
        if (!warrant->scope.contains(pseudonym))
            return make_error(Errc::WarrantScopeMismatch,
                              "warrant does not cover this pseudonym");
        auto it = escrow_.find(pseudonym);
        if (it == escrow_.end()) return make_error(Errc::UnknownPseudonym, "");
        append_resolution_audit(pseudonym, it->second.vehicle, warrant->id);
        return it->second.vehicle;
    }

    const std::vector<ResolutionAudit>& resolution_audit() const { return audit_; }

    /// Recomputes the audit chain from its events.
    bool audit_chain_valid() const {
        crypto::Hash256 prev{};
        for (const ResolutionAudit& a : audit_) {
            if (a.chain != audit_link(prev, a)) return false;
            prev = a.chain;
        }
        return true;
    }

    std::string trust_text() const {
        std::ostringstream out;
        out << "trust_list version=" << ctx_.list.version << "\n";
        for (const auto& [id, cert] : ctx_.list.roots)
            out << "root id=" << id << " pub=" << to_hex(cert.pub) << "\n";
        for (const auto& [id, cert] : ctx_.authorities)
            out << "authority id=" << id << " kind=" << static_cast<int>(cert.kind)
                << " issuer=" << cert.issuer << " pub=" << to_hex(cert.pub) << "\n";
        for (const VehicleId& v : ctx_.revoked.credentials) out << "revoked credential=" << v << "\n";
        for (PseudonymId p : ctx_.revoked.tickets) {
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(p));
            out << "revoked pseudonym=" << buf << "\n";
        }
        return out.str();
    }

    const std::map<VehicleId, EnrolmentCredential>& enrolled() const { return enrolled_; }
    const std::map<PseudonymId, EscrowRecord>& escrow() const { return escrow_; }

    /// Authority state file: everything non-derivable from the seed. Keys
    /// and certificates regenerate deterministically on load.
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["seed"] = seed_;
        j["rotation_period"] = rotation_period_;
        j["ticket_counter"] = ticket_counter_;
        j["warrant_counter"] = warrant_counter_;
        j["enrolled"] = nlohmann::json::array();
        for (const auto& [vehicle, cred] : enrolled_) j["enrolled"].push_back(vehicle);
        j["escrow"] = nlohmann::json::array();
        for (const auto& [p, e] : escrow_) {
            j["escrow"].push_back({{"pseudonym", p},
                                   {"vehicle", e.vehicle},
                                   {"key_index", e.key_index},
                                   {"valid_from", e.valid_from},
                                   {"valid_to", e.valid_to}});
        }
        j["revoked_credentials"] = nlohmann::json::array();
        for (const VehicleId& v : ctx_.revoked.credentials) j["revoked_credentials"].push_back(v);
        j["revoked_pseudonyms"] = nlohmann::json::array();
        for (PseudonymId p : ctx_.revoked.tickets) j["revoked_pseudonyms"].push_back(p);
        j["audit"] = nlohmann::json::array();
        for (const ResolutionAudit& a : audit_) {
            j["audit"].push_back({{"pseudonym", a.pseudonym},
                                  {"vehicle", a.vehicle},
                                  {"warrant_id", a.warrant_id},
                                  {"chain", to_hex(a.chain)}});
        }
        return j;
    }

    static Result<Pki> from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("seed"))
            return make_error(Errc::ParseError, "not a pki state object");
        try {
            Pki pki(j.at("seed").get<std::uint64_t>(),
                    j.value("rotation_period", kDefaultRotationPeriod));
            pki.ticket_counter_ = j.value("ticket_counter", std::uint64_t{0});
            pki.warrant_counter_ = j.value("warrant_counter", std::uint64_t{0});
            for (const auto& v : j.value("enrolled", nlohmann::json::array()))
                (void)pki.enrol(v.get<std::string>());
            for (const auto& e : j.value("escrow", nlohmann::json::array())) {
                PseudonymId p = e.at("pseudonym").get<PseudonymId>();
                EscrowRecord rec{e.at("vehicle").get<std::string>(),
                                 e.at("key_index").get<std::uint64_t>(),
                                 e.at("valid_from").get<Tick>(), e.at("valid_to").get<Tick>()};
                pki.issued_by_vehicle_[rec.vehicle].push_back(p);
                pki.escrow_.emplace(p, std::move(rec));
            }
            for (const auto& v : j.value("revoked_credentials", nlohmann::json::array()))
                pki.ctx_.revoked.credentials.insert(v.get<std::string>());
            for (const auto& p : j.value("revoked_pseudonyms", nlohmann::json::array()))
                pki.ctx_.revoked.tickets.insert(p.get<PseudonymId>());
            for (const auto& a : j.value("audit", nlohmann::json::array())) {
                ResolutionAudit audit;
                audit.pseudonym = a.at("pseudonym").get<PseudonymId>();
                audit.vehicle = a.at("vehicle").get<std::string>();
                audit.warrant_id = a.at("warrant_id").get<std::uint64_t>();
                auto chain = from_hex(a.at("chain").get<std::string>());
                if (!chain || chain->size() != 32)
                    return make_error(Errc::ParseError, "bad audit chain value");
                std::copy(chain->begin(), chain->end(), audit.chain.begin());
                pki.audit_.push_back(std::move(audit));
            }
            return pki;
        } catch (const nlohmann::json::exception& e) {
            return make_error(Errc::ParseError, e.what());
        }
    }

    /// The ticket as originally issued, rebuilt from escrow. Signatures are
    /// deterministic, so the bytes equal the original issue.
    Result<AuthorizationTicket> reissue_ticket(PseudonymId pseudonym) const {
        auto it = escrow_.find(pseudonym);
        if (it == escrow_.end()) return make_error(Errc::UnknownPseudonym, "");
        AuthorizationTicket t;
        t.pseudonym = pseudonym;
        t.pub = crypto::keypair_from_seed(
                    crypto::derive_seed(seed_, "ticket-key", it->second.key_index))
                    .pub;
        t.valid_from = it->second.valid_from;
        t.valid_to = it->second.valid_to;
        t.issuer = "aa";
        t.sig = crypto::sign(aa_keys_.sec, view(ticket_message(t)));
        return t;
    }

private:
    Certificate issue_authority_cert(const std::string& subject, CertKind kind,
                                     const crypto::PublicKey& pub) {
        Certificate c;
        c.subject = subject;
        c.kind = kind;
        c.pub = pub;
        c.valid_to = ~Tick{0};
        c.issuer = "root-ca";
        c.sig = crypto::sign(root_keys_.sec, view(certificate_message(c)));
        return c;
    }

    PseudonymId fresh_pseudonym() {
        PseudonymId p = pseudonym_rng_.next();
        while (p == 0 || escrow_.contains(p)) p = pseudonym_rng_.next();
        return p;
    }

    static crypto::Hash256 audit_link(const crypto::Hash256& prev, const ResolutionAudit& a) {
        ByteWriter w;
        w.raw(prev);
        w.u64(a.pseudonym);
        w.str(a.vehicle);
        w.u64(a.warrant_id);
        return crypto::sha256(view(w.bytes()));
    }

    void append_resolution_audit(PseudonymId pseudonym, const VehicleId& vehicle,
                                 std::uint64_t warrant_id) {
        ResolutionAudit a;
        a.pseudonym = pseudonym;
        a.vehicle = vehicle;
        a.warrant_id = warrant_id;
        crypto::Hash256 prev = audit_.empty() ? crypto::Hash256{} : audit_.back().chain;
        a.chain = audit_link(prev, a);
        audit_.push_back(a);
    }

    std::uint64_t seed_;
    Tick rotation_period_;
    crypto::KeyPair root_keys_, ea_keys_, aa_keys_, tlm_keys_;
    crypto::MacKey warrant_key_{};
    crypto::Rng pseudonym_rng_{0};
    TrustContext ctx_;
    std::map<VehicleId, EnrolmentCredential> enrolled_;
    std::map<PseudonymId, EscrowRecord> escrow_;
    std::map<VehicleId, std::vector<PseudonymId>> issued_by_vehicle_;
    std::uint64_t ticket_counter_ = 0;
    std::uint64_t warrant_counter_ = 0;
    std::vector<ResolutionAudit> audit_;
};

} // namespace edr::pki
