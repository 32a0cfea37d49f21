#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "edr/pki.hpp"

using namespace edr;
using namespace edr::pki;

TEST_CASE("enrolment issues a credential that chains to the trust list") {
    Pki pki(7);
    auto e = pki.enrol("veh-a");
    REQUIRE(e.ok());
    CHECK(verify_credential(e.value().credential, pki.trust(), 0).ok());

    auto again = pki.enrol("veh-a");
    REQUIRE_FALSE(again.ok());
    CHECK(again.code() == Errc::AlreadyEnrolled);
}

TEST_CASE("credential fails once its root leaves the trust list") {
    Pki pki(7);
    auto e = pki.enrol("veh-a");
    pki.trust_mut().list.roots.clear();
    auto r = verify_credential(e.value().credential, pki.trust(), 0);
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Errc::UntrustedRoot);
}

TEST_CASE("ticket batches are pairwise unlinkable and tile their windows") {
    Pki pki(7, 100);
    auto e = pki.enrol("veh-a");
    auto tickets = pki.request_tickets(e.value().credential, 5, 1000);
    REQUIRE(tickets.ok());
    const auto& pool = tickets.value();
    REQUIRE(pool.size() == 5);

    // pairwise distinct pseudonyms and keys, exhaustively
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            CHECK(pool[i].pseudonym != pool[j].pseudonym);
            CHECK(pool[i].pub != pool[j].pub);
            CHECK(pool[i].sig != pool[j].sig);
        }
    }
    // windows tile [start, start + 5 * period)
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(pool[i].valid_from == 1000 + i * 100);
        CHECK(pool[i].valid_to == 1000 + (i + 1) * 100 - 1);
    }
}

TEST_CASE("tickets of one vehicle share only the issuer with any other ticket") {
    Pki pki(7, 100);
    auto a = pki.enrol("veh-a");
    auto b = pki.enrol("veh-b");
    auto ta = pki.request_tickets(a.value().credential, 4, 0).value();
    auto tb = pki.request_tickets(b.value().credential, 4, 401).value();

    auto shared_fields = [](const AuthorizationTicket& x, const AuthorizationTicket& y) {
        std::set<std::string> s;
        if (x.pseudonym == y.pseudonym) s.insert("pseudonym");
        if (x.pub == y.pub) s.insert("pub");
        if (x.valid_from == y.valid_from) s.insert("valid_from");
        if (x.valid_to == y.valid_to) s.insert("valid_to");
        if (x.issuer == y.issuer) s.insert("issuer");
        if (x.sig == y.sig) s.insert("sig");
        return s;
    };

    const std::set<std::string> only_issuer{"issuer"};
    for (std::size_t i = 0; i < ta.size(); ++i)
        for (std::size_t j = i + 1; j < ta.size(); ++j)
            CHECK(shared_fields(ta[i], ta[j]) == only_issuer);
    for (const auto& x : ta)
        for (const auto& y : tb) CHECK(shared_fields(x, y) == only_issuer);
}

TEST_CASE("request_tickets rejects revoked and expired credentials") {
    Pki pki(7);
    auto e = pki.enrol("veh-a");
    REQUIRE(pki.revoke_credential("veh-a").ok());
    auto r = pki.request_tickets(e.value().credential, 3, 0);
    REQUIRE_FALSE(r.ok());
    CHECK(r.code() == Errc::RevokedCredential);
}

TEST_CASE("active_ticket picks the unique window containing now") {
    Pki pki(7, 100);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 3, 0).value();

    CHECK(active_ticket(pool, 250).value().pseudonym == pool[2].pseudonym);
    CHECK(active_ticket(pool, 0).value().pseudonym == pool[0].pseudonym);
    CHECK(active_ticket(pool, 299).value().pseudonym == pool[2].pseudonym);

    auto exhausted = active_ticket(pool, 300);
    REQUIRE_FALSE(exhausted.ok());
    CHECK(exhausted.code() == Errc::NoValidTicket);
}

TEST_CASE("verify_ticket walks the chain and checks window and revocation") {
    Pki pki(7, 100);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 2, 50).value();
    const AuthorizationTicket& t = pool[0];

    CHECK(verify_ticket(t, pki.trust(), 50).ok());
    CHECK(verify_ticket(t, pki.trust(), 149).ok());

    SECTION("expired just past the window edge") {
        auto r = verify_ticket(t, pki.trust(), 150);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::Expired);
        CHECK(verify_ticket(t, pki.trust(), 49).code() == Errc::Expired);
    }

    SECTION("self-signed attacker ticket is untrusted") {
        crypto::KeyPair rogue = crypto::keypair_from_seed(crypto::derive_seed(9, "rogue"));
        AuthorizationTicket forged;
        forged.pseudonym = 0x1111;
        forged.pub = rogue.pub;
        forged.valid_from = 0;
        forged.valid_to = 1000;
        forged.issuer = "rogue-ca";
        forged.sig = crypto::sign(rogue.sec, view(ticket_message(forged)));
        auto r = verify_ticket(forged, pki.trust(), 60);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::UntrustedRoot);
    }

    SECTION("forged signature under the real issuer is BadSignature") {
        AuthorizationTicket forged = t;
        forged.pseudonym ^= 1;
        auto r = verify_ticket(forged, pki.trust(), 60);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::BadSignature);
    }

    SECTION("revocation") {
        REQUIRE(pki.revoke_ticket(t.pseudonym).ok());
        auto r = verify_ticket(t, pki.trust(), 60);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::Revoked);
    }
}

TEST_CASE("revoking a credential cascades to all its tickets") {
    Pki pki(7, 100);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 4, 0).value();
    REQUIRE(pki.revoke_credential("veh-a").ok());
    for (const AuthorizationTicket& t : pool) {
        auto r = verify_ticket(t, pki.trust(), t.valid_from);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::Revoked);
    }
}

TEST_CASE("revoking unknown subjects fails") {
    Pki pki(7);
    CHECK(pki.revoke_credential("ghost").code() == Errc::UnknownSubject);
    CHECK(pki.revoke_ticket(0xdead).code() == Errc::UnknownSubject);
}

TEST_CASE("resolution requires a valid, correctly scoped warrant") {
    Pki pki(7, 100);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 2, 0).value();
    PseudonymId p0 = pool[0].pseudonym;
    PseudonymId p1 = pool[1].pseudonym;

    SECTION("valid warrant resolves to the issuing vehicle") {
        Warrant w = pki.issue_warrant({p0});
        auto r = pki.resolve_pseudonym(p0, w);
        REQUIRE(r.ok());
        CHECK(r.value() == "veh-a");
        CHECK(pki.resolution_audit().size() == 1);
        CHECK(pki.audit_chain_valid());
    }

    SECTION("missing warrant") {
        auto r = pki.resolve_pseudonym(p0, std::nullopt);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::NoWarrant);
        CHECK(pki.resolution_audit().empty());
    }

    SECTION("tampered warrant tag") {
        Warrant w = pki.issue_warrant({p0});
        w.scope.insert(p1); // widen scope without re-issuing
        auto r = pki.resolve_pseudonym(p1, w);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::NoWarrant);
    }

    SECTION("warrant for A used on B") {
        Warrant w = pki.issue_warrant({p0});
        auto r = pki.resolve_pseudonym(p1, w);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::WarrantScopeMismatch);
    }

    SECTION("unknown pseudonym") {
        Warrant w = pki.issue_warrant({0x9999});
        auto r = pki.resolve_pseudonym(0x9999, w);
        REQUIRE_FALSE(r.ok());
        CHECK(r.code() == Errc::UnknownPseudonym);
    }
}

TEST_CASE("resolution is complete over every issued ticket") {
    Pki pki(11, 50);
    for (int v = 0; v < 3; ++v) {
        auto e = pki.enrol("veh-" + std::to_string(v));
        (void)pki.request_tickets(e.value().credential, 6, 0);
    }
    std::set<PseudonymId> all;
    for (const auto& [p, entry] : pki.escrow()) all.insert(p);
    CHECK(all.size() == 18);
    Warrant w = pki.issue_warrant(all);
    for (PseudonymId p : all) {
        auto r = pki.resolve_pseudonym(p, w);
        REQUIRE(r.ok());
        CHECK(r.value() == pki.escrow().at(p).vehicle);
    }
    CHECK(pki.resolution_audit().size() == all.size());
    CHECK(pki.audit_chain_valid());
}

TEST_CASE("warrant tokens round-trip through their text form") {
    Pki pki(7);
    Warrant w = pki.issue_warrant({0xabcdef, 0x123456});
    std::string token = warrant_to_token(w);
    auto parsed = warrant_from_token(token);
    REQUIRE(parsed.has_value());
    CHECK(parsed->id == w.id);
    CHECK(parsed->scope == w.scope);
    CHECK(pki.warrant_valid(*parsed));
    CHECK_FALSE(warrant_from_token("W1:zz").has_value());
    CHECK_FALSE(warrant_from_token("garbage").has_value());
}

TEST_CASE("authority state survives a save/load round trip") {
    Pki pki(99, 80);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 3, 10).value();
    REQUIRE(pki.revoke_ticket(pool[2].pseudonym).ok());
    Warrant w = pki.issue_warrant({pool[0].pseudonym});
    REQUIRE(pki.resolve_pseudonym(pool[0].pseudonym, w).ok());

    auto loaded = Pki::from_json(pki.to_json());
    REQUIRE(loaded.ok());
    Pki& p2 = loaded.value();

    // trust context, escrow, revocations and audit all come back
    CHECK(p2.trust().list.roots.size() == 1);
    CHECK(p2.escrow().size() == 3);
    CHECK(p2.escrow().at(pool[0].pseudonym).vehicle == "veh-a");
    CHECK(verify_ticket(pool[0], p2.trust(), 10).ok());
    CHECK(verify_ticket(pool[2], p2.trust(), pool[2].valid_from).code() == Errc::Revoked);
    CHECK(p2.warrant_valid(w));
    CHECK(p2.resolution_audit().size() == 1);
    CHECK(p2.audit_chain_valid());

    // reissued tickets are byte-identical to the originals
    auto reissued = p2.reissue_ticket(pool[1].pseudonym);
    REQUIRE(reissued.ok());
    CHECK(reissued.value() == pool[1]);

    // issuing continues without pseudonym collisions
    auto e2 = p2.enrol("veh-b");
    auto more = p2.request_tickets(e2.value().credential, 2, 0);
    REQUIRE(more.ok());
    for (const auto& t : more.value()) CHECK_FALSE(pki.escrow().contains(t.pseudonym));
}

TEST_CASE("ticket wire serialization round-trips") {
    Pki pki(7, 100);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 1, 0).value();
    ByteWriter w;
    put_ticket(w, pool[0]);
    ByteReader r(view(w.bytes()));
    auto parsed = get_ticket(r);
    REQUIRE(parsed.has_value());
    CHECK(*parsed == pool[0]);
}

TEST_CASE("trust list text export lists roots, authorities and revocations") {
    Pki pki(7);
    auto e = pki.enrol("veh-a");
    auto pool = pki.request_tickets(e.value().credential, 1, 0).value();
    REQUIRE(pki.revoke_ticket(pool[0].pseudonym).ok());
    std::string text = pki.trust_text();
    CHECK(text.find("root id=root-ca") != std::string::npos);
    CHECK(text.find("authority id=aa") != std::string::npos);
    CHECK(text.find("revoked pseudonym=") != std::string::npos);
}
