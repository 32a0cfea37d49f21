// edrsim — deterministic EDR/AD C-ITS scenario simulator and forensic tool.
//
// Subcommands: run, validate, verify, query, reconstruct, pki.
// Exit codes: 0 success, 1 internal error, 2 usage/validation,
// 3 integrity verification failure, 4 not found, 5 access denied.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edr/edr.hpp"

namespace fs = std::filesystem;
using namespace edr;

namespace {

int exit_code_for(Errc c) {
    switch (c) {
        case Errc::InvalidScenario:
        case Errc::ParseError:
        case Errc::BadRequest:
        case Errc::UnsupportedFormat:
        case Errc::BadContainer:
        case Errc::PayloadTooLarge:
            return 2;
        case Errc::BadMac:
        case Errc::ReplayDetected:
        case Errc::BadSignature:
        case Errc::SegmentConflict:
        case Errc::BothCopiesDamaged:
        case Errc::StaleMessage:
        case Errc::DuplicateMessage:
            return 3;
        case Errc::UnknownSender:
        case Errc::UnknownNode:
        case Errc::UnknownDescriptor:
        case Errc::UnknownSubject:
        case Errc::UnknownPseudonym:
        case Errc::IoError:
            return 4;
        case Errc::NoWarrant:
        case Errc::WarrantScopeMismatch:
        case Errc::BadCredential:
        case Errc::Revoked:
        case Errc::RevokedCredential:
        case Errc::ExpiredCredential:
        case Errc::Expired:
        case Errc::NoValidTicket:
            return 5;
        default:
            return 1;
    }
}

int fail(const Error& e) {
    std::cerr << "error: " << e.message() << "\n";
    return exit_code_for(e.code);
}

int fail(Errc c, const std::string& detail) { return fail(Error{c, detail}); }

Result<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return make_error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Result<Bytes> read_bytes(const fs::path& path) {
    auto s = read_file(path);
    if (!s) return s.error();
    return Bytes(s.value().begin(), s.value().end());
}

Result<void> write_file(const fs::path& path, ByteView data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return make_error(Errc::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    return {};
}

Result<void> write_file(const fs::path& path, const std::string& data) {
    return write_file(path, view(std::string_view{data}));
}

// --- run ---------------------------------------------------------------------

int cmd_run(const std::string& scenario_path, std::string out_dir,
            std::optional<std::uint64_t> seed_override) {
    auto content = read_file(scenario_path);
    if (!content) return fail(content.error());
    auto scenario = scen::load(content.value());
    if (!scenario) return fail(scenario.error());
    scen::Scenario s = scenario.value();
    if (seed_override) s.seed = *seed_override;

    if (out_dir.empty()) {
        const char* env = std::getenv("EDRSIM_OUT");
        out_dir = env ? env : "edrsim-out";
    }

    sim::Simulation simulation(std::move(s));
    auto run = simulation.run();
    if (!run) return fail(run.error());

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) return fail(Errc::IoError, "cannot create " + out_dir);

    const sim::RunArtifacts& art = simulation.artifacts();
    for (const auto& [vehicle, va] : art.vehicles) {
        auto w1 = write_file(fs::path(out_dir) / (vehicle + ".edra"),
                             view(rec::export_log(va.log)));
        if (!w1) return fail(w1.error());
        auto w2 = write_file(fs::path(out_dir) / (vehicle + ".log.txt"), va.log_text);
        if (!w2) return fail(w2.error());
        auto w3 = write_file(fs::path(out_dir) / (vehicle + ".tickets.bin"),
                             view(v2x::serialize_ticket_store(va.accepted_tickets)));
        if (!w3) return fail(w3.error());
    }
    (void)write_file(fs::path(out_dir) / "ground_truth.txt", art.ground_truth.to_text());
    (void)write_file(fs::path(out_dir) / "metrics.txt", art.metrics.to_text());
    (void)write_file(fs::path(out_dir) / "pki.txt", art.pki_text);
    (void)write_file(fs::path(out_dir) / "pki_state.json",
                     simulation.authority().to_json().dump(2) + "\n");

    std::cout << "run complete: " << art.vehicles.size() << " vehicle logs in " << out_dir
              << "\n";
    for (const auto& [k, v] : art.metrics.values) std::cout << k << "=" << v << "\n";
    return 0;
}

// --- validate ------------------------------------------------------------------

int cmd_validate(const std::string& scenario_path) {
    auto content = read_file(scenario_path);
    if (!content) return fail(content.error());
    auto errors = scen::check(content.value());
    if (errors.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    for (const scen::ValidationError& e : errors)
        std::cout << e.path << ": " << e.reason << "\n";
    return 2;
}

// --- verify --------------------------------------------------------------------

int cmd_verify(const std::string& log_path, const std::string& genesis_hex) {
    auto bytes = read_bytes(log_path);
    if (!bytes) return fail(bytes.error());
    auto log = rec::import_log(view(bytes.value()));
    if (!log) return fail(log.error());

    crypto::Hash256 genesis = log.value().genesis;
    if (!genesis_hex.empty()) {
        auto g = from_hex(genesis_hex);
        if (!g || g->size() != 32) return fail(Errc::ParseError, "--genesis must be 64 hex chars");
        std::copy(g->begin(), g->end(), genesis.begin());
    }

    rec::ChainStatus status = rec::verify_chain(log.value().log, genesis);
    bool all_ok = status.ok();
    if (status.ok()) std::cout << "chain=Ok entries=" << log.value().log.size() << "\n";
    else std::cout << "chain=FirstBadIndex(" << *status.first_bad << ")\n";

    if (log.value().vehicle_pubkey) {
        for (const rec::SignedSegment& seg : log.value().segments) {
            rec::SegmentStatus s =
                rec::verify_segment(seg, log.value().log, genesis, *log.value().vehicle_pubkey);
            std::cout << "segment first=" << seg.first_seq << " last=" << seg.last_seq
                      << " status=" << rec::to_string(s) << "\n";
            if (s != rec::SegmentStatus::Valid) all_ok = false;
        }
    }
    return all_ok ? 0 : 3;
}

// --- query ---------------------------------------------------------------------

int cmd_query(const std::string& log_path, const std::string& role_s, const std::string& purpose_s,
              const std::string& channel_s, const std::string& range_s,
              const std::vector<std::string>& category_names, std::uint64_t issuer_seed,
              const std::string& requester, const std::string& out_file,
              const std::string& format_s) {
    auto bytes = read_bytes(log_path);
    if (!bytes) return fail(bytes.error());
    auto log = rec::import_log(view(bytes.value()));
    if (!log) return fail(log.error());

    auto role = access::role_from_string(role_s);
    if (!role) return fail(Errc::ParseError, "unknown role: " + role_s);
    auto purpose = access::purpose_from_string(purpose_s);
    if (!purpose) return fail(Errc::ParseError, "unknown purpose: " + purpose_s);
    auto channel = access::channel_from_string(channel_s);
    if (!channel) return fail(Errc::ParseError, "unknown channel: " + channel_s);

    access::QueryRequest request;
    access::CredentialIssuer issuer(issuer_seed);
    request.credential = issuer.issue(requester, *role);
    request.channel = *channel;
    request.purpose = *purpose;
    auto colon = range_s.find(':');
    if (colon == std::string::npos) return fail(Errc::ParseError, "--range expects A:B");
    try {
        request.range_first = std::stoull(range_s.substr(0, colon));
        request.range_last = std::stoull(range_s.substr(colon + 1));
    } catch (const std::exception&) {
        return fail(Errc::ParseError, "--range expects integers A:B");
    }
    for (const std::string& name : category_names) {
        auto c = category_from_string(name);
        if (!c) return fail(Errc::ParseError, "unknown category: " + name);
        request.categories.insert(*c);
    }

    auto permit = access::authorize(access::default_policy(), request, issuer);
    if (!permit) return fail(permit.error());
    access::QueryResult result = access::execute_query(log.value().log, permit.value(), request);

    std::cout << access::export_result_text(result);
    if (!out_file.empty()) {
        access::ExportFormat format = format_s == "text" ? access::ExportFormat::Text
                                                         : access::ExportFormat::Binary;
        auto blob = access::export_result(result, format);
        if (!blob) return fail(blob.error());
        auto w = write_file(out_file, view(blob.value()));
        if (!w) return fail(w.error());
    }
    return 0;
}

// --- reconstruct ------------------------------------------------------------------

int cmd_reconstruct(const std::string& log_path, Tick event_tick, Tick window,
                    const std::string& warrant_token, const std::string& pki_state_path,
                    const std::string& tickets_path) {
    auto bytes = read_bytes(log_path);
    if (!bytes) return fail(bytes.error());
    auto log = rec::import_log(view(bytes.value()));
    if (!log) return fail(log.error());

    // competent-authority view over the stored range
    access::QueryResult result;
    result.role = access::PartyRole::CompetentAuthority;
    result.purpose = access::Purpose::AccidentInvestigation;
    result.range_first = 0;
    result.range_last = ~Tick{0};
    for (std::uint8_t c = 0; c < kCategoryCount; ++c)
        result.requested.insert(static_cast<RecordCategory>(c));
    for (const rec::StoredRecord& s : log.value().log.records) result.records.push_back(s);

    auto timeline = recon::build_timeline(result, event_tick, window);
    if (!timeline) return fail(timeline.error());
    recon::EventTimeline tl = std::move(timeline).value();

    std::optional<pki::Pki> authority;
    if (!pki_state_path.empty()) {
        auto state = read_file(pki_state_path);
        if (!state) return fail(state.error());
        nlohmann::json j = nlohmann::json::parse(state.value(), nullptr, false);
        if (j.is_discarded()) return fail(Errc::ParseError, "invalid pki state JSON");
        auto loaded = pki::Pki::from_json(j);
        if (!loaded) return fail(loaded.error());
        authority = std::move(loaded).value();
    }

    v2x::TicketStore tickets;
    if (!tickets_path.empty()) {
        auto tb = read_bytes(tickets_path);
        if (!tb) return fail(tb.error());
        auto parsed = v2x::parse_ticket_store(view(tb.value()));
        if (!parsed) return fail(parsed.error());
        tickets = std::move(parsed).value();
    }

    pki::TrustContext empty_trust;
    const pki::TrustContext& trust = authority ? authority->trust() : empty_trust;
    crypto::PublicKey pubkey =
        log.value().vehicle_pubkey ? *log.value().vehicle_pubkey : crypto::PublicKey{};

    recon::ProvenanceReport report = recon::verify_provenance(
        tl, log.value().log, log.value().segments, log.value().genesis, trust, pubkey, tickets);

    if (!warrant_token.empty()) {
        if (!authority)
            return fail(Errc::ParseError, "--warrant requires --pki STATE for escrow access");
        auto warrant = pki::warrant_from_token(warrant_token);
        if (!warrant) return fail(Errc::NoWarrant, "unparseable warrant token");
        auto resolved = recon::resolve_remote_senders(tl, *authority, warrant, report);
        if (!resolved) return fail(resolved.error());
        if (!pki_state_path.empty())
            (void)write_file(pki_state_path, authority->to_json().dump(2) + "\n");
    }

    std::cout << recon::export_report(tl, report);
    return 0;
}

// --- pki ---------------------------------------------------------------------------

Result<pki::Pki> load_pki(const fs::path& path, std::uint64_t seed) {
    if (!fs::exists(path)) return pki::Pki(seed);
    auto content = read_file(path);
    if (!content) return content.error();
    nlohmann::json j = nlohmann::json::parse(content.value(), nullptr, false);
    if (j.is_discarded()) return make_error(Errc::ParseError, "invalid pki state JSON");
    return pki::Pki::from_json(j);
}

Result<void> save_pki(const fs::path& path, const pki::Pki& pki) {
    return write_file(path, pki.to_json().dump(2) + "\n");
}

std::string pseudonym_hex(PseudonymId p) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(p));
    return buf;
}

Result<PseudonymId> parse_pseudonym(const std::string& hex) {
    try {
        return static_cast<PseudonymId>(std::stoull(hex, nullptr, 16));
    } catch (const std::exception&) {
        return make_error(Errc::ParseError, "pseudonym must be hex: " + hex);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EDR/AD C-ITS simulator: deterministic vehicular network runs, "
                 "tamper-evident logs, pseudonym PKI, consent-gated queries and "
                 "forensic reconstruction"};
    app.require_subcommand(1);

    // run
    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed_override;
    auto* run = app.add_subcommand("run", "execute a scenario and write artifacts");
    run->add_option("scenario", scenario_path, "scenario file (text or JSON)")->required();
    run->add_option("--out", out_dir, "output directory (default $EDRSIM_OUT or edrsim-out)");
    run->add_option("--seed", seed_override, "override the scenario seed");

    // validate
    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("scenario", validate_path, "scenario file")->required();

    // verify
    std::string verify_log, genesis_hex;
    auto* verify = app.add_subcommand("verify", "verify an exported log's hash chain and seals");
    verify->add_option("log", verify_log, "EDRA log container")->required();
    verify->add_option("--genesis", genesis_hex, "expected genesis value (hex)");

    // query
    std::string q_log, q_role, q_purpose = "Research", q_channel = "Server", q_range = "0:0";
    std::vector<std::string> q_categories;
    std::uint64_t q_issuer_seed = 1;
    std::string q_requester = "cli-requester", q_out, q_format = "binary";
    auto* query = app.add_subcommand("query", "role- and consent-gated query over a log");
    query->add_option("log", q_log, "EDRA log container")->required();
    query->add_option("--role", q_role, "requester role")->required();
    query->add_option("--purpose", q_purpose, "purpose of access");
    query->add_option("--channel", q_channel, "Server, AdHoc or Obd");
    query->add_option("--range", q_range, "tick range A:B")->required();
    query->add_option("--categories", q_categories, "record categories")->required();
    query->add_option("--issuer-seed", q_issuer_seed, "credential issuer seed");
    query->add_option("--requester", q_requester, "requester identifier");
    query->add_option("--out", q_out, "export the result to a file");
    query->add_option("--format", q_format, "export format: binary or text");

    // reconstruct
    std::string r_log, r_warrant, r_pki, r_tickets;
    Tick r_event = 0, r_window = recon::kDefaultWindow;
    auto* reconstruct =
        app.add_subcommand("reconstruct", "build and verify an event timeline from a log");
    reconstruct->add_option("log", r_log, "EDRA log container")->required();
    reconstruct->add_option("--event", r_event, "event tick")->required();
    reconstruct->add_option("--window", r_window, "half-window in ticks");
    reconstruct->add_option("--warrant", r_warrant, "warrant token for pseudonym resolution");
    reconstruct->add_option("--pki", r_pki, "authority state file (trust + escrow)");
    reconstruct->add_option("--tickets", r_tickets, "accepted-ticket store for the log");

    // pki
    auto* pki_cmd = app.add_subcommand("pki", "authority operations on a state file");
    pki_cmd->require_subcommand(1);
    std::string p_state = "pki_state.json", p_vehicle, p_pseudonym, p_warrant;
    std::vector<std::string> p_pseudonyms;
    std::uint64_t p_seed = 1;
    std::uint32_t p_count = 1;
    Tick p_start = 0, p_now = 0;

    auto* p_enrol = pki_cmd->add_subcommand("enrol", "enrol a vehicle identity");
    p_enrol->add_option("--state", p_state, "state file");
    p_enrol->add_option("--vehicle", p_vehicle)->required();
    p_enrol->add_option("--seed", p_seed, "seed when creating a fresh state");

    auto* p_tickets = pki_cmd->add_subcommand("tickets", "issue pseudonym tickets");
    p_tickets->add_option("--state", p_state);
    p_tickets->add_option("--vehicle", p_vehicle)->required();
    p_tickets->add_option("--count", p_count);
    p_tickets->add_option("--start", p_start);

    auto* p_rotate = pki_cmd->add_subcommand("rotate", "show the active pseudonym at a tick");
    p_rotate->add_option("--state", p_state);
    p_rotate->add_option("--vehicle", p_vehicle)->required();
    p_rotate->add_option("--now", p_now)->required();

    auto* p_revoke = pki_cmd->add_subcommand("revoke", "revoke a credential or ticket");
    p_revoke->add_option("--state", p_state);
    p_revoke->add_option("--vehicle", p_vehicle);
    p_revoke->add_option("--pseudonym", p_pseudonym);

    auto* p_resolve = pki_cmd->add_subcommand("resolve", "resolve a pseudonym under warrant");
    p_resolve->add_option("--state", p_state);
    p_resolve->add_option("--pseudonym", p_pseudonym)->required();
    p_resolve->add_option("--warrant", p_warrant)->required();

    auto* p_warrant_cmd = pki_cmd->add_subcommand("warrant", "issue a warrant token");
    p_warrant_cmd->add_option("--state", p_state);
    p_warrant_cmd->add_option("--pseudonym", p_pseudonyms, "pseudonyms in scope")->required();

    CLI11_PARSE(app, argc, argv);

    if (*run) return cmd_run(scenario_path, out_dir, seed_override);
    if (*validate) return cmd_validate(validate_path);
    if (*verify) return cmd_verify(verify_log, genesis_hex);
    if (*query)
        return cmd_query(q_log, q_role, q_purpose, q_channel, q_range, q_categories,
                         q_issuer_seed, q_requester, q_out, q_format);
    if (*reconstruct)
        return cmd_reconstruct(r_log, r_event, r_window, r_warrant, r_pki, r_tickets);

    if (*pki_cmd) {
        auto state = load_pki(p_state, p_seed);
        if (!state) return fail(state.error());
        pki::Pki& pki = state.value();

        if (*p_enrol) {
            auto e = pki.enrol(p_vehicle);
            if (!e) return fail(e.error());
            auto s = save_pki(p_state, pki);
            if (!s) return fail(s.error());
            std::cout << "enrolled vehicle=" << p_vehicle
                      << " pub=" << to_hex(e.value().credential.pub) << "\n";
            return 0;
        }
        if (*p_tickets) {
            auto enrolled = pki.enrolled().find(p_vehicle);
            if (enrolled == pki.enrolled().end())
                return fail(Errc::UnknownSubject, "vehicle not enrolled: " + p_vehicle);
            auto tickets = pki.request_tickets(enrolled->second, p_count, p_start);
            if (!tickets) return fail(tickets.error());
            auto s = save_pki(p_state, pki);
            if (!s) return fail(s.error());
            for (const auto& t : tickets.value())
                std::cout << "ticket pseudonym=" << pseudonym_hex(t.pseudonym)
                          << " window=" << t.valid_from << ":" << t.valid_to << "\n";
            return 0;
        }
        if (*p_rotate) {
            auto active = pki.active_pseudonym(p_vehicle, p_now);
            if (!active) return fail(active.error());
            std::cout << "active pseudonym=" << pseudonym_hex(active.value()) << " at tick "
                      << p_now << "\n";
            return 0;
        }
        if (*p_revoke) {
            if (p_vehicle.empty() == p_pseudonym.empty())
                return fail(Errc::ParseError, "revoke needs exactly one of --vehicle/--pseudonym");
            if (!p_vehicle.empty()) {
                auto r = pki.revoke_credential(p_vehicle);
                if (!r) return fail(r.error());
                std::cout << "revoked credential=" << p_vehicle << " (tickets cascaded)\n";
            } else {
                auto p = parse_pseudonym(p_pseudonym);
                if (!p) return fail(p.error());
                auto r = pki.revoke_ticket(p.value());
                if (!r) return fail(r.error());
                std::cout << "revoked pseudonym=" << pseudonym_hex(p.value()) << "\n";
            }
            auto s = save_pki(p_state, pki);
            if (!s) return fail(s.error());
            return 0;
        }
        if (*p_resolve) {
            auto p = parse_pseudonym(p_pseudonym);
            if (!p) return fail(p.error());
            auto warrant = pki::warrant_from_token(p_warrant);
            if (!warrant) return fail(Errc::NoWarrant, "unparseable warrant token");
            auto r = pki.resolve_pseudonym(p.value(), warrant);
            if (!r) return fail(r.error());
            auto s = save_pki(p_state, pki);
            if (!s) return fail(s.error());
            std::cout << "pseudonym=" << pseudonym_hex(p.value()) << " vehicle=" << r.value()
                      << "\n";
            return 0;
        }
        if (*p_warrant_cmd) {
            std::set<PseudonymId> scope;
            for (const std::string& hex : p_pseudonyms) {
                auto p = parse_pseudonym(hex);
                if (!p) return fail(p.error());
                scope.insert(p.value());
            }
            pki::Warrant w = pki.issue_warrant(std::move(scope));
            auto s = save_pki(p_state, pki);
            if (!s) return fail(s.error());
            std::cout << pki::warrant_to_token(w) << "\n";
            return 0;
        }
    }
    return 1;
}
