#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edr/access.hpp"
#include "edr/can.hpp"
#include "edr/consent.hpp"
#include "edr/crypto.hpp"
#include "edr/enrich.hpp"
#include "edr/payloads.hpp"
#include "edr/pki.hpp"
#include "edr/recorder.hpp"
#include "edr/scenario.hpp"
#include "edr/types.hpp"
#include "edr/v2x.hpp"

// Deterministic scenario engine. One simulation loop drives every vehicle's
// CAN, the V2X exchange, scripted events and attacks. While executing, the
// harness maintains its own ground truth — the records each vehicle should
// store, predicted from the script alone, never read back from the modules
// under test — so tests can compare stored reality against scripted intent.
// Identical scenarios produce identical artifacts.
//
// Per-tick order (fixed, so (tick, source) pairs never decrease in any log):
//   1. movement update, scripted consent changes
//   2. CAN emissions: sensors, decision, actuator, gateway (outbound V2X);
//      V2X broadcasts delivered to stations in range; scripted message
//      attacks injected
//   3. attestation sweep when due
//   4. per vehicle: deliver the CAN batch, then system records (rejections,
//      attestation failures), then accepted inbound sorted by pseudonym
//   5. post-storage attacks (log/mirror tampering, ECU compromise)
//   6. retention expiry

namespace edr::sim {

struct GroundTruthRecord {
    Tick tick = 0;
    VehicleId vehicle;
    SourceId source;
    RecordCategory category = RecordCategory::VehicleDynamics;
    Bytes payload;

    bool operator==(const GroundTruthRecord&) const = default;
};

struct AttackNote {
    Tick tick = 0;
    scen::AttackKind kind = scen::AttackKind::SpoofCam;
    VehicleId target;
    bool executed = true;
    std::string note;
};

struct GroundTruth {
    std::vector<GroundTruthRecord> records;
    std::vector<AttackNote> attacks;
    std::map<VehicleId, std::uint64_t> delivered_to;
    std::map<VehicleId, std::uint64_t> sent_by;
    std::map<PseudonymId, VehicleId> pseudonym_owner;

    std::vector<GroundTruthRecord> for_vehicle(const VehicleId& v) const {
        std::vector<GroundTruthRecord> out;
        for (const GroundTruthRecord& r : records)
            if (r.vehicle == v) out.push_back(r);
        return out;
    }

    std::string to_text() const {
        std::ostringstream out;
        for (const GroundTruthRecord& r : records)
            out << "record tick=" << r.tick << " vehicle=" << r.vehicle
                << " source=" << to_string(r.source) << " category=" << to_string(r.category)
                << " payload=" << to_hex(view(r.payload)) << "\n";
        for (const AttackNote& a : attacks)
            out << "attack tick=" << a.tick << " kind=" << scen::to_string(a.kind)
                << " target=" << a.target << " executed=" << (a.executed ? 1 : 0)
                << (a.note.empty() ? "" : " note=" + a.note) << "\n";
        return out.str();
    }
};

struct Metrics {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& value) { values[key] = value; }
    void set(const std::string& key, std::uint64_t value) { values[key] = std::to_string(value); }
    void bump(const std::string& key) {
        auto it = values.find(key);
        std::uint64_t v = it == values.end() ? 0 : std::stoull(it->second);
        values[key] = std::to_string(v + 1);
    }
    std::uint64_t count(const std::string& key) const {
        auto it = values.find(key);
        return it == values.end() ? 0 : std::stoull(it->second);
    }

    std::string to_text() const {
        std::ostringstream out;
        for (const auto& [k, v] : values) out << k << "=" << v << "\n";
        return out.str();
    }
};

struct VehicleArtifacts {
    rec::ExportedLog log;
    std::string log_text;
    v2x::TicketStore accepted_tickets;
    std::vector<pki::AuthorizationTicket> own_tickets;
    crypto::PublicKey pubkey{};
};

struct RunArtifacts {
    std::map<VehicleId, VehicleArtifacts> vehicles;
    GroundTruth ground_truth;
    Metrics metrics;
    std::vector<Bytes> emitted_wire;
    std::string pki_text;
};

class Simulation {
public:
    explicit Simulation(scen::Scenario scenario)
        : scenario_(std::move(scenario)),
          pki_(scenario_.seed, scenario_.rotation_period),
          attack_rng_(crypto::derive_u64(scenario_.seed, "attacks")),
          engine_(access::default_policy(), access::CredentialIssuer(scenario_.seed)) {}

    Result<void> run() {
        auto errors = scen::validate(scenario_);
        if (!errors.empty()) {
            std::ostringstream msg;
            for (std::size_t i = 0; i < errors.size(); ++i) {
                if (i) msg << "; ";
                msg << errors[i].path << ": " << errors[i].reason;
            }
            return make_error(Errc::InvalidScenario, msg.str());
        }
        setup();
        for (Tick t = 0; t < scenario_.duration; ++t) step(t);
        finish();
        return {};
    }

    // Live state, for post-run querying and reconstruction.
    pki::Pki& authority() { return pki_; }
    access::QueryEngine& engine() { return engine_; }
    const ConsentRegistry& registry() const { return registry_; }
    Tick now() const { return scenario_.duration; }
    const GroundTruth& ground_truth() const { return gt_; }
    const RunArtifacts& artifacts() const { return artifacts_; }
    const scen::Scenario& scenario() const { return scenario_; }

    rec::Recorder& recorder(const VehicleId& v) { return rt(v).recorder; }
    Enricher& enricher(const VehicleId& v) { return rt(v).enricher; }
    const v2x::TicketStore& accepted_tickets(const VehicleId& v) { return rt(v).accepted; }
    const std::vector<pki::AuthorizationTicket>& own_tickets(const VehicleId& v) {
        return rt(v).tickets;
    }
    const crypto::PublicKey& vehicle_pubkey(const VehicleId& v) { return rt(v).keys.pub; }
    const crypto::SecretKey& vehicle_seckey(const VehicleId& v) { return rt(v).keys.sec; }
    EcuId edr_node(const VehicleId& v) { return rt(v).edr_node; }

    Result<access::QueryResult> query(const VehicleId& vehicle,
                                      const access::QueryRequest& request) {
        VehicleRt& v = rt(vehicle);
        return engine_.run(v.recorder, v.enricher, registry_, v.edr_node, request, now());
    }

    std::vector<v2x::StationCapability> discover(double x, double y, double radius) const {
        return v2x::discover(ads_, x, y, radius);
    }

private:
    struct PendingInbound {
        v2x::Inbound actual;
        pki::AuthorizationTicket ticket;
        PseudonymId predicted_pseudonym = 0;
        Bytes predicted_payload;
    };

    struct VehicleRt {
        VehicleRt(scen::VehicleCfg c, can::Bus b, Enricher e, rec::Recorder r)
            : cfg(std::move(c)), bus(std::move(b)), enricher(std::move(e)), recorder(std::move(r)) {}

        scen::VehicleCfg cfg;
        can::Bus bus;
        can::ReplayState replay;
        Enricher enricher;
        rec::Recorder recorder;
        crypto::KeyPair keys;
        pki::EnrolmentCredential credential;
        std::vector<pki::AuthorizationTicket> tickets;
        std::map<PseudonymId, crypto::SecretKey> ticket_keys;
        v2x::ReceiverState rx;
        v2x::TicketStore accepted;
        std::vector<EcuId> sensors;
        EcuId decision_node, actuator_node, gateway_node, edr_node;
        double x = 0, y = 0;
        double speed = 0, prev_speed = 0, heading = 0;
        PseudonymId last_pseudonym = 0;
        std::uint64_t rotations = 0;
        bool collided = false;
        // per-tick pending, actual and predicted side by side
        std::vector<PendingInbound> pending_inbound;
        std::vector<std::string> pending_rejections;
        std::vector<std::string> pending_rejections_pred;
        std::vector<std::string> pending_attest;
        std::vector<std::string> pending_attest_pred;
        // ground-truth prediction state
        std::set<std::uint16_t> gt_compromised;
        std::uint64_t gt_seq = 0;
        std::uint64_t gt_tag = 0;
        RecordId gt_last_wheel;
        bool gt_has_wheel = false;
    };

    struct RsuRt {
        scen::RsuCfg cfg;
        std::vector<pki::AuthorizationTicket> tickets;
        std::map<PseudonymId, crypto::SecretKey> ticket_keys;
    };

    VehicleRt& rt(const VehicleId& v) {
        for (VehicleRt& r : vehicles_)
            if (r.cfg.id == v) return r;
        throw std::out_of_range("unknown vehicle " + v);
    }

    double dt_seconds() const { return static_cast<double>(scenario_.ms_per_tick) / 1000.0; }

    static std::pair<double, double> velocity_at(const scen::VehicleCfg& cfg, Tick t) {
        double vx = 0, vy = 0;
        for (const scen::VelocityStep& s : cfg.velocity) {
            if (s.from <= t) {
                vx = s.vx;
                vy = s.vy;
            }
        }
        return {vx, vy};
    }

    MessageTypeTable build_table() const {
        MessageTypeTable t = default_message_types();
        for (const scen::MessageTypeCfg& m : scenario_.message_types)
            (void)t.declare(m.id, m.name, m.category);
        return t;
    }

    std::uint32_t pool_size(Tick start) const {
        if (scenario_.tickets_per_vehicle) return *scenario_.tickets_per_vehicle;
        Tick remaining = scenario_.duration > start ? scenario_.duration - start : 0;
        return static_cast<std::uint32_t>(remaining / scenario_.rotation_period + 1);
    }

    rec::RetentionPolicy retention_for(const scen::VehicleCfg& cfg) const {
        rec::RetentionPolicy p;
        for (const scen::RetentionSetting& r : cfg.retention)
            p.set(r.category, rec::RetentionRule{r.store, r.max_age, r.ring_capacity});
        return p;
    }

    void setup() {
        ScenarioClock clock{scenario_.epoch_ms, scenario_.ms_per_tick};
        std::uint32_t index = 0;
        for (const scen::VehicleCfg& cfg : scenario_.vehicles) {
            VehicleRt v(cfg, can::Bus(cfg.id, scenario_.seed),
                        Enricher(cfg.id, cfg.id, build_table(), clock),
                        rec::Recorder(retention_for(cfg)));
            v.x = cfg.x;
            v.y = cfg.y;
            v.gt_tag = vehicle_tag(cfg.id);

            for (const scen::SensorSpec& s : cfg.sensors) {
                auto id = v.bus.register_ecu(
                    EcuRole::DataSource, crypto::sha256(view("fw:" + cfg.id + ":" + s.descriptor)));
                v.sensors.push_back(id.value());
            }
            v.decision_node =
                v.bus.register_ecu(EcuRole::DecisionMaking, crypto::sha256(view("fw:decision")))
                    .value();
            v.actuator_node =
                v.bus.register_ecu(EcuRole::Actuating, crypto::sha256(view("fw:actuator"))).value();
            v.gateway_node =
                v.bus.register_ecu(EcuRole::DataSource, crypto::sha256(view("fw:gateway"))).value();
            v.edr_node =
                v.bus.register_ecu(EcuRole::DataCollection, crypto::sha256(view("fw:edr"))).value();
            v.bus.seal();

            registry_.register_subject(cfg.id, clock.wall(0));
            for (const scen::ConsentSetting& c : cfg.consent)
                (void)registry_.set_state(cfg.id, c.category, c.state, clock.wall(0));

            auto enrolment = pki_.enrol(cfg.id);
            v.credential = enrolment.value().credential;
            v.keys = enrolment.value().vehicle_keys;
            Tick start = scenario_.ticket_stagger * index;
            auto tickets = pki_.request_tickets(v.credential, pool_size(start), start);
            v.tickets = tickets.value();
            for (const pki::AuthorizationTicket& t : v.tickets) {
                v.ticket_keys[t.pseudonym] = pki_.ticket_secret(t.pseudonym, cfg.id).value();
                gt_.pseudonym_owner[t.pseudonym] = cfg.id;
            }
            vehicles_.push_back(std::move(v));
            ++index;
        }
        for (const scen::RsuCfg& cfg : scenario_.rsus) {
            RsuRt r{cfg, {}, {}};
            auto enrolment = pki_.enrol(cfg.id);
            auto tickets = pki_.request_tickets(enrolment.value().credential, pool_size(0), 0);
            r.tickets = tickets.value();
            for (const pki::AuthorizationTicket& t : r.tickets) {
                r.ticket_keys[t.pseudonym] = pki_.ticket_secret(t.pseudonym, cfg.id).value();
                gt_.pseudonym_owner[t.pseudonym] = cfg.id;
            }
            rsus_.push_back(std::move(r));
        }
    }

    /// Script-side prediction of one enrichment. Counts every enriched
    /// record (stored or filtered) so record-id sequences stay aligned.
    void gt_enrich(VehicleRt& v, Tick t, const SourceId& source, RecordCategory category,
                   const Bytes& payload, bool is_wheel = false) {
        RecordId id{v.gt_tag, v.gt_seq++};
        if (is_wheel) {
            v.gt_last_wheel = id;
            v.gt_has_wheel = true;
        }
        EnrichedRecord probe;
        probe.category = category;
        if (rec::filter(probe, v.recorder.policy()))
            gt_.records.push_back(GroundTruthRecord{t, v.cfg.id, source, category, payload});
    }

    struct Emission {
        EcuId source;
        std::string descriptor;
        RecordCategory category;
        Bytes payload;
    };

    void step(Tick t) {
        ScenarioClock clock{scenario_.epoch_ms, scenario_.ms_per_tick};

        // 1. movement + consent script + scripted events
        for (VehicleRt& v : vehicles_) {
            if (t > 0) {
                auto [pvx, pvy] = velocity_at(v.cfg, t - 1);
                v.x += pvx * dt_seconds();
                v.y += pvy * dt_seconds();
            }
            auto [vx, vy] = velocity_at(v.cfg, t);
            v.prev_speed = v.speed;
            v.speed = std::sqrt(vx * vx + vy * vy);
            if (vx != 0 || vy != 0)
                v.heading = v2x::normalize_heading(std::atan2(vy, vx) * 180.0 / M_PI);
            v.collided = false;
            for (const scen::ConsentChange& c : v.cfg.consent_changes) {
                if (c.tick == t)
                    (void)registry_.set_state(v.cfg.id, c.category, c.state, clock.wall(t));
            }
        }
        for (const scen::EventCfg& e : scenario_.events) {
            if (e.tick == t && e.kind == "collision") rt(e.vehicle).collided = true;
        }

        // 2. emissions + V2X exchange + message attacks
        for (VehicleRt& v : vehicles_) emit_and_broadcast(v, t);
        for (RsuRt& r : rsus_) rsu_advertise(r, t);
        for (const scen::AttackCfg& a : scenario_.attacks) {
            if (a.tick != t) continue;
            if (a.kind == scen::AttackKind::SpoofCam) attack_spoof(a, t);
            if (a.kind == scen::AttackKind::ReplayCam) attack_replay(a, t);
        }

        // 3. attestation sweep (results become this tick's system records)
        bool sweep = t > 0 && (t % scenario_.attest_period == 0 || t + 1 == scenario_.duration);
        if (sweep) {
            for (VehicleRt& v : vehicles_) {
                for (const EcuId& node : v.bus.node_ids()) {
                    std::uint64_t nonce = crypto::derive_u64(
                        scenario_.seed, "attest:" + v.cfg.id + ":" + std::to_string(node.node) +
                                            ":" + std::to_string(t));
                    auto report = v.bus.attest_node(node, nonce);
                    auto outcome = v.bus.verify_attestation(report.value(), nonce);
                    if (outcome != can::AttestOutcome::Ok) {
                        v.pending_attest.push_back(
                            "attest-fail node=" + std::to_string(node.node) +
                            " outcome=" + std::string(can::to_string(outcome)));
                        metrics_.bump("attest_failures[" + v.cfg.id + "]");
                    }
                    if (v.gt_compromised.contains(node.node))
                        v.pending_attest_pred.push_back("attest-fail node=" +
                                                        std::to_string(node.node) +
                                                        " outcome=DigestMismatch");
                }
            }
        }

        // 4. deliver + record
        for (VehicleRt& v : vehicles_) record_phase(v, t);

        // 5. post-storage attacks
        for (const scen::AttackCfg& a : scenario_.attacks) {
            if (a.tick != t) continue;
            if (a.kind == scen::AttackKind::TamperLog) attack_tamper_log(a, t);
            if (a.kind == scen::AttackKind::TamperEcu) attack_tamper_ecu(a, t);
            if (a.kind == scen::AttackKind::DamageMirror) attack_damage_mirror(a, t);
        }

        // 6. retention expiry
        for (VehicleRt& v : vehicles_) v.recorder.expire(t);
    }

    void emit_and_broadcast(VehicleRt& v, Tick t) {
        std::vector<Emission> emissions;

        for (std::size_t i = 0; i < v.cfg.sensors.size(); ++i) {
            const scen::SensorSpec& s = v.cfg.sensors[i];
            if (t % s.period != 0) continue;
            Bytes p;
            if (s.descriptor == "wheel-speed") {
                p = payload::wheel_speed(v.speed);
            } else if (s.descriptor == "camera-frame") {
                p = payload::camera_frame(
                    static_cast<std::uint32_t>(t),
                    crypto::derive_u64(scenario_.seed, "frame:" + v.cfg.id + ":" + std::to_string(t)));
            } else if (s.descriptor == "diagnostic") {
                p = payload::diagnostic_text("diag t=" + std::to_string(t));
            } else {
                auto id = v.enricher.table().id_of(s.descriptor);
                ByteWriter w;
                w.u8(id.value_or(0));
                w.u64(t);
                p = w.take();
            }
            auto category = v.enricher.table().classify(s.descriptor);
            emissions.push_back(Emission{v.sensors[i], s.descriptor, category.value(), p});
        }

        bool hard_brake = v2x::detect_event(v.prev_speed, v.speed, dt_seconds(),
                                            scenario_.decel_threshold,
                                            false) == v2x::DenmCause::HardBraking;
        bool fire = hard_brake || v.collided;
        if (fire) {
            std::vector<RecordId> refs;
            if (v.gt_has_wheel) refs.push_back(v.gt_last_wheel);
            auto code = v.collided ? payload::DecisionCode::CollisionResponse
                                   : payload::DecisionCode::HardBrake;
            emissions.push_back(Emission{v.decision_node, "decision-trace",
                                         RecordCategory::DecisionTrace,
                                         payload::decision_trace(code, refs)});
            emissions.push_back(Emission{v.actuator_node, "brake-command",
                                         RecordCategory::ActuationCommand,
                                         payload::brake_command(1.0)});
        }

        auto ticket = pki::active_ticket(v.tickets, t);
        if (t % scenario_.cam_period == 0) {
            if (ticket) {
                v2x::CamMessage cam{ticket.value().pseudonym, v.x, v.y, v.heading, v.speed, t};
                emissions.push_back(Emission{v.gateway_node, "cam-outbound",
                                             RecordCategory::V2xOutbound,
                                             v2x::cam_outbound_payload(cam)});
                broadcast(v, v2x::cam_body(cam), v2x::cam_inbound_payload(cam), ticket.value(), t);
                note_rotation(v, ticket.value().pseudonym);
                gt_.sent_by[v.cfg.id]++;
                metrics_.bump("cam_sent[" + v.cfg.id + "]");
                if (!v.cfg.capabilities.empty()) {
                    v2x::StationCapability ad{ticket.value().pseudonym, v.cfg.willing,
                                              v.cfg.capabilities, t};
                    advertise(v.cfg.id, v.x, v.y, ad, ticket.value(),
                              v.ticket_keys.at(ticket.value().pseudonym));
                }
            } else {
                metrics_.bump("cam_suppressed[" + v.cfg.id + "]");
            }
        }
        if (fire) {
            if (ticket) {
                double ex = v.x, ey = v.y;
                for (const scen::EventCfg& e : scenario_.events) {
                    if (e.tick == t && e.vehicle == v.cfg.id) {
                        if (e.x) ex = *e.x;
                        if (e.y) ey = *e.y;
                    }
                }
                v2x::DenmMessage denm{ticket.value().pseudonym,
                                      v.collided ? v2x::DenmCause::Collision
                                                 : v2x::DenmCause::HardBraking,
                                      t, ex, ey, t};
                emissions.push_back(Emission{v.gateway_node, "denm-outbound",
                                             RecordCategory::V2xOutbound,
                                             v2x::denm_outbound_payload(denm)});
                broadcast(v, v2x::denm_body(denm), v2x::denm_inbound_payload(denm), ticket.value(),
                          t);
                note_rotation(v, ticket.value().pseudonym);
                gt_.sent_by[v.cfg.id]++;
                metrics_.bump("denm_sent[" + v.cfg.id + "]");
            } else {
                metrics_.bump("denm_suppressed[" + v.cfg.id + "]");
            }
        }

        // queue on the bus; emission order equals (sender, counter) delivery
        // order because nodes emit in ascending node id
        for (const Emission& e : emissions) {
            auto frame = v.bus.send(e.source, e.payload);
            if (frame)
                gt_enrich(v, t, SourceId{e.source}, e.category, e.payload,
                          e.descriptor == "wheel-speed");
            else
                metrics_.bump("send_errors[" + v.cfg.id + "]");
        }
    }

    void note_rotation(VehicleRt& v, PseudonymId used) {
        if (v.last_pseudonym != 0 && v.last_pseudonym != used) {
            ++v.rotations;
            metrics_.bump("rotations");
        }
        v.last_pseudonym = used;
    }

    void broadcast(VehicleRt& from, Bytes body, Bytes predicted_inbound_payload,
                   const pki::AuthorizationTicket& ticket, Tick t) {
        v2x::SignedMessage msg =
            v2x::sign_message(std::move(body), ticket, from.ticket_keys.at(ticket.pseudonym));
        artifacts_.emitted_wire.push_back(v2x::serialize_message(msg));
        archive_.push_back({t, msg});
        for (VehicleRt& w : vehicles_) {
            if (w.cfg.id == from.cfg.id) continue;
            if (v2x::distance(from.x, from.y, w.x, w.y) > scenario_.range_m) continue;
            deliver(w, msg, t, std::nullopt, predicted_inbound_payload);
        }
    }

    void advertise(const std::string& station, double x, double y,
                   const v2x::StationCapability& ad, const pki::AuthorizationTicket& ticket,
                   const crypto::SecretKey& key) {
        v2x::SignedMessage msg = v2x::sign_message(v2x::capability_body(ad), ticket, key);
        artifacts_.emitted_wire.push_back(v2x::serialize_message(msg));
        ads_[station] = v2x::AdvertisedStation{x, y, ad};
    }

    void rsu_advertise(RsuRt& r, Tick t) {
        if (t % scenario_.cam_period != 0) return;
        auto ticket = pki::active_ticket(r.tickets, t);
        if (!ticket) return;
        v2x::StationCapability ad{ticket.value().pseudonym, r.cfg.willing, r.cfg.capabilities, t};
        advertise(r.cfg.id, r.cfg.x, r.cfg.y, ad, ticket.value(),
                  r.ticket_keys.at(ticket.value().pseudonym));
    }

    /// Runs the hostile-input path on one receiver. `predicted_reason` is
    /// the harness's own expectation: nullopt for honest traffic (accept),
    /// an error code for scripted attacks.
    void deliver(VehicleRt& w, const v2x::SignedMessage& msg, Tick t,
                 std::optional<Errc> predicted_reason, const Bytes& predicted_payload) {
        gt_.delivered_to[w.cfg.id]++;
        auto in = v2x::receive(msg, pki_.trust(), t, scenario_.freshness_window, w.rx);
        if (in) {
            w.pending_inbound.push_back(
                PendingInbound{in.value(), msg.ticket, msg.ticket.pseudonym, predicted_payload});
            metrics_.bump("accepted[" + w.cfg.id + "]");
        } else {
            std::ostringstream note;
            note << "v2x-reject reason=" << to_string(in.error().code)
                 << " pseudonym=" << std::hex << msg.ticket.pseudonym;
            w.pending_rejections.push_back(note.str());
            metrics_.bump("rejected[" + std::string(to_string(in.error().code)) + "]");
            metrics_.bump("rejections[" + w.cfg.id + "]");
        }
        // prediction, independent of the receive() outcome
        if (predicted_reason) {
            std::ostringstream note;
            note << "v2x-reject reason=" << to_string(*predicted_reason)
                 << " pseudonym=" << std::hex << msg.ticket.pseudonym;
            w.pending_rejections_pred.push_back(note.str());
        }
        // honest traffic: prediction is acceptance, handled in record_phase
    }

    void record_phase(VehicleRt& v, Tick t) {
        // CAN batch
        for (const can::AuthenticatedFrame& frame : v.bus.tick()) {
            auto verified = can::authenticate_frame(frame, v.bus.keys(), v.replay);
            if (!verified) {
                metrics_.bump("can_auth_failures[" + v.cfg.id + "]");
                continue;
            }
            std::uint8_t desc_id =
                verified.value().payload.empty() ? 0 : verified.value().payload[0];
            auto name = v.enricher.table().name_of(desc_id);
            if (!name) {
                metrics_.bump("unknown_descriptor[" + v.cfg.id + "]");
                continue;
            }
            auto record = v.enricher.enrich(verified.value(), *name, registry_);
            if (record && v.recorder.keep(record.value())) {
                (void)v.recorder.append(record.value());
                metrics_.bump("records_stored[" + v.cfg.id + "]");
            }
        }
        // system records: rejections then attestation results
        for (const std::string& text : v.pending_rejections)
            append_system(v, t, payload::health_text(text));
        for (const std::string& text : v.pending_rejections_pred)
            gt_enrich(v, t, SourceId{v.edr_node}, RecordCategory::SystemHealth,
                      payload::health_text(text));
        for (const std::string& text : v.pending_attest)
            append_system(v, t, payload::health_text(text));
        for (const std::string& text : v.pending_attest_pred)
            gt_enrich(v, t, SourceId{v.edr_node}, RecordCategory::SystemHealth,
                      payload::health_text(text));
        v.pending_rejections.clear();
        v.pending_rejections_pred.clear();
        v.pending_attest.clear();
        v.pending_attest_pred.clear();

        // accepted inbound, ordered by pseudonym (stable per sender)
        std::stable_sort(v.pending_inbound.begin(), v.pending_inbound.end(),
                         [](const PendingInbound& a, const PendingInbound& b) {
                             return a.actual.pseudonym < b.actual.pseudonym;
                         });
        for (const PendingInbound& p : v.pending_inbound) {
            Bytes payload = p.actual.type == v2x::MessageType::Cam
                                ? v2x::cam_inbound_payload(*p.actual.cam)
                                : v2x::denm_inbound_payload(*p.actual.denm);
            auto record = v.enricher.enrich_inbound(p.actual.pseudonym, payload, t, registry_);
            if (record && v.recorder.keep(record.value())) {
                (void)v.recorder.append(record.value());
                metrics_.bump("records_stored[" + v.cfg.id + "]");
            }
            v.accepted.emplace(p.ticket.pseudonym, p.ticket);
            gt_enrich(v, t, SourceId{p.predicted_pseudonym}, RecordCategory::V2xInbound,
                      p.predicted_payload);
        }
        v.pending_inbound.clear();
    }

    void append_system(VehicleRt& v, Tick t, const Bytes& payload) {
        auto record = v.enricher.enrich_system(v.edr_node, payload, t, "health", registry_);
        if (record && v.recorder.keep(record.value())) {
            (void)v.recorder.append(record.value());
            metrics_.bump("records_stored[" + v.cfg.id + "]");
        }
    }

    // --- attacks --------------------------------------------------------------

    void attack_spoof(const scen::AttackCfg& a, Tick t) {
        VehicleRt& target = rt(a.target);
        crypto::KeyPair rogue = crypto::keypair_from_seed(
            crypto::derive_seed(scenario_.seed, "rogue", attack_rng_.next()));
        pki::AuthorizationTicket forged;
        forged.pseudonym = attack_rng_.next();
        forged.pub = rogue.pub;
        forged.valid_from = 0;
        forged.valid_to = ~Tick{0};
        forged.issuer = "rogue-ca";
        forged.sig = crypto::sign(rogue.sec, view(pki::ticket_message(forged)));
        v2x::CamMessage cam{forged.pseudonym, target.x, target.y, 0.0, 0.0, t};
        v2x::SignedMessage msg = v2x::sign_message(v2x::cam_body(cam), forged, rogue.sec);
        artifacts_.emitted_wire.push_back(v2x::serialize_message(msg));
        deliver(target, msg, t, Errc::UntrustedRoot, {});
        gt_.attacks.push_back({t, a.kind, a.target, true, "forged ticket"});
        metrics_.bump("attacks_executed");
    }

    void attack_replay(const scen::AttackCfg& a, Tick t) {
        // most recent archived broadcast that is already stale at t
        const Archived* pick = nullptr;
        for (const Archived& m : archive_) {
            if (t > m.tick && t - m.tick > scenario_.freshness_window) pick = &m;
        }
        if (!pick) {
            gt_.attacks.push_back({t, a.kind, a.target, false, "no stale message to replay"});
            metrics_.bump("attacks_skipped");
            return;
        }
        VehicleRt& target = rt(a.target);
        artifacts_.emitted_wire.push_back(v2x::serialize_message(pick->msg));
        Errc predicted =
            t > pick->msg.ticket.valid_to ? Errc::Expired : Errc::StaleMessage;
        deliver(target, pick->msg, t, predicted, {});
        gt_.attacks.push_back({t, a.kind, a.target, true, "replay of tick " +
                                                              std::to_string(pick->tick)});
        metrics_.bump("attacks_executed");
    }

    void attack_tamper_log(const scen::AttackCfg& a, Tick t) {
        VehicleRt& target = rt(a.target);
        rec::LogCopy& log = target.recorder.damage_primary();
        if (log.size() == 0) {
            gt_.attacks.push_back({t, a.kind, a.target, false, "empty log"});
            metrics_.bump("attacks_skipped");
            return;
        }
        std::uint64_t seq =
            a.seq ? std::min(*a.seq, log.size() - 1) : attack_rng_.below(log.size());
        flip_bit(log, seq);
        gt_.attacks.push_back({t, a.kind, a.target, true, "seq=" + std::to_string(seq)});
        metrics_.bump("attacks_executed");
    }

    void attack_damage_mirror(const scen::AttackCfg& a, Tick t) {
        VehicleRt& target = rt(a.target);
        rec::LogCopy& log = target.recorder.damage_mirror();
        if (log.size() == 0) {
            gt_.attacks.push_back({t, a.kind, a.target, false, "empty log"});
            metrics_.bump("attacks_skipped");
            return;
        }
        std::uint64_t seq =
            a.seq ? std::min(*a.seq, log.size() - 1) : attack_rng_.below(log.size());
        flip_bit(log, seq);
        gt_.attacks.push_back({t, a.kind, a.target, true, "seq=" + std::to_string(seq)});
        metrics_.bump("attacks_executed");
    }

    static void flip_bit(rec::LogCopy& log, std::uint64_t seq) {
        rec::StoredRecord& s = log.records[seq];
        if (!s.tombstoned && !s.record.payload.empty()) s.record.payload[0] ^= 0x01;
        else log.entries[seq].record_hash[0] ^= 0x01;
    }

    void attack_tamper_ecu(const scen::AttackCfg& a, Tick t) {
        VehicleRt& target = rt(a.target);
        auto nodes = target.bus.node_ids();
        std::uint64_t idx = a.node ? std::min<std::uint64_t>(*a.node, nodes.size() - 1)
                                   : attack_rng_.below(nodes.size());
        (void)target.bus.set_current_digest(
            nodes[idx],
            crypto::sha256(view("compromised:" + std::to_string(attack_rng_.next()))));
        target.gt_compromised.insert(nodes[idx].node);
        gt_.attacks.push_back(
            {t, a.kind, a.target, true, "node=" + std::to_string(nodes[idx].node)});
        metrics_.bump("attacks_executed");
    }

    // --- end of run -------------------------------------------------------------

    void finish() {
        metrics_.set("vehicles", static_cast<std::uint64_t>(vehicles_.size()));
        metrics_.set("duration", scenario_.duration);
        for (VehicleRt& v : vehicles_) {
            metrics_.set("rotations[" + v.cfg.id + "]", v.rotations);

            auto status = v.recorder.verify();
            metrics_.set("chain[" + v.cfg.id + "]",
                         status.ok() ? "Ok"
                                     : "FirstBadIndex(" + std::to_string(*status.first_bad) + ")");
            metrics_.set("mirror[" + v.cfg.id + "]",
                         v.recorder.primary() == v.recorder.mirror() ? "InSync" : "Diverged");

            if (v.recorder.primary().size() > 0)
                (void)v.recorder.seal_segment(0, v.recorder.primary().size() - 1, v.keys.sec);

            VehicleArtifacts art;
            art.log = rec::ExportedLog{v.cfg.id, v.recorder.genesis(), v.keys.pub,
                                       v.recorder.primary(), v.recorder.segments()};
            art.log_text = rec::dump_text(v.recorder.primary());
            art.accepted_tickets = v.accepted;
            art.own_tickets = v.tickets;
            art.pubkey = v.keys.pub;
            artifacts_.vehicles.emplace(v.cfg.id, std::move(art));
        }
        artifacts_.ground_truth = gt_;
        artifacts_.pki_text = pki_.trust_text();
        artifacts_.metrics = metrics_;
    }

    struct Archived {
        Tick tick = 0;
        v2x::SignedMessage msg;
    };

    scen::Scenario scenario_;
    pki::Pki pki_;
    crypto::Rng attack_rng_;
    access::QueryEngine engine_;
    ConsentRegistry registry_;
    std::vector<VehicleRt> vehicles_;
    std::vector<RsuRt> rsus_;
    std::map<std::string, v2x::AdvertisedStation> ads_;
    std::vector<Archived> archive_;
    GroundTruth gt_;
    Metrics metrics_;
    RunArtifacts artifacts_;
};

} // namespace edr::sim
