#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "edr/result.hpp"
#include "edr/types.hpp"

// Scenario files fully determine a run: seed, world parameters, vehicles
// with velocity scripts and ECU rosters, roadside units, scripted events and
// attacks. Two representations are accepted — a line-oriented structured
// text form and JSON — both mapped onto one internal node tree before
// building, so validation reports identical paths for both.

namespace edr::scen {

enum class AttackKind : std::uint8_t {
    SpoofCam = 0,
    ReplayCam = 1,
    TamperLog = 2,
    TamperEcu = 3,
    DamageMirror = 4,
};

inline constexpr std::uint8_t kAttackKindCount = 5;

inline std::string_view to_string(AttackKind k) {
    switch (k) {
        case AttackKind::SpoofCam: return "SpoofCam";
        case AttackKind::ReplayCam: return "ReplayCam";
        case AttackKind::TamperLog: return "TamperLog";
        case AttackKind::TamperEcu: return "TamperEcu";
        case AttackKind::DamageMirror: return "DamageMirror";
    }
    return "?";
}

inline std::optional<AttackKind> attack_kind_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < kAttackKindCount; ++i) {
        auto k = static_cast<AttackKind>(i);
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

struct SensorSpec {
    std::string descriptor;
    Tick period = 1;
};

struct VelocityStep {
    Tick from = 0;
    double vx = 0;
    double vy = 0;
};

struct ConsentSetting {
    RecordCategory category = RecordCategory::VehicleDynamics;
    ConsentState state = ConsentState::Denied;
};

struct ConsentChange {
    Tick tick = 0;
    RecordCategory category = RecordCategory::VehicleDynamics;
    ConsentState state = ConsentState::Denied;
};

struct RetentionSetting {
    RecordCategory category = RecordCategory::VehicleDynamics;
    bool store = true;
    std::optional<Tick> max_age;
    std::optional<std::uint64_t> ring_capacity;
};

struct VehicleCfg {
    VehicleId id;
    double x = 0;
    double y = 0;
    std::vector<VelocityStep> velocity;
    std::vector<SensorSpec> sensors;
    std::vector<ConsentSetting> consent;
    std::vector<ConsentChange> consent_changes;
    std::vector<RetentionSetting> retention;
    std::vector<std::string> capabilities;
    bool willing = true;
};

struct RsuCfg {
    std::string id;
    double x = 0;
    double y = 0;
    std::vector<std::string> capabilities;
    bool willing = true;
};

struct EventCfg {
    Tick tick = 0;
    std::string kind = "collision";
    VehicleId vehicle;
    std::optional<double> x;
    std::optional<double> y;
};

struct AttackCfg {
    Tick tick = 0;
    AttackKind kind = AttackKind::SpoofCam;
    VehicleId target;
    std::optional<std::uint64_t> seq;  // TamperLog / DamageMirror
    std::optional<std::uint64_t> node; // TamperEcu
};

struct MessageTypeCfg {
    std::uint8_t id = 0;
    std::string name;
    RecordCategory category = RecordCategory::Diagnostic;
};

struct Scenario {
    std::uint64_t seed = 1;
    Tick duration = 100;
    WallMs epoch_ms = 0;
    WallMs ms_per_tick = 100;
    double range_m = 300.0;
    Tick cam_period = 10;
    Tick freshness_window = 20;
    Tick rotation_period = 300;
    double decel_threshold = 6.0; // m/s^2
    Tick attest_period = 50;
    std::optional<std::uint32_t> tickets_per_vehicle;
    Tick ticket_stagger = 0;
    std::vector<MessageTypeCfg> message_types;
    std::vector<VehicleCfg> vehicles;
    std::vector<RsuCfg> rsus;
    std::vector<EventCfg> events;
    std::vector<AttackCfg> attacks;
};

struct ValidationError {
    std::string path;
    std::string reason;
};

// --- node tree, shared by both input forms ---------------------------------

struct Node {
    std::vector<std::string> values;
    std::vector<std::pair<std::string, Node>> children;
};

namespace detail {

inline Result<Node> parse_text(std::string_view content) {
    Node root;
    std::vector<Node*> stack{&root};
    std::istringstream in{std::string(content)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() == 1 && tokens[0] == "}") {
            if (stack.size() == 1)
                return make_error(Errc::ParseError,
                                  "line " + std::to_string(line_no) + ": unmatched '}'");
            stack.pop_back();
            continue;
        }
        bool opens = tokens.back() == "{";
        if (opens) tokens.pop_back();
        if (tokens.empty())
            return make_error(Errc::ParseError,
                              "line " + std::to_string(line_no) + ": '{' without a key");
        Node child;
        child.values.assign(tokens.begin() + 1, tokens.end());
        stack.back()->children.emplace_back(tokens[0], std::move(child));
        if (opens) stack.push_back(&stack.back()->children.back().second);
    }
    if (stack.size() != 1) return make_error(Errc::ParseError, "unclosed '{'");
    return root;
}

inline std::string json_scalar(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
    return j.dump();
}

inline Node json_to_node(const nlohmann::json& j) {
    Node n;
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_array() && !value.empty() && value[0].is_object()) {
                for (const auto& element : value) n.children.emplace_back(key, json_to_node(element));
            } else if (value.is_object()) {
                n.children.emplace_back(key, json_to_node(value));
            } else if (value.is_array()) {
                Node child;
                for (const auto& element : value) child.values.push_back(json_scalar(element));
                n.children.emplace_back(key, std::move(child));
            } else {
                Node child;
                child.values.push_back(json_scalar(value));
                n.children.emplace_back(key, std::move(child));
            }
        }
    }
    return n;
}

/// Path-tracked accessor over a Node; collects every violation instead of
/// stopping at the first.
class Cursor {
public:
    Cursor(const Node* node, std::string path, std::vector<ValidationError>* errors)
        : node_(node), path_(std::move(path)), errors_(errors) {}

    std::vector<Cursor> children(const std::string& key) const {
        std::vector<Cursor> out;
        int index = 0;
        for (const auto& [k, child] : node_->children) {
            if (k == key)
                out.emplace_back(&child, path_ + "." + key + "[" + std::to_string(index++) + "]",
                                 errors_);
        }
        return out;
    }

    const std::vector<std::string>* values(const std::string& key) const {
        for (const auto& [k, child] : node_->children) {
            if (k == key) return &child.values;
        }
        return nullptr;
    }

    bool has(const std::string& key) const { return values(key) != nullptr; }

    std::string str(const std::string& key, std::string fallback = {}, bool required = false) const {
        const auto* v = values(key);
        if (!v || v->empty()) {
            if (required) fail(key, "required field missing");
            return fallback;
        }
        return (*v)[0];
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback = 0,
                      bool required = false) const {
        const auto* v = values(key);
        if (!v || v->empty()) {
            if (required) fail(key, "required field missing");
            return fallback;
        }
        try {
            if (!(*v)[0].empty() && (*v)[0][0] == '-') {
                fail(key, "must be non-negative, got " + (*v)[0]);
                return fallback;
            }
            return std::stoull((*v)[0]);
        } catch (const std::exception&) {
            fail(key, "not an unsigned integer: " + (*v)[0]);
            return fallback;
        }
    }

    double f64(const std::string& key, double fallback = 0.0, bool required = false) const {
        const auto* v = values(key);
        if (!v || v->empty()) {
            if (required) fail(key, "required field missing");
            return fallback;
        }
        try {
            return std::stod((*v)[0]);
        } catch (const std::exception&) {
            fail(key, "not a number: " + (*v)[0]);
            return fallback;
        }
    }

    bool boolean(const std::string& key, bool fallback) const {
        const auto* v = values(key);
        if (!v || v->empty()) return fallback;
        if ((*v)[0] == "true") return true;
        if ((*v)[0] == "false") return false;
        fail(key, "not a boolean: " + (*v)[0]);
        return fallback;
    }

    /// Two-number field like `position -200 0`.
    std::pair<double, double> pair_f64(const std::string& key) const {
        const auto* v = values(key);
        if (!v || v->size() != 2) {
            fail(key, "expected two numbers");
            return {0, 0};
        }
        try {
            return {std::stod((*v)[0]), std::stod((*v)[1])};
        } catch (const std::exception&) {
            fail(key, "not numbers: " + (*v)[0] + " " + (*v)[1]);
            return {0, 0};
        }
    }

    std::vector<std::string> strings(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, child] : node_->children) {
            if (k == key && !child.values.empty()) out.push_back(child.values[0]);
        }
        return out;
    }

    RecordCategory category(const std::string& key) const {
        std::string s = str(key, "", true);
        if (auto c = category_from_string(s)) return *c;
        if (!s.empty()) fail(key, "unknown category: " + s);
        return RecordCategory::VehicleDynamics;
    }

    ConsentState consent_state(const std::string& key) const {
        std::string s = str(key, "", true);
        if (s == "granted" || s == "Granted") return ConsentState::Granted;
        if (s == "denied" || s == "Denied") return ConsentState::Denied;
        if (!s.empty()) fail(key, "unknown consent state: " + s);
        return ConsentState::Denied;
    }

    void fail(const std::string& key, const std::string& reason) const {
        errors_->push_back({path_ + "." + key, reason});
    }

    void fail_here(const std::string& reason) const { errors_->push_back({path_, reason}); }

    const std::string& path() const { return path_; }

private:
    const Node* node_;
    std::string path_;
    std::vector<ValidationError>* errors_;
};

inline Scenario build(const Node& root, std::vector<ValidationError>& errors) {
    Scenario s;
    Cursor c(&root, "scenario", &errors);
    s.seed = c.u64("seed", 1);
    s.duration = c.u64("duration", 100);
    s.epoch_ms = c.u64("epoch_ms", 0);
    s.ms_per_tick = c.u64("ms_per_tick", 100);
    s.range_m = c.f64("range_m", 300.0);
    s.cam_period = c.u64("cam_period", 10);
    s.freshness_window = c.u64("freshness_window", 20);
    s.rotation_period = c.u64("rotation_period", 300);
    s.decel_threshold = c.f64("decel_threshold", 6.0);
    s.attest_period = c.u64("attest_period", 50);
    if (c.has("tickets_per_vehicle"))
        s.tickets_per_vehicle = static_cast<std::uint32_t>(c.u64("tickets_per_vehicle"));
    s.ticket_stagger = c.u64("ticket_stagger", 0);

    for (const Cursor& mc : c.children("message_type")) {
        MessageTypeCfg m;
        m.id = static_cast<std::uint8_t>(mc.u64("id", 0, true));
        m.name = mc.str("name", "", true);
        m.category = mc.category("category");
        s.message_types.push_back(std::move(m));
    }

    for (const Cursor& vc : c.children("vehicle")) {
        VehicleCfg v;
        v.id = vc.str("id", "", true);
        std::tie(v.x, v.y) = vc.pair_f64("position");
        for (const Cursor& sc : vc.children("velocity")) {
            VelocityStep step;
            step.from = sc.u64("from", 0);
            step.vx = sc.f64("vx", 0);
            step.vy = sc.f64("vy", 0);
            v.velocity.push_back(step);
        }
        for (const Cursor& ec : vc.children("sensor")) {
            SensorSpec spec;
            spec.descriptor = ec.str("descriptor", "", true);
            spec.period = ec.u64("period", 1);
            if (spec.period == 0) ec.fail("period", "must be >= 1");
            v.sensors.push_back(std::move(spec));
        }
        for (const Cursor& cc : vc.children("consent")) {
            ConsentSetting setting;
            setting.category = cc.category("category");
            setting.state = cc.consent_state("state");
            v.consent.push_back(setting);
        }
        for (const Cursor& cc : vc.children("consent_change")) {
            ConsentChange change;
            change.tick = cc.u64("tick", 0, true);
            change.category = cc.category("category");
            change.state = cc.consent_state("state");
            v.consent_changes.push_back(change);
        }
        for (const Cursor& rc : vc.children("retention")) {
            RetentionSetting r;
            r.category = rc.category("category");
            r.store = rc.boolean("store", true);
            if (rc.has("max_age")) r.max_age = rc.u64("max_age");
            if (rc.has("ring_capacity")) r.ring_capacity = rc.u64("ring_capacity");
            v.retention.push_back(r);
        }
        v.capabilities = vc.strings("capability");
        v.willing = vc.boolean("willing", true);
        s.vehicles.push_back(std::move(v));
    }

    for (const Cursor& rc : c.children("rsu")) {
        RsuCfg r;
        r.id = rc.str("id", "", true);
        std::tie(r.x, r.y) = rc.pair_f64("position");
        r.capabilities = rc.strings("capability");
        r.willing = rc.boolean("willing", true);
        s.rsus.push_back(std::move(r));
    }

    for (const Cursor& ec : c.children("event")) {
        EventCfg e;
        e.tick = ec.u64("tick", 0, true);
        e.kind = ec.str("kind", "collision");
        e.vehicle = ec.str("vehicle", "", true);
        if (ec.has("x")) e.x = ec.f64("x");
        if (ec.has("y")) e.y = ec.f64("y");
        s.events.push_back(std::move(e));
    }

    for (const Cursor& ac : c.children("attack")) {
        AttackCfg a;
        a.tick = ac.u64("tick", 0, true);
        std::string kind = ac.str("kind", "", true);
        if (auto k = attack_kind_from_string(kind)) a.kind = *k;
        else if (!kind.empty()) ac.fail("kind", "unknown attack kind: " + kind);
        a.target = ac.str("target", "", true);
        if (ac.has("seq")) a.seq = ac.u64("seq");
        if (ac.has("node")) a.node = ac.u64("node");
        s.attacks.push_back(std::move(a));
    }

    return s;
}

} // namespace detail

/// Semantic checks over a built scenario; every violation is reported.
inline std::vector<ValidationError> validate(const Scenario& s) {
    std::vector<ValidationError> errors;
    auto err = [&errors](std::string path, std::string reason) {
        errors.push_back({std::move(path), std::move(reason)});
    };
    if (s.duration == 0) err("scenario.duration", "must be >= 1");
    if (s.ms_per_tick == 0) err("scenario.ms_per_tick", "must be >= 1");
    if (s.cam_period == 0) err("scenario.cam_period", "must be >= 1");
    if (s.rotation_period == 0) err("scenario.rotation_period", "must be >= 1");
    if (s.attest_period == 0) err("scenario.attest_period", "must be >= 1");
    if (s.range_m < 0) err("scenario.range_m", "must be >= 0");

    std::map<std::string, int> vehicle_ids;
    for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
        const VehicleCfg& v = s.vehicles[i];
        std::string path = "scenario.vehicle[" + std::to_string(i) + "]";
        if (v.id.empty()) err(path + ".id", "required field missing");
        else if (++vehicle_ids[v.id] > 1) err(path + ".id", "duplicate vehicle id: " + v.id);
    }
    std::map<std::string, int> rsu_ids;
    for (std::size_t i = 0; i < s.rsus.size(); ++i) {
        const RsuCfg& r = s.rsus[i];
        std::string path = "scenario.rsu[" + std::to_string(i) + "]";
        if (r.id.empty()) err(path + ".id", "required field missing");
        else if (++rsu_ids[r.id] > 1 || vehicle_ids.contains(r.id))
            err(path + ".id", "duplicate station id: " + r.id);
    }
    std::map<std::uint8_t, int> descriptor_ids;
    std::map<std::string, int> descriptor_names;
    for (std::size_t i = 0; i < s.message_types.size(); ++i) {
        const MessageTypeCfg& m = s.message_types[i];
        std::string path = "scenario.message_type[" + std::to_string(i) + "]";
        if (m.id <= 11) err(path + ".id", "ids 1..11 are reserved for built-in descriptors");
        if (++descriptor_ids[m.id] > 1) err(path + ".id", "duplicate descriptor id");
        if (++descriptor_names[m.name] > 1) err(path + ".name", "duplicate descriptor name");
    }
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const EventCfg& e = s.events[i];
        std::string path = "scenario.event[" + std::to_string(i) + "]";
        if (e.kind != "collision") err(path + ".kind", "unknown event kind: " + e.kind);
        if (!vehicle_ids.contains(e.vehicle))
            err(path + ".vehicle", "unknown vehicle: " + e.vehicle);
        if (e.tick >= s.duration) err(path + ".tick", "beyond scenario duration");
    }
    for (std::size_t i = 0; i < s.attacks.size(); ++i) {
        const AttackCfg& a = s.attacks[i];
        std::string path = "scenario.attack[" + std::to_string(i) + "]";
        if (!vehicle_ids.contains(a.target)) err(path + ".target", "unknown vehicle: " + a.target);
        if (a.tick >= s.duration) err(path + ".tick", "beyond scenario duration");
    }
    return errors;
}

/// Parses either representation (JSON when the first non-space byte is '{'),
/// builds, and validates. The outcome is a scenario or the full error list.
inline std::vector<ValidationError> check(std::string_view content, Scenario* out = nullptr) {
    std::vector<ValidationError> errors;
    std::size_t i = content.find_first_not_of(" \t\r\n");
    Node root;
    if (i != std::string_view::npos && content[i] == '{') {
        nlohmann::json j = nlohmann::json::parse(content, nullptr, false);
        if (j.is_discarded()) {
            errors.push_back({"scenario", "invalid JSON"});
            return errors;
        }
        root = detail::json_to_node(j);
    } else {
        auto parsed = detail::parse_text(content);
        if (!parsed) {
            errors.push_back({"scenario", parsed.error().message()});
            return errors;
        }
        root = std::move(parsed).value();
    }
    Scenario s = detail::build(root, errors);
    auto semantic = validate(s);
    errors.insert(errors.end(), semantic.begin(), semantic.end());
    if (errors.empty() && out) *out = std::move(s);
    return errors;
}

inline Result<Scenario> load(std::string_view content) {
    Scenario s;
    auto errors = check(content, &s);
    if (!errors.empty()) {
        std::ostringstream msg;
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (i) msg << "; ";
            msg << errors[i].path << ": " << errors[i].reason;
        }
        return make_error(Errc::InvalidScenario, msg.str());
    }
    return s;
}

} // namespace edr::scen
