#include <catch2/catch_amalgamated.hpp>

#include "edr/scenario.hpp"

using namespace edr;
using namespace edr::scen;

namespace {

constexpr std::string_view kSample = R"(
# two vehicles approaching, one braking hard
seed 42
duration 120
ms_per_tick 1000
rotation_period 40
cam_period 5

vehicle {
  id veh-alpha
  position -200 0
  velocity {
    from 0
    vx 20
  }
  velocity {
    from 60
    vx 11
  }
  sensor {
    descriptor wheel-speed
    period 2
  }
  consent {
    category VehicleDynamics
    state granted
  }
}

vehicle {
  id veh-beta
  position 200 0
  velocity {
    from 0
    vx -15
  }
}

rsu {
  id rsu-1
  position 0 50
  capability camera
  capability traffic-signal
}

event {
  tick 80
  kind collision
  vehicle veh-alpha
}

attack {
  tick 50
  kind SpoofCam
  target veh-beta
}
)";

} // namespace

TEST_CASE("a well-formed text scenario loads cleanly") {
    auto s = load(kSample);
    REQUIRE(s.ok());
    const Scenario& sc = s.value();
    CHECK(sc.seed == 42);
    CHECK(sc.duration == 120);
    CHECK(sc.ms_per_tick == 1000);
    REQUIRE(sc.vehicles.size() == 2);
    CHECK(sc.vehicles[0].id == "veh-alpha");
    CHECK(sc.vehicles[0].x == -200);
    REQUIRE(sc.vehicles[0].velocity.size() == 2);
    CHECK(sc.vehicles[0].velocity[1].from == 60);
    CHECK(sc.vehicles[0].velocity[1].vx == 11);
    REQUIRE(sc.vehicles[0].sensors.size() == 1);
    CHECK(sc.vehicles[0].sensors[0].descriptor == "wheel-speed");
    CHECK(sc.vehicles[0].consent[0].state == ConsentState::Granted);
    REQUIRE(sc.rsus.size() == 1);
    CHECK(sc.rsus[0].capabilities.size() == 2);
    REQUIRE(sc.events.size() == 1);
    CHECK(sc.events[0].vehicle == "veh-alpha");
    REQUIRE(sc.attacks.size() == 1);
    CHECK(sc.attacks[0].kind == AttackKind::SpoofCam);
}

TEST_CASE("the JSON representation builds the same scenario") {
    constexpr std::string_view json = R"({
      "seed": 42,
      "duration": 120,
      "ms_per_tick": 1000,
      "vehicle": [
        {"id": "veh-alpha", "position": [-200, 0],
         "velocity": [{"from": 0, "vx": 20}, {"from": 60, "vx": 11}],
         "sensor": [{"descriptor": "wheel-speed", "period": 2}],
         "consent": [{"category": "VehicleDynamics", "state": "granted"}]},
        {"id": "veh-beta", "position": [200, 0],
         "velocity": [{"from": 0, "vx": -15}]}
      ],
      "rsu": [{"id": "rsu-1", "position": [0, 50], "capability": ["camera"]}],
      "event": [{"tick": 80, "kind": "collision", "vehicle": "veh-alpha"}],
      "attack": [{"tick": 50, "kind": "SpoofCam", "target": "veh-beta"}]
    })";
    auto s = load(json);
    REQUIRE(s.ok());
    CHECK(s.value().vehicles.size() == 2);
    CHECK(s.value().vehicles[0].velocity.size() == 2);
    CHECK(s.value().vehicles[0].velocity[1].vx == 11);
    CHECK(s.value().attacks[0].kind == AttackKind::SpoofCam);
    CHECK(s.value().rsus[0].capabilities == std::vector<std::string>{"camera"});
}

TEST_CASE("negative duration is reported at its field path") {
    auto errors = check("duration -5\n");
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const ValidationError& e : errors)
        if (e.path == "scenario.duration") found = true;
    CHECK(found);
}

TEST_CASE("duplicate vehicle ids are reported") {
    std::string content = "duration 10\nvehicle {\n id veh-x\n position 0 0\n}\n"
                          "vehicle {\n id veh-x\n position 1 1\n}\n";
    auto errors = check(content);
    REQUIRE_FALSE(errors.empty());
    bool found = false;
    for (const ValidationError& e : errors)
        if (e.reason.find("duplicate vehicle id") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("every violation is collected, not just the first") {
    std::string content = "duration 0\nms_per_tick 0\n"
                          "vehicle {\n id v1\n position 0 0\n}\n"
                          "attack {\n tick 5\n kind Nonsense\n target ghost\n}\n"
                          "event {\n tick 3\n kind quake\n vehicle ghost\n}\n";
    auto errors = check(content);
    CHECK(errors.size() >= 5);
}

TEST_CASE("unbalanced braces are parse errors") {
    CHECK_FALSE(check("vehicle {\n id v\n").empty());
    CHECK_FALSE(check("}\n").empty());
    CHECK_FALSE(check("{\n}\n").empty());
}

TEST_CASE("invalid JSON is reported") {
    auto errors = check("{ not json");
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].reason == "invalid JSON");
}

TEST_CASE("attack and event ticks must stay inside the run") {
    std::string content = "duration 10\nvehicle {\n id v1\n position 0 0\n}\n"
                          "attack {\n tick 10\n kind SpoofCam\n target v1\n}\n";
    auto errors = check(content);
    bool found = false;
    for (const ValidationError& e : errors)
        if (e.reason.find("beyond scenario duration") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("custom message types must avoid the reserved id range") {
    std::string content = "duration 10\nmessage_type {\n id 3\n name custom\n category Diagnostic\n}\n";
    auto errors = check(content);
    bool found = false;
    for (const ValidationError& e : errors)
        if (e.reason.find("reserved") != std::string::npos) found = true;
    CHECK(found);
}
