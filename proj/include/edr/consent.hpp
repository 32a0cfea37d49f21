#pragma once

#include <array>
#include <map>
#include <string>

#include "edr/result.hpp"
#include "edr/types.hpp"

namespace edr {

/// Immutable snapshot of a subject's consent for one category. Once embedded
/// in a record it never changes, even if the registry does.
struct ConsentMarker {
    std::string subject;
    RecordCategory category = RecordCategory::VehicleDynamics;
    ConsentState state = ConsentState::Denied;
    std::uint32_t version = 0;
    WallMs decided_at = 0;

    bool operator==(const ConsentMarker&) const = default;
};

/// Per-subject, per-category consent. Default is Denied until explicitly
/// granted; versions bump on every state change.
class ConsentRegistry {
public:
    void register_subject(const std::string& subject, WallMs now) {
        auto [it, inserted] = subjects_.try_emplace(subject);
        if (!inserted) return;
        for (std::uint8_t i = 0; i < kCategoryCount; ++i) {
            it->second[i] = Cell{ConsentState::Denied, 1, now};
        }
    }

    bool known(const std::string& subject) const { return subjects_.contains(subject); }

    Result<void> set_state(const std::string& subject, RecordCategory category,
                           ConsentState state, WallMs now) {
        auto it = subjects_.find(subject);
        if (it == subjects_.end()) return make_error(Errc::UnknownSubject, subject);
        Cell& cell = it->second[static_cast<std::uint8_t>(category)];
        if (cell.state == state) return {};
        cell.state = state;
        ++cell.version;
        cell.decided_at = now;
        return {};
    }

    Result<void> grant(const std::string& subject, RecordCategory category, WallMs now) {
        return set_state(subject, category, ConsentState::Granted, now);
    }

    Result<void> deny(const std::string& subject, RecordCategory category, WallMs now) {
        return set_state(subject, category, ConsentState::Denied, now);
    }

    Result<ConsentMarker> snapshot(const std::string& subject, RecordCategory category) const {
        auto it = subjects_.find(subject);
        if (it == subjects_.end()) return make_error(Errc::UnknownSubject, subject);
        const Cell& cell = it->second[static_cast<std::uint8_t>(category)];
        return ConsentMarker{subject, category, cell.state, cell.version, cell.decided_at};
    }

private:
    struct Cell {
        ConsentState state = ConsentState::Denied;
        std::uint32_t version = 1;
        WallMs decided_at = 0;
    };

    std::map<std::string, std::array<Cell, kCategoryCount>> subjects_;
};

} // namespace edr
