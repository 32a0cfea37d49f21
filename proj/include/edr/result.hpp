#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace edr {

enum class Errc {
    // can
    BusSealed,
    DuplicateBlackBox,
    PayloadTooLarge,
    UnregisteredSender,
    BadMac,
    ReplayDetected,
    UnknownSender,
    UnknownNode,
    // enrich
    UnknownDescriptor,
    UnknownSubject,
    // recorder
    StorageFull,
    RangeUnavailable,
    SegmentConflict,
    BothCopiesDamaged,
    BadContainer,
    // pki
    AlreadyEnrolled,
    RevokedCredential,
    ExpiredCredential,
    NoValidTicket,
    Expired,
    UntrustedRoot,
    BadSignature,
    Revoked,
    NoWarrant,
    UnknownPseudonym,
    WarrantScopeMismatch,
    // v2x
    StaleMessage,
    DuplicateMessage,
    BadMessage,
    // access
    BadCredential,
    BadRequest,
    UnsupportedFormat,
    // reconstruct
    WindowNotCovered,
    // harness
    InvalidScenario,
    ParseError,
    IoError,
};

inline std::string_view to_string(Errc c) {
    switch (c) {
        case Errc::BusSealed: return "BusSealed";
        case Errc::DuplicateBlackBox: return "DuplicateBlackBox";
        case Errc::PayloadTooLarge: return "PayloadTooLarge";
        case Errc::UnregisteredSender: return "UnregisteredSender";
        case Errc::BadMac: return "BadMac";
        case Errc::ReplayDetected: return "ReplayDetected";
        case Errc::UnknownSender: return "UnknownSender";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::UnknownDescriptor: return "UnknownDescriptor";
        case Errc::UnknownSubject: return "UnknownSubject";
        case Errc::StorageFull: return "StorageFull";
        case Errc::RangeUnavailable: return "RangeUnavailable";
        case Errc::SegmentConflict: return "SegmentConflict";
        case Errc::BothCopiesDamaged: return "BothCopiesDamaged";
        case Errc::BadContainer: return "BadContainer";
        case Errc::AlreadyEnrolled: return "AlreadyEnrolled";
        case Errc::RevokedCredential: return "RevokedCredential";
        case Errc::ExpiredCredential: return "ExpiredCredential";
        case Errc::NoValidTicket: return "NoValidTicket";
        case Errc::Expired: return "Expired";
        case Errc::UntrustedRoot: return "UntrustedRoot";
        case Errc::BadSignature: return "BadSignature";
        case Errc::Revoked: return "Revoked";
        case Errc::NoWarrant: return "NoWarrant";
        case Errc::UnknownPseudonym: return "UnknownPseudonym";
        case Errc::WarrantScopeMismatch: return "WarrantScopeMismatch";
        case Errc::StaleMessage: return "StaleMessage";
        case Errc::DuplicateMessage: return "DuplicateMessage";
        case Errc::BadMessage: return "BadMessage";
        case Errc::BadCredential: return "BadCredential";
        case Errc::BadRequest: return "BadRequest";
        case Errc::UnsupportedFormat: return "UnsupportedFormat";
        case Errc::WindowNotCovered: return "WindowNotCovered";
        case Errc::InvalidScenario: return "InvalidScenario";
        case Errc::ParseError: return "ParseError";
        case Errc::IoError: return "IoError";
    }
    return "UnknownError";
}

struct Error {
    Errc code;
    std::string detail;

    std::string message() const {
        std::string m{to_string(code)};
        if (!detail.empty()) {
            m += ": ";
            m += detail;
        }
        return m;
    }
};

inline Error make_error(Errc code, std::string detail = {}) {
    return Error{code, std::move(detail)};
}

/// Minimal expected-style result; errors are ordinary values, not exceptions.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error e) : v_(std::move(e)) {}
    Result(Errc c) : v_(Error{c, {}}) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(v_); }
    T& value() & { return std::get<T>(v_); }
    T&& value() && { return std::get<T>(std::move(v_)); }

    const Error& error() const { return std::get<Error>(v_); }
    Errc code() const { return error().code; }

private:
    std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
public:
    Result() = default;
    Result(Error e) : err_(std::move(e)), has_err_(true) {}
    Result(Errc c) : err_(Error{c, {}}), has_err_(true) {}

    bool ok() const { return !has_err_; }
    explicit operator bool() const { return ok(); }

    const Error& error() const { return err_; }
    Errc code() const { return err_.code; }

private:
    Error err_{};
    bool has_err_ = false;
};

} // namespace edr
