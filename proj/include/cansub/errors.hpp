#pragma once

#include <stdexcept>
#include <string>

namespace cansub {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidInput : Error {
    using Error::Error;
};
struct PrecisionExhausted : Error {
    using Error::Error;
};
struct SingularMatrix : Error {
    using Error::Error;
};
struct FieldTooSmall : Error {
    using Error::Error;
};
struct ExponentDenominatorOverflow : Error {
    using Error::Error;
};
struct NotBT1 : Error {
    using Error::Error;
};
struct HodgeTooLarge : Error {
    using Error::Error;
};
struct NonConvergence : Error {
    using Error::Error;
};
struct NotDirectSummand : Error {
    using Error::Error;
};
struct PairingInconsistent : Error {
    using Error::Error;
};
struct EnumerationIncomplete : Error {
    using Error::Error;
};
struct GenerationFailed : Error {
    using Error::Error;
};

} // namespace cansub
