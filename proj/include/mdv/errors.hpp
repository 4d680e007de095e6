#pragma once

#include <stdexcept>
#include <string>

namespace mdv {

// Base class for all library errors; everything user-facing derives from it
// so callers can catch mdv::Error at the boundary.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    using Error::Error;
};
struct PoleError : Error {
    using Error::Error;
};
struct ConvergenceError : Error {
    using Error::Error;
};
struct QuadratureError : Error {
    using Error::Error;
};
struct StripError : Error {
    using Error::Error;
};
struct TailError : Error {
    using Error::Error;
};
struct SingularSampleError : Error {
    using Error::Error;
};
struct ParamError : Error {
    using Error::Error;
};
struct UnknownCatalogTag : Error {
    using Error::Error;
};
struct ModelError : Error {
    using Error::Error;
};
struct BranchError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct NegativeTimeError : Error {
    using Error::Error;
};
struct DivideError : Error {
    using Error::Error;
};

}  // namespace mdv
