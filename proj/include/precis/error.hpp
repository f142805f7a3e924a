#pragma once

#include <stdexcept>
#include <string>

namespace precis {

enum class ErrorCode {
    InvalidArgument = 1,
    Dimension,
    EmptySubset,
    InvalidSensor,
    Symmetry,
    Unstable,
    Assignment,
    Program,
    InfeasibleDesign,
    Recovery,
    Budget,
    Parse,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; the code tells callers (and the C
// API) which failure class occurred.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace precis
