#include <charconv>
#include <cmath>

#include "precis/error.hpp"
#include "precis/types.hpp"

namespace precis {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Dimension: return "DimensionError";
        case ErrorCode::EmptySubset: return "EmptySubset";
        case ErrorCode::InvalidSensor: return "InvalidSensor";
        case ErrorCode::Symmetry: return "SymmetryError";
        case ErrorCode::Unstable: return "UnstableError";
        case ErrorCode::Assignment: return "AssignmentError";
        case ErrorCode::Program: return "ProgramError";
        case ErrorCode::InfeasibleDesign: return "InfeasibleDesign";
        case ErrorCode::Recovery: return "RecoveryError";
        case ErrorCode::Budget: return "BudgetError";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Io: return "IoError";
    }
    return "UnknownError";
}

const char* to_string(Framework f) noexcept {
    return f == Framework::H2 ? "h2" : "hinf";
}

const char* to_string(EstimatorKind k) noexcept {
    return k == EstimatorKind::Observer ? "observer" : "filter";
}

Framework parse_framework(const std::string& text) {
    if (text == "h2" || text == "H2") {
        return Framework::H2;
    }
    if (text == "hinf" || text == "Hinf" || text == "hinfty") {
        return Framework::Hinf;
    }
    fail(ErrorCode::InvalidArgument, "unknown framework '" + text + "' (expected h2 or hinf)");
}

EstimatorKind parse_estimator(const std::string& text) {
    if (text == "observer") {
        return EstimatorKind::Observer;
    }
    if (text == "filter") {
        return EstimatorKind::Filter;
    }
    fail(ErrorCode::InvalidArgument, "unknown estimator '" + text + "' (expected observer or filter)");
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace precis
