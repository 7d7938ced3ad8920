#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>

namespace hinf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HINF_ERROR(Name)                  \
    class Name : public Error {           \
    public:                               \
        using Error::Error;               \
    };

HINF_ERROR(SpectrumHit)
HINF_ERROR(NotSectorial)
HINF_ERROR(BudgetTooSmall)
HINF_ERROR(GridMismatch)
HINF_ERROR(AngleConflict)
HINF_ERROR(TailNotConverged)
HINF_ERROR(SignConventionCalibrationFailed)
HINF_ERROR(NotCommuting)
HINF_ERROR(ConfigInvalid)
HINF_ERROR(AssertionFailed)
HINF_ERROR(ReportMissing)

#undef HINF_ERROR

// An inequality that should hold was violated; `witness` holds the data.
class ViolationFound : public Error {
public:
    ViolationFound(const std::string& what, nlohmann::json witness)
        : Error(what), witness_(std::move(witness)) {}
    const nlohmann::json& witness() const { return witness_; }

private:
    nlohmann::json witness_;
};

}  // namespace hinf
