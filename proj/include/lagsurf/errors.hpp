#pragma once

#include <stdexcept>
#include <string>

namespace lagsurf {

// Errors caused by bad inputs (files, parameters, mismatched charts).
// The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    enum class Code {
        Generic,
        UnreadableFile,
        MalformedDocument,
        LengthMismatch,
        InvalidC,
        NonFinite,
        BadChart,
        ChartMismatch,
        NotAPair,
        ZeroField,
        Period,
        NotHarmonic,
        ConstraintViolated,
        SignObstruction,
        Blowup,
        PathOffChart,
        DegenerateMetric,
    };

    InputError(Code code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    explicit InputError(const std::string& msg) : std::runtime_error(msg), code_(Code::Generic) {}

    Code code() const { return code_; }

private:
    Code code_;
};

// A computation ran but a required verdict did not hold (e.g. reconstruction
// requested on data that fails the integrability gate). CLI exit code 1.
class VerdictError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lagsurf
