#ifndef LADDERTX_ERROR_HPP
#define LADDERTX_ERROR_HPP

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace laddertx {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class LadderError : public Error {
public:
    using Error::Error;
};

class ExecutionError : public Error {
public:
    using Error::Error;
};

/// Raised by execute when the root precondition does not hold on the source root.
class RootPreconditionFalse : public ExecutionError {
public:
    using ExecutionError::ExecutionError;
};

class CertificateFormatError : public Error {
public:
    using Error::Error;
};

/// One problem found by a validation pass. `subject` names the offending
/// class, relationship, rung or ladder position.
struct Violation {
    std::string subject;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }

    void add(std::string subject, std::string message) {
        violations.push_back({std::move(subject), std::move(message)});
    }

    void merge(const ValidationReport& other) {
        violations.insert(violations.end(), other.violations.begin(), other.violations.end());
        warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
    }

    std::string to_string() const {
        std::ostringstream out;
        for (const auto& v : violations) out << "error: " << v.subject << ": " << v.message << '\n';
        for (const auto& w : warnings) out << "warning: " << w << '\n';
        return out.str();
    }

    bool operator==(const ValidationReport&) const = default;
};

}  // namespace laddertx

#endif
