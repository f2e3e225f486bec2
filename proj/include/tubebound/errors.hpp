// tubebound/errors.hpp
//
// Exception types shared by every module. Bounds that leave their domain of
// validity throw domain_error carrying the offending quantity so callers (the
// CLI in particular) can report the number that broke the contract.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tubebound {

class domain_error : public std::domain_error {
public:
    domain_error(const std::string& what, double offending)
        : std::domain_error(what + " (value " + std::to_string(offending) + ")"),
          offending_(offending) {}

    double offending() const noexcept { return offending_; }

private:
    double offending_;
};

/// A documented hypothesis of an operation was violated (e.g. nu < 2 for the
/// exp(theta r) bound, lambda < 0 for the exit-time variant).
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, std::size_t terms)
        : std::runtime_error(what + " after " + std::to_string(terms) + " terms"),
          terms_(terms) {}

    std::size_t terms() const noexcept { return terms_; }

private:
    std::size_t terms_;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tubebound
