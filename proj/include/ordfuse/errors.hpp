#pragma once

#include <stdexcept>
#include <string>

namespace ordfuse {

// Caller broke a documented precondition (bad rank, wrong sample count, ...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Configuration could not be parsed or violates a scenario invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Conditional density or posterior update with a zero normaliser.
class UndefinedConditionalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Backward induction could not be carried out (quadrature did not converge, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
}

} // namespace ordfuse
