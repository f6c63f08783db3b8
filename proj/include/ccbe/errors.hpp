#ifndef CCBE_ERRORS_HPP_
#define CCBE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ccbe {

/// Argument outside the mathematical domain of a function (v <= 0, a > b, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Parameters violate the kernel / daughter-distribution assumptions.
class InadmissibleError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Grid, scenario or integrator configuration is unusable.
class ConfigurationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (e.g. negative density handed to rhs).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace ccbe

#endif // CCBE_ERRORS_HPP_
