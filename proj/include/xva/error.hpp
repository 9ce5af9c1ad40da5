#pragma once

#include <stdexcept>
#include <string>

namespace xva {

// Input outside the mathematical domain of an operation (negative spot,
// non-finite argument, expiry reached where a formula needs time value).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid or inconsistent configuration (grid not commensurate, bad params).
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver was asked for a collateral regime it has no formula for.
class unsupported_regime : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure inside a solver; carries the last accepted time.
class solver_error : public std::runtime_error {
 public:
  solver_error(const std::string& what, double last_tau)
      : std::runtime_error(what + " (last accepted tau = " +
                           std::to_string(last_tau) + ")"),
        last_tau_(last_tau) {}

  double last_tau() const noexcept { return last_tau_; }

 private:
  double last_tau_;
};

}  // namespace xva
