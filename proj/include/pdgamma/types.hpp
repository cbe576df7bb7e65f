#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pdgamma {

// Small fixed-capacity linear algebra types; d <= 3 everywhere.
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr int kMaxDim = 3;

// Raised when an argument lies outside the mathematical domain of an
// operation (coincident nodes, strain below -1/m, non-finite data).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a computation itself breaks down (divergent line search,
// non-finite energy).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for a feature combination that is not implemented (e.g. the
// laminate search outside d = 2).
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pdgamma
