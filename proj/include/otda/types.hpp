#ifndef OTDA_TYPES_HPP
#define OTDA_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace otda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative solver exhausts its iteration budget.
/// Carries the last (feasible) iterate and a residual or gap estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, Matrix last_plan, double residual,
                   long iterations)
      : Error(msg),
        last_plan_(std::move(last_plan)),
        residual_(residual),
        iterations_(iterations) {}

  const Matrix& last_plan() const { return last_plan_; }
  double residual() const { return residual_; }
  long iterations() const { return iterations_; }

 private:
  Matrix last_plan_;
  double residual_;
  long iterations_;
};

}  // namespace otda

#endif  // OTDA_TYPES_HPP
