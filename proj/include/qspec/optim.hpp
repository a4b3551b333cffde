#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qspec::optim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One fit parameter: starting value, box bounds, optional freeze.
struct ParamSpec {
    std::string name;
    double initial = 0.0;
    double lower = -kInf;
    double upper = kInf;
    bool frozen = false;
};

class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Result of a least-squares fit. Parameter order follows the ParamSpec
/// list; frozen parameters keep their initial value with sigma 0 and a
/// zeroed covariance row/column.
struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> sigmas;
    Eigen::MatrixXd covariance;
    double chi2_reduced = 0.0;
    std::size_t n_points = 0;
    int n_iterations = 0;
    bool converged = false;
    bool singular = false; // normal matrix not invertible at the optimum

    std::size_t index(std::string_view name) const;
    double value(std::string_view name) const { return values[index(name)]; }
    double sigma(std::string_view name) const { return sigmas[index(name)]; }
};

struct FitOptions {
    int max_iterations = 200;
    double initial_damping = 1e-3;
    double damping_increase = 10.0;
    double damping_decrease = 0.1;
    double cost_tolerance = 1e-10;     // relative cost decrease on an accepted step
    double gradient_tolerance = 1e-10; // infinity norm of J^T r
    double jacobian_rel_step = 1e-6;
};

/// Curve model y = f(params, x). Must be finite for every parameter
/// vector inside the box; a non-finite value aborts the fit.
using CurveModel = std::function<double(std::span<const double>, double)>;

/// Vector-valued model for standalone Jacobians.
using VectorModel = std::function<std::vector<double>(std::span<const double>)>;

/// Weighted Levenberg-Marquardt with numeric Jacobians and parameter
/// clamping to the box after each accepted step. With y_sigma empty the
/// fit is unweighted and the covariance is scaled by the residual
/// variance chi2/dof.
FitResult fit_least_squares(const CurveModel& model, const std::vector<ParamSpec>& specs,
                            std::span<const double> x, std::span<const double> y,
                            std::span<const double> y_sigma = {}, const FitOptions& opt = {});

/// Central-difference Jacobian, step per parameter max(rel_step*|p|, rel_step).
/// Probe points are clamped to the bounds when given; the actual probe
/// distance is used as the divisor.
Eigen::MatrixXd numeric_jacobian(const VectorModel& fn, std::span<const double> params,
                                 double rel_step, std::span<const double> lower = {},
                                 std::span<const double> upper = {});

} // namespace qspec::optim
