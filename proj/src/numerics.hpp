#ifndef G2FIB_NUMERICS_HPP
#define G2FIB_NUMERICS_HPP

// Shared numerical machinery: finite-difference exterior derivative of form
// fields over coordinate charts, adaptive embedded Runge-Kutta integration
// with event location and conserved-quantity auditing, adaptive quadrature,
// log-log rate regression, and covariant Hessians by finite differences.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forms.hpp"

namespace g2fib {

using Point = std::array<double, kDim>;

struct Chart {
  int dim = kDim;  // number of active coordinates (leading entries of Point)
  std::array<std::string, kDim> names{};
  std::function<bool(const Point&)> valid;  // nullptr means everywhere
  std::array<double, kDim> fd_scale{1, 1, 1, 1, 1, 1, 1};

  bool contains(const Point& p) const { return !valid || valid(p); }
};

struct FormField {
  const Chart* chart = nullptr;
  int degree = 0;
  std::function<AltForm(const Point&)> eval;
};

struct ScalarField {
  const Chart* chart = nullptr;
  std::function<double(const Point&)> eval;
};

struct FdOptions {
  double h_rel = 6.0e-6;  // ~ eps^(1/3); multiplied by the coordinate scale
  bool richardson = false;
  bool check_margin = true;
};

// Central-difference exterior derivative of a form field at p. Throws
// DomainError when p (or a stencil point) leaves the chart.
AltForm d_fd(const FormField& f, const Point& p, const FdOptions& opt = {});
AltForm d_fd(const ScalarField& f, const Chart& chart, const Point& p,
             const FdOptions& opt = {});

// ---------------------------------------------------------------------------
// ODE integration

struct OdeSystem {
  int n = 0;
  // rhs(t, y, dydt)
  std::function<void(double, std::span<const double>, std::span<double>)> rhs;
};

struct EventSpec {
  std::string name;
  // Integration stops where the event function crosses zero (any direction),
  // located by bisection on the dense output.
  std::function<double(double, std::span<const double>)> fn;
  bool terminal = true;
};

struct AuditSpec {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

enum class FlowStatus {
  ReachedEnd,       // integrated to t_end
  Event,            // a terminal event fired
  SingularityReached,  // step size underflow
  LeftChart,        // state validity predicate failed
  MaxSteps,
};

struct FlowSample {
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> audit;
  double h = 0.0;  // step size used to reach this sample
};

struct FlowLine {
  std::vector<FlowSample> samples;
  FlowStatus status = FlowStatus::ReachedEnd;
  int event_index = -1;       // which event fired
  double event_residual = 0;  // |event fn| at the located crossing
  std::string message;
  // max over audits of |q(t) - q(0)| / max(|q(0)|, audit_abs_floor)
  double max_audit_drift = 0.0;
};

struct FlowOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  double h0 = 0.0;          // 0 = automatic
  double h_min = 1e-14;
  long max_steps = 200000;
  double event_tol = 1e-10;  // bisection tolerance on the event function
  double audit_abs_floor = 1.0;
  std::function<bool(std::span<const double>)> state_valid;  // optional
};

FlowLine integrate_flow(const OdeSystem& sys, std::span<const double> y0,
                        double t0, double t_end,
                        std::span<const EventSpec> events,
                        std::span<const AuditSpec> audits,
                        const FlowOptions& opt = {});

// ---------------------------------------------------------------------------
// Quadrature

enum class EndpointSingularity { None, SqrtLower, SqrtUpper };

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

// Adaptive Gauss-Kronrod (7,15). A declared inverse-square-root endpoint
// singularity is removed by the substitution s = sigma^2 before integrating.
QuadResult quad(const std::function<double(double)>& f, double a, double b,
                double abs_tol = 1e-10,
                EndpointSingularity sing = EndpointSingularity::None);

// ---------------------------------------------------------------------------
// Rate fits

struct RateFit {
  bool exact_cone = false;   // all deviations below the exactness threshold
  double slope = 0.0;        // least-squares slope in log-log coordinates
  double intercept = 0.0;
  double residual = 0.0;     // max abs log10-residual of the fit
  int n = 0;
};

// samples: (R, deviation). Deviations <= exact_tol across the board are
// reported as an exact cone instead of a slope.
RateFit fit_rate(std::span<const std::pair<double, double>> samples,
                 double exact_tol = 1e-12);

// ---------------------------------------------------------------------------
// Covariant Hessian on a low-dimensional chart

// Covariant Hessian (nabla d h)_ij = d_i d_j h - Gamma^k_ij d_k h of a scalar
// field with respect to the metric field k, all derivatives by central
// differences. Returns a dim x dim symmetric matrix in chart coordinates.
Eigen::MatrixXd hessian_fd(const ScalarField& h,
                           const std::function<Eigen::MatrixXd(const Point&)>& k,
                           const Chart& chart, const Point& p,
                           double h_rel = 1e-5);

// Least-squares helper: slope fit stability under halving the window.
double refit_half_window_slope(std::span<const std::pair<double, double>> samples);

}  // namespace g2fib

#endif  // G2FIB_NUMERICS_HPP
