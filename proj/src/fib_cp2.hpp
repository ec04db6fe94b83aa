#ifndef G2FIB_FIB_CP2_HPP
#define G2FIB_FIB_CP2_HPP

// The SU(2)-invariant coassociative fibration of L^2_-(T*CP^2) and its cone:
// case-split ODE systems, conserved quantities, fixed points and the boundary
// curve of the generic flow, fibre classification, the multi-moment map, the
// induced fibre metrics with their asymptotic cones, and the Harvey-Lawson
// flat-limit check.

#include "models.hpp"

namespace g2fib::cp2 {

enum class CaseTag { ZeroSection, SinGammaZero, CosGammaZero, AlphaPiHalf, Generic };

std::string case_name(CaseTag t);

// Free-coordinate state of an invariant 4-fold: (r, gamma, alpha, beta).
struct State {
  double r = 0, gamma = 0, alpha = 0, beta = 0;
};

CaseTag classify_case(const State& st, double tol = 1e-12);

struct Conserved {
  CaseTag tag{};
  double beta = 0;
  std::optional<double> v;  // generic
  std::optional<double> u;  // generic, c = 0 only
  std::optional<double> w;  // special cases
};
Conserved conserved(double c, const State& st);

// Residuals of the three coassociativity ODEs for a velocity
// (dr, dgamma, dalpha, dbeta): the d tau ^ p1 ^ p2, p2 ^ p3 and p3 ^ p1 terms.
struct Residuals {
  double r0 = 0, r1 = 0, r2 = 0;
};
Residuals coass_residual(double c, const State& st, double dr, double dgamma,
                         double dalpha, double dbeta);

// Generic-flow coefficient functions: A dgamma - B dalpha = 0 with
// A = cos(a) (E (2 cos^2 a + sin^2 a sin^2 g) - 2 v^4 sin^2 a sin^4 g),
// B = 2 sin a sin g cos g (v^4 sin^2 a sin^4 g + E cos^2 a),
// E = v^4 sin^4 g - 16 c cos^4 a cos^4 g.
struct FlowField {
  double a_coef = 0;  // multiplies dgamma
  double b_coef = 0;  // multiplies dalpha
};
FlowField flow_field(double c, double v, double alpha, double gamma);
// dgamma/dalpha away from the boundary curve
double flow_slope(double c, double v, double alpha, double gamma);

struct FixedPoint {
  double alpha = 0, gamma = 0;
  double residual = 0;  // |A| + |B| after refinement
};
std::vector<FixedPoint> fixed_points(double c, double v);
// largest |A|+|B| deficit found by a grid sweep away from the known roots;
// a positive return bounds any undiscovered root away from zero.
double fixed_point_gap(double c, double v, int grid = 240, double exclude_radius = 0.05);

// gamma on the boundary curve at given alpha, if it exists in (0, pi/2).
std::optional<double> boundary_curve_gamma(double c, double v, double alpha);

// ---------------------------------------------------------------------------
// Classification

enum class Topology { LineBundle, ConeOverS3, ZeroSection };

struct FibreClass {
  CaseTag tag{};
  Topology topology{};
  bool conclusive = true;
  std::string detail;         // how each end terminated
  double bolt_r = 0;          // minimum r when a bolt end exists
  double entry_angle = 0;     // generic c > 0: angle into the critical point
};

struct ClassifyOptions {
  double r_max = 1e6;
  double fp_radius = 1e-6;
  double edge_margin = 1e-7;
};

FibreClass classify_fibre(double c, const State& start, const ClassifyOptions& opt = {});

// ---------------------------------------------------------------------------
// Multi-moment map

double multimoment(double c, const State& st);
// gradient in (r, gamma, alpha)
std::array<double, 3> multimoment_grad(double c, const State& st);

// ---------------------------------------------------------------------------
// Fibre metric (in the rotated coframe (d rho, p1, p2, p3))

struct FibreMetric {
  double F2 = 0, J2 = 0, K2 = 0, L2 = 0;
  double g_rr = 0;   // d rho^2
  double g_r3 = 0;   // d rho p3 matrix entry
  double g_11 = 0, g_12 = 0, g_22 = 0, g_33 = 0;
};
FibreMetric fibre_metric(double c, const State& st);

// Fibre curves r -> (alpha(r), gamma(r), d alpha/dr, d gamma/dr), per case.
struct OnFibre {
  double alpha = 0, gamma = 0;
  double dalpha_dr = 0, dgamma_dr = 0;
};
using FibreCurve = std::function<OnFibre(double)>;

FibreCurve curve_singamma0_cone(double w);
FibreCurve curve_singamma0_smooth(double c, double r0, double alpha0);
FibreCurve curve_cosgamma0_cone(double w);  // sign of w picks the branch
FibreCurve curve_alphapi2(double c, double w);
FibreCurve curve_generic_cone(double u, double v);

enum class ConeRef { A, B };
// deviation samples (R, dev) of the induced metric against g_A or g_B,
// in the frame (dR, R p1, R p2, R p3) with r = R^2/4.
std::vector<std::pair<double, double>> cone_deviation_samples(
    double c, const FibreCurve& curve, ConeRef cone, double R_min, double R_max,
    int n);

// ODE-backed samplers for the smooth cases without closed-form inversions.
std::vector<std::pair<double, double>> cone_samples_cosgamma0_smooth(
    double c, double r0, double alpha0, double R_min, double R_max);
std::vector<std::pair<double, double>> cone_samples_generic_smooth(
    double c, double v, double alpha0, double gamma0, double R_min, double R_max);

// ---------------------------------------------------------------------------
// Harvey-Lawson flat limit

struct HlSample {
  double constraint_residual = 0;  // |r (4 r^2 - 5 s^2)^2 - tau|
  double phi_residual = 0;         // max |phi| on FD tangent triples, scaled
};
struct HlReport {
  int n_samples = 0;
  double worst_constraint = 0;
  double worst_phi = 0;
};
// epsilon: imaginary unit quaternion (3 components). Samples both components
// for tau != 0, the cone pair for tau = 0.
HlReport harvey_lawson_check(const std::array<double, 3>& epsilon, double tau,
                             int n_samples, uint64_t seed);

}  // namespace g2fib::cp2

#endif  // G2FIB_FIB_CP2_HPP
