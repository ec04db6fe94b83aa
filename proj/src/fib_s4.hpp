#ifndef G2FIB_FIB_S4_HPP
#define G2FIB_FIB_S4_HPP

// The SO(3)-invariant coassociative fibration of L^2_-(T*S^4) and its cone:
// projection, conserved quantities, fibre ODEs, bolt data, fibre metrics and
// their cones, hypersymplectic triples, the harmonic 1-form on the base of
// the fibration, the Lefschetz flat-limit fibres, and vanishing cycles and
// thimbles.

#include <complex>
#include <optional>

#include "models.hpp"

namespace g2fib::s4 {

// State on a fibre in the adapted coordinates.
struct State {
  double s = 0, t = 0, alpha = 0;
};

struct Projection {
  double u = 0, v = 0, beta = 0;
};

// (u, v) from the adapted coordinates; conserved along each fibre.
Projection project(double c, const State& st, double beta = 0.0);

// Residuals of the two coassociativity ODEs for a motion (ds, dt, dalpha).
std::pair<double, double> coass_residual(double c, const State& st, double ds,
                                         double dt, double dalpha);

enum class BoltTopology { CotangentS2, ConeWithVertex, PuncturedCone };

struct BoltInfo {
  double size = 0.0;
  BoltTopology topology = BoltTopology::CotangentS2;
  bool nongeneric = false;   // the alpha = pi/2 branch
  double t = 0.0, alpha = 0.0;  // generic-branch solution at s = 0
};

// Bolt size and topology over the base point (u, v).
BoltInfo bolt(double c, double u, double v);

// Solve for alpha on the fibre {u, v} at vertical distance rho >= 0.
State state_at_rho(double c, double u, double v, double rho);

// Induced fibre metric in the (d rho, sigma_1, sigma_2, sigma_3) coframe.
struct FibreMetric {
  double rho = 0;
  double g_rr = 0;     // d rho^2
  double g_r3 = 0;     // d rho sigma_3 (coefficient of the symmetric product)
  double g_11 = 0, g_12 = 0, g_22 = 0, g_33 = 0;
  State st;
};
FibreMetric fibre_metric(double c, double u, double v, double rho);

// vol_N = 2 rho d rho ^ sigma_1 ^ sigma_2 ^ sigma_3.

// Deviation samples against a cone dR^2 + cA R^2 s1^2 + cB R^2 (s2^2+s3^2)
// (+ optionally c3 != cB on s3) measured in the cone-normalised frame.
struct ConeCoeffs {
  double c1 = 0, c2 = 0, c3 = 0;  // coefficients of R^2 sigma_i^2
};
inline constexpr ConeCoeffs kConeAC{0.25, 0.5, 0.5};   // asymptotic cone
inline constexpr ConeCoeffs kConeCS{0.5, 0.5, 1.0};    // conically singular end

// rho = rho_of_R(R); for the AC end rho = R^2/4, for the CS end of the
// singular fibre rho = sqrt(2) R^2 / 4.
std::vector<std::pair<double, double>> cone_deviation_samples(
    double c, double u, double v, const ConeCoeffs& cone, double rho_of_R2,
    double R_min, double R_max, int n);

// Hypersymplectic triple on the fibre in the (d rho, sigma) coframe, as
// 2-forms on the fibre chart (rho, gamma, theta, phi), plus the diagonal Q.
struct Hyper {
  std::array<AltForm, 3> omega;  // degree 2, fibre chart indices 0..3
  Eigen::Matrix3d q;
};
Hyper hypersymplectic(double c, double u, double v, double rho);

// Fibre chart (rho, gamma, theta, phi) for FD checks on fibre forms.
std::shared_ptr<const Chart> fibre_chart(double c, double u, double v);
// sigma coframe and fibre metric/volume on the fibre chart.
AltForm fibre_sigma(int k, const Point& p);  // k = 1,2,3
MetricAt fibre_metric_at(double c, double u, double v, const Point& p);
std::array<AltForm, 3> hyper_forms_at(double c, double u, double v, const Point& p);

// Vanishing-cycle package: omega = sqrt(2)/v omega_3 and the SU(2)-structure
// 2-forms built from omega_1, omega_2.
struct VanishingCycle {
  AltForm omega{2};
  AltForm re_omega{2}, im_omega{2};
};
VanishingCycle vanishing_cycle(double c, double u, double v, const Point& p);

// Base geometry: k_c in (t, alpha, beta) coordinates, the potential h_c of
// the pushed-forward 1-form lambda_c, and lambda_c itself.
std::shared_ptr<const Chart> base_chart(double c);
Eigen::MatrixXd base_metric(double c, const Point& p);   // 3x3, coords (t, alpha, beta)
AltForm base_vol(double c, const Point& p);              // degree 3
double l_c(double c, double t);                          // integral in h_c
double potential_h(double c, double t, double alpha);    // h_c
AltForm lambda_closed_form(double c, const Point& p);    // 1-form on the base
double bolt_size_from_base(double c, double t, double alpha);

// Same data in the (u, v, beta) coordinates (used for the Hessian check).
std::shared_ptr<const Chart> base_chart_uv(double c);
Eigen::MatrixXd base_metric_uv(double c, const Point& p);
double potential_h_uv(double c, double u, double v);
std::pair<double, double> t_alpha_from_uv(double c, double u, double v);

// Gradient-flow thimble from a base start point; terminates at the zero set
// of lambda_c (critical point of h_c) or reports why not.
struct Thimble {
  FlowLine line;
  bool reached_critical = false;
  double end_t = 0, end_alpha = 0;
};
Thimble thimble(double c, double t0, double alpha0, double event_tol = 1e-6);

// Integrate one fibre as a flow in tau with ds/dtau = 1 gauge, auditing
// (u, v); start from st0. Used for coassociativity and drift checks.
FlowLine fibre_flow(double c, const State& st0, double s_target);

// Lefschetz model fibres (flat limit of the fibration): data at
// (r, eta, xi)-parametrised points of the fibre of z1^2+z2^2+z3^2 = r^2 e^{2 i eta}.
struct Lefschetz {
  double g_xx = 0;                 // d xi^2 coefficient
  double g_11 = 0, g_22 = 0, g_33 = 0;
  std::array<AltForm, 3> omega;    // on the fibre chart (xi, psi, theta, phi)
  Eigen::Matrix3d q;
};
Lefschetz lefschetz_fibre(double r, double eta, double xi);
std::shared_ptr<const Chart> lefschetz_chart();
MetricAt lefschetz_metric_at(double r, const Point& p);
std::array<AltForm, 3> lefschetz_hyper_at(double r, double eta, const Point& p);
// embedding of the fibre point into C^3 (for the membership check)
std::array<std::complex<double>, 3> lefschetz_embed(double r, double eta,
                                                    const Point& p);
std::vector<std::pair<double, double>> lefschetz_cone_samples(double r, double R_min,
                                                              double R_max, int n);

}  // namespace g2fib::s4

#endif  // G2FIB_FIB_S4_HPP
