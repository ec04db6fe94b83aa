#ifndef G2FIB_MODELS_HPP
#define G2FIB_MODELS_HPP

// Closed-form chart packages for the three cohomogeneity-one torsion-free
// G2-structures on S(S^3), L^2_-(T*S^4) and L^2_-(T*CP^2): coframes,
// connection 1-forms, vertical 1-forms, the 3-form, its dual 4-form, the
// metric and the volume, for the general (c0, c1, kappa) family and the
// normalised 1-parameter family, plus the centred flat-limit families.

#include <map>
#include <memory>
#include <random>

#include "numerics.hpp"

namespace g2fib {

enum class Model { S3, S4, CP2 };

std::string model_name(Model m);
Model model_from_name(const std::string& name);

struct G2Package {
  Model model{};
  double c0 = 0.0, c1 = 0.0, kappa = 1.0;
  double c = -1.0;  // >= 0 for the normalised family
  std::shared_ptr<const Chart> chart;
  std::function<AltForm(const Point&)> phi;      // degree 3
  std::function<AltForm(const Point&)> starphi;  // degree 4 (closed form)
  std::function<AltForm(const Point&)> vol7;     // degree 7 (closed form)
  std::function<Eigen::MatrixXd(const Point&)> metric;  // closed-form 7x7
  // Named auxiliary forms (sigma*, b*, rho*, zeta*, Omega*, zO) for
  // structure-equation tests; degrees are whatever the form dictates.
  std::map<std::string, std::function<AltForm(const Point&)>, std::less<>> named;
  std::function<Point(std::mt19937_64&)> sample;  // random valid chart point

  FormField phi_field() const { return {chart.get(), 3, phi}; }
  FormField starphi_field() const { return {chart.get(), 4, starphi}; }
  FormField named_field(const std::string& name, int degree) const;
  MetricAt metric_at(const Point& p) const {
    return MetricAt::from_matrix(metric(p), vol7(p));
  }
};

// General three-parameter families (c0, c1, kappa > 0).
G2Package s3_package(double c0, double c1, double kappa);
G2Package s4_package(double c0, double c1, double kappa);
G2Package cp2_package(double c0, double c1, double kappa);

// Normalised one-parameter families; c = 0 gives the cone (chart keeps
// a distance-from-zero-section margin).
G2Package make_package(Model m, double c);

// Flat-limit family: the same structures on a chart centred at a base point,
// with coordinates rescaled and the fibre trivialisation rotated so that the
// evaluator converges to phi_R7 linearly in kappa at fixed chart points.
// Chart ordering matches phi_r7(): S3 -> (y1,y2,y3,a0..a3) base-first;
// S4/CP2 -> (a1,a2,a3,x0..x3) fibre-first.
G2Package flat_limit(Model m, double kappa);

// S4 package on the SO(3)-adapted chart (t,s,gamma,alpha,beta,theta,phi),
// assembled from the sigma-coframe route. Exposes phi/starphi only.
struct AdaptedS4 {
  std::shared_ptr<const Chart> chart;
  double c = 0.0;
  std::function<AltForm(const Point&)> phi, starphi;
  // named: sigma1..3 and the invariant 1-forms used by the fibration
  std::map<std::string, std::function<AltForm(const Point&)>, std::less<>> named;
};
AdaptedS4 s4_adapted(double c);

// Chart maps with analytic Jacobians.
struct ChartMap {
  std::function<Point(const Point&)> map;
  std::function<Eigen::Matrix<double, 7, 7>(const Point&)> jacobian;
};

// (t,s,gamma,alpha,beta,theta,phi) -> (alpha,beta,theta,phi,a1,a2,a3)
ChartMap s4_adapted_to_native();
// (r,gamma,beta,alpha,theta,phi,psi) -> (alpha,theta,phi,psi,a1,a2,a3)
ChartMap cp2_polar_to_native();
// the polar chart used by the CP2 fibration work
std::shared_ptr<const Chart> cp2_polar_chart(double c);
std::shared_ptr<const Chart> s4_adapted_chart(double c);

// Pull a package evaluator back along a chart map at a point.
AltForm pullback_at(const ChartMap& f, const std::function<AltForm(const Point&)>& w,
                    const Point& p);

}  // namespace g2fib

#endif  // G2FIB_MODELS_HPP
