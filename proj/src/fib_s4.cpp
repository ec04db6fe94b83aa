#include "fib_s4.hpp"

#include <cmath>
#include <complex>

namespace g2fib::s4 {

namespace {

double quart(double c, const State& st) {
  return c + st.s * st.s + st.t * st.t;
}

// D = 2 c cos^2 a + (s^2 + t^2)(1 + cos^2 a), the recurring denominator
double denomD(double c, const State& st) {
  double ca2 = std::cos(st.alpha) * std::cos(st.alpha);
  return 2.0 * c * ca2 + (st.s * st.s + st.t * st.t) * (1.0 + ca2);
}

}  // namespace

Projection project(double c, const State& st, double beta) {
  Projection p;
  p.u = st.t * std::cos(st.alpha);
  p.v = 2.0 * std::pow(quart(c, st), 0.25) * std::sin(st.alpha);
  p.beta = beta;
  return p;
}

std::pair<double, double> coass_residual(double c, const State& st, double ds,
                                         double dt, double dalpha) {
  if (std::abs(std::cos(st.alpha)) < 1e-12)
    throw DomainError("s4 coassociative ODE: cos(alpha) = 0 is degenerate");
  double u4 = quart(c, st);
  double sa = std::sin(st.alpha), ca = std::cos(st.alpha);
  double radial = st.t * dt + st.s * ds;
  double r1 = -std::pow(u4, -0.75) * st.s * sa * radial -
              2.0 * std::pow(u4, 0.25) * st.s * ca * dalpha;
  double r2 = -std::pow(u4, -0.75) * st.t * sa * sa * radial +
              2.0 * std::pow(u4, 0.25) * ca * ca * dt -
              4.0 * std::pow(u4, 0.25) * st.t * sa * ca * dalpha;
  return {r1, r2};
}

namespace {

// Solve v = 2 (c + (u^2 + rho^2) / cos^2 a)^(1/4) sin a for a in [0, pi/2).
double solve_alpha(double c, double u, double v, double rho) {
  if (v < 0.0) throw DomainError("s4: v must be nonnegative");
  if (v == 0.0) return 0.0;
  double q = u * u + rho * rho;
  if (q == 0.0) {
    // pure c branch: v = 2 c^(1/4) sin a
    double s = (c > 0.0) ? v / (2.0 * std::pow(c, 0.25)) : 2.0;
    if (s > 1.0)
      throw DomainError("s4: no generic solution for (u, v) at this rho");
    return std::asin(s);
  }
  auto f = [&](double a) {
    double ca = std::cos(a);
    return 2.0 * std::pow(c + q / (ca * ca), 0.25) * std::sin(a) - v;
  };
  // f(0) = -v < 0 and f -> +infinity as a -> pi/2
  double lo = 0.0, hi = M_PI / 2;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

State state_at_rho(double c, double u, double v, double rho) {
  if (rho < 0.0) throw DomainError("s4: rho must be nonnegative");
  State st;
  st.alpha = solve_alpha(c, u, v, rho);
  double ca = std::cos(st.alpha);
  st.s = rho / ca;
  st.t = u / ca;
  return st;
}

BoltInfo bolt(double c, double u, double v) {
  if (v < 0.0) throw DomainError("s4 bolt: v must be nonnegative");
  BoltInfo out;
  const double vc = (c > 0.0) ? 2.0 * std::pow(c, 0.25) : 0.0;
  if (u == 0.0 && v >= vc) {
    if (v == vc) {
      // the singular fibre: vanished bolt
      out.size = 0.0;
      out.topology = (c > 0.0) ? BoltTopology::ConeWithVertex : BoltTopology::PuncturedCone;
      out.nongeneric = (c > 0.0);
      out.t = 0.0;
      out.alpha = (c > 0.0) ? M_PI / 2 : 0.0;
      return out;
    }
    // non-generic branch: bolts at alpha = pi/2
    out.size = (v * v / 4.0) * (1.0 - 16.0 * c / (v * v * v * v));
    out.topology = BoltTopology::CotangentS2;
    out.nongeneric = true;
    out.alpha = M_PI / 2;
    out.t = 0.0;
    return out;
  }
  double a = solve_alpha(c, u, v, 0.0);
  double t = u / std::cos(a);
  double ca2 = std::cos(a) * std::cos(a);
  out.t = t;
  out.alpha = a;
  out.size = (2.0 * c * ca2 + t * t * (1.0 + ca2)) / std::sqrt(c + t * t);
  out.topology = BoltTopology::CotangentS2;
  return out;
}

FibreMetric fibre_metric(double c, double u, double v, double rho) {
  if (rho <= 0.0 && v == 0.0 && u == 0.0 && c == 0.0)
    throw DomainError("s4 fibre metric: cone vertex");
  FibreMetric m;
  m.rho = rho;
  m.st = state_at_rho(c, u, v, rho);
  const State& st = m.st;
  double u4 = quart(c, st), sq = std::sqrt(u4);
  double sa = std::sin(st.alpha), ca = std::cos(st.alpha);
  double D = denomD(c, st);
  double num = 2.0 * u4 * ca * ca + st.t * st.t * sa * sa;
  if (rho == 0.0) {
    // on the bolt only the sphere block survives as a metric on the orbit
    m.g_rr = m.g_r3 = m.g_11 = m.g_12 = 0.0;
  } else {
    m.g_rr = num / (sq * ca * ca * D);
    m.g_r3 = -st.t * sa / (sq * ca);  // matrix entry (half the line-element term)
    m.g_11 = st.s * st.s / sq;
    m.g_12 = -st.s * st.t * sa / sq;  // matrix entry
  }
  m.g_33 = D / sq;
  m.g_22 = num / sq;
  return m;
}

std::vector<std::pair<double, double>> cone_deviation_samples(
    double c, double u, double v, const ConeCoeffs& cone, double rho_of_R2,
    double R_min, double R_max, int n) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double R = R_min * std::pow(R_max / R_min, static_cast<double>(i) / (n - 1));
    double rho = rho_of_R2 * R * R;
    FibreMetric m = fibre_metric(c, u, v, rho);
    // transform to the cone-normalised coframe (dR, R s1, R s2, R s3);
    // d rho = 2 rho_of_R2 R dR.
    double dr = 2.0 * rho_of_R2 * R;
    double dev = std::abs(m.g_rr * dr * dr - 1.0);
    dev = std::max(dev, std::abs(m.g_11 / (R * R) - cone.c1));
    dev = std::max(dev, std::abs(m.g_22 / (R * R) - cone.c2));
    dev = std::max(dev, std::abs(m.g_33 / (R * R) - cone.c3));
    dev = std::max(dev, std::abs(m.g_12 / (R * R)));
    dev = std::max(dev, std::abs(m.g_r3 * dr / R));
    out.emplace_back(R, dev);
  }
  return out;
}

std::shared_ptr<const Chart> fibre_chart(double c, double u, double v) {
  auto chart = std::make_shared<Chart>();
  chart->dim = 4;
  chart->names = {"rho", "gamma", "theta", "phi", "", "", ""};
  (void)c;
  (void)u;
  (void)v;
  chart->valid = [](const Point& p) {
    return p[0] > 1e-6 && p[2] > 0.05 && p[2] < M_PI - 0.05;
  };
  return chart;
}

AltForm fibre_sigma(int k, const Point& p) {
  const double g = p[1], th = p[2];
  AltForm s(1);
  switch (k) {
    case 1:
      s[1] = 1.0;
      s[3] = std::cos(th);
      break;
    case 2:
      s[2] = std::cos(g);
      s[3] = std::sin(g) * std::sin(th);
      break;
    case 3:
      s[2] = std::sin(g);
      s[3] = -std::cos(g) * std::sin(th);
      break;
    default:
      throw DomainError("fibre_sigma: k must be 1..3");
  }
  return s;
}

MetricAt fibre_metric_at(double c, double u, double v, const Point& p) {
  FibreMetric fm = fibre_metric(c, u, v, p[0]);
  AltForm drho = AltForm::basis({0});
  AltForm s1 = fibre_sigma(1, p), s2 = fibre_sigma(2, p), s3 = fibre_sigma(3, p);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  auto add = [&g](double w, const AltForm& a, const AltForm& b) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) += w * 0.5 * (a[i] * b[j] + a[j] * b[i]);
  };
  add(fm.g_rr, drho, drho);
  add(2.0 * fm.g_r3, drho, s3);
  add(fm.g_11, s1, s1);
  add(2.0 * fm.g_12, s1, s2);
  add(fm.g_22, s2, s2);
  add(fm.g_33, s3, s3);
  AltForm vol = (2.0 * p[0]) * wedge(wedge(drho, s1), wedge(s2, s3));
  return MetricAt::from_matrix(g, vol);
}

std::array<AltForm, 3> hyper_forms_at(double c, double u, double v, const Point& p) {
  double rho = p[0];
  if (rho <= 0.0) throw DomainError("s4 hypersymplectic: need rho > 0");
  if (v <= 0.0) throw DomainError("s4 hypersymplectic: need v > 0");
  State st = state_at_rho(c, u, v, rho);
  double u4 = quart(c, st), q4 = std::pow(u4, 0.25);
  double sa = std::sin(st.alpha), ca = std::cos(st.alpha);
  double D = denomD(c, st);
  double num = 2.0 * u4 * ca * ca + st.t * st.t * sa * sa;
  AltForm dr = AltForm::basis({0});
  AltForm s1 = fibre_sigma(1, p), s2 = fibre_sigma(2, p), s3 = fibre_sigma(3, p);
  AltForm w1 = (2.0 * st.s * q4 / D) * wedge(dr, s1) + (2.0 * q4 * ca) * wedge(s2, s3);
  AltForm w2 = (st.s * st.t * sa / (ca * D)) * wedge(dr, s1) -
               (num / (ca * D)) * wedge(dr, s2) - st.s * wedge(s3, s1) -
               (st.t * sa) * wedge(s2, s3);
  AltForm w3 = (2.0 * q4 * sa) * (wedge(dr, s3) + (st.s * ca) * wedge(s1, s2));
  return {w1, w2, w3};
}

Hyper hypersymplectic(double c, double u, double v, double rho) {
  Hyper h{{AltForm(2), AltForm(2), AltForm(2)}, Eigen::Matrix3d::Zero()};
  Point p{rho, 0.3, 1.1, 0.4};  // orbit angles do not affect Q
  h.omega = hyper_forms_at(c, u, v, p);
  State st = state_at_rho(c, u, v, rho);
  double u4 = quart(c, st), sq = std::sqrt(u4);
  double sa = std::sin(st.alpha);
  double D = denomD(c, st);
  h.q(0, 0) = 2.0 * sq / D;
  h.q(1, 1) = u4 / D;
  h.q(2, 2) = 2.0 * sq * sa * sa;
  return h;
}

VanishingCycle vanishing_cycle(double c, double u, double v, const Point& p) {
  if (v <= 0.0) throw DomainError("vanishing cycle: singular fibre");
  State st = state_at_rho(c, u, v, p[0]);
  double u4 = quart(c, st);
  double sa = std::sin(st.alpha), ca = std::cos(st.alpha);
  auto w = hyper_forms_at(c, u, v, p);
  VanishingCycle out;
  out.omega = (std::sqrt(2.0) / v) * w[2];
  out.re_omega = std::pow(u4, 0.25) * ca * w[0] - (st.t * sa / std::sqrt(u4)) * w[1];
  out.im_omega = (-st.t * sa / (std::sqrt(2.0) * std::pow(u4, 0.25))) * w[0] -
                 std::sqrt(2.0) * ca * w[1];
  return out;
}

// ---------------------------------------------------------------------------
// Base geometry

std::shared_ptr<const Chart> base_chart(double c) {
  auto chart = std::make_shared<Chart>();
  chart->dim = 3;
  chart->names = {"t", "alpha", "beta", "", "", "", ""};
  const bool cone = (c == 0.0);
  chart->valid = [cone](const Point& p) {
    if (p[1] < 0.02 || p[1] > M_PI / 2 - 1e-9) return false;
    if (cone && std::abs(p[0]) < 1e-6) return false;
    return true;
  };
  return chart;
}

Eigen::MatrixXd base_metric(double c, const Point& p) {
  double t = p[0], a = p[1];
  double w = std::sqrt(c + t * t);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g(0, 0) = 1.0 / w;
  g(1, 1) = 2.0 * w;
  g(2, 2) = 2.0 * w * std::sin(a) * std::sin(a);
  return g;
}

AltForm base_vol(double c, const Point& p) {
  double t = p[0], a = p[1];
  AltForm v(3);
  v[0] = 2.0 * std::pow(c + t * t, 0.25) * std::sin(a);
  return v;
}

double l_c(double c, double t) {
  if (c == 0.0) return 0.0;
  double sign = (t < 0) ? -1.0 : 1.0;
  double at = std::abs(t);
  auto integrand = [c](double s) { return c * std::pow(c + s * s, -0.75); };
  return sign * quad(integrand, 0.0, at, 1e-12).value;
}

double potential_h(double c, double t, double alpha) {
  double ca = std::cos(alpha);
  return (2.0 / 3.0) *
         (t * std::pow(c + t * t, 0.25) * (3.0 * ca * ca - 1.0) + l_c(c, t));
}

AltForm lambda_closed_form(double c, const Point& p) {
  double t = p[0], a = p[1];
  double sa = std::sin(a), ca = std::cos(a);
  double w = c + t * t;
  AltForm out(1);
  out[0] = 2.0 * std::pow(w, 0.25) * ca * ca - t * t * std::pow(w, -0.75) * sa * sa;
  out[1] = -4.0 * t * std::pow(w, 0.25) * sa * ca;
  return out;
}

double bolt_size_from_base(double c, double t, double alpha) {
  double ca2 = std::cos(alpha) * std::cos(alpha);
  return (2.0 * c * ca2 + t * t * (1.0 + ca2)) / std::sqrt(c + t * t);
}

std::shared_ptr<const Chart> base_chart_uv(double c) {
  auto chart = std::make_shared<Chart>();
  chart->dim = 3;
  chart->names = {"u", "v", "beta", "", "", "", ""};
  const double vc = (c > 0.0) ? 2.0 * std::pow(c, 0.25) : 0.0;
  chart->valid = [vc](const Point& p) {
    if (p[1] <= 1e-9) return false;
    // stay off the ray u = 0, v >= vc where the generic inversion breaks
    if (std::abs(p[0]) < 1e-12 && vc > 0.0 && p[1] >= vc - 1e-9) return false;
    return true;
  };
  return chart;
}

std::pair<double, double> t_alpha_from_uv(double c, double u, double v) {
  double a = solve_alpha(c, u, v, 0.0);
  return {u / std::cos(a), a};
}

Eigen::MatrixXd base_metric_uv(double c, const Point& p) {
  auto [t, a] = t_alpha_from_uv(c, p[0], p[1]);
  double ca2 = std::cos(a) * std::cos(a);
  double D0 = 2.0 * c * ca2 + t * t * (1.0 + ca2);
  double w = std::sqrt(c + t * t);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g(0, 0) = 2.0 * w / D0;
  g(1, 1) = (c + t * t) / D0;
  g(2, 2) = p[1] * p[1] / 2.0;
  return g;
}

double potential_h_uv(double c, double u, double v) {
  auto [t, a] = t_alpha_from_uv(c, u, v);
  return potential_h(c, t, a);
}

Thimble thimble(double c, double t0, double alpha0, double event_tol) {
  Point p0{t0, alpha0, 0};
  AltForm lam = lambda_closed_form(c, p0);
  double a0 = std::hypot(lam[0], lam[1]);
  if (a0 < 1e-12) throw DomainError("thimble: start is a critical point of h");
  // gradient of h with respect to k_c in (t, alpha)
  auto grad = [c](std::span<const double> y, double* gt, double* ga) {
    Point q{y[0], y[1], 0};
    AltForm l = lambda_closed_form(c, q);
    double w = std::sqrt(c + y[0] * y[0]);
    *gt = w * l[0];
    *ga = l[1] / (2.0 * w);
  };
  // pick the flow direction that initially shrinks the bolt size
  double gt, ga;
  grad(std::array<double, 2>{t0, alpha0}, &gt, &ga);
  double h_fd = 1e-6;
  double a_plus = bolt_size_from_base(c, t0 + h_fd * gt, alpha0 + h_fd * ga);
  double dir = (a_plus < bolt_size_from_base(c, t0, alpha0)) ? 1.0 : -1.0;

  OdeSystem sys{2, [grad, dir](double, std::span<const double> y, std::span<double> dy) {
                  double gt2, ga2;
                  grad(y, &gt2, &ga2);
                  dy[0] = dir * gt2;
                  dy[1] = dir * ga2;
                }};
  std::vector<EventSpec> events;
  events.push_back({"critical", [c, event_tol](double, std::span<const double> y) {
                      return bolt_size_from_base(c, y[0], y[1]) - event_tol;
                    },
                    true});
  std::vector<AuditSpec> audits;
  audits.push_back({"h", [c](std::span<const double> y) {
                      return potential_h(c, y[0], y[1]);
                    }});
  FlowOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  opt.max_steps = 400000;
  opt.state_valid = [](std::span<const double> y) {
    return std::abs(y[0]) < 50.0 && y[1] > -0.1 && y[1] < M_PI / 2 + 0.1;
  };
  std::array<double, 2> y0{t0, alpha0};
  Thimble out;
  out.line = integrate_flow(sys, y0, 0.0, 1e9, events, audits, opt);
  out.end_t = out.line.samples.back().y[0];
  out.end_alpha = out.line.samples.back().y[1];
  out.reached_critical = (out.line.status == FlowStatus::Event);
  return out;
}

FlowLine fibre_flow(double c, const State& st0, double s_target) {
  OdeSystem sys{3, [c](double, std::span<const double> y, std::span<double> dy) {
                  // y = (s, t, alpha); gauge ds/dtau = 1
                  double s = y[0], t = y[1], a = y[2];
                  double u4 = c + s * s + t * t;
                  double sa = std::sin(a), ca = std::cos(a), ta = sa / ca;
                  double denom = t * t * sa * ta + 2.0 * u4 * ca;
                  double da = -s * sa / denom;
                  dy[0] = 1.0;
                  dy[1] = t * ta * da;
                  dy[2] = da;
                }};
  std::vector<AuditSpec> audits;
  audits.push_back({"u", [](std::span<const double> y) {
                      return y[1] * std::cos(y[2]);
                    }});
  audits.push_back({"v", [c](std::span<const double> y) {
                      return 2.0 * std::pow(c + y[0] * y[0] + y[1] * y[1], 0.25) *
                             std::sin(y[2]);
                    }});
  std::array<double, 3> y0{st0.s, st0.t, st0.alpha};
  FlowOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  return integrate_flow(sys, y0, st0.s, s_target, {}, audits, opt);
}

// ---------------------------------------------------------------------------
// Lefschetz model

std::shared_ptr<const Chart> lefschetz_chart() {
  auto chart = std::make_shared<Chart>();
  chart->dim = 4;
  chart->names = {"xi", "psi", "theta", "phi", "", "", ""};
  chart->valid = [](const Point& p) { return p[2] > 0.05 && p[2] < M_PI - 0.05; };
  return chart;
}

namespace {

AltForm lef_sigma(int k, const Point& p) {
  // sigma coframe on (psi, theta, phi) = indices 1, 2, 3
  const double ps = p[1], th = p[2];
  AltForm s(1);
  switch (k) {
    case 1:
      s[1] = 1.0;
      s[3] = std::cos(th);
      break;
    case 2:
      s[2] = std::cos(ps);
      s[3] = std::sin(ps) * std::sin(th);
      break;
    default:
      s[2] = std::sin(ps);
      s[3] = -std::cos(ps) * std::sin(th);
  }
  return s;
}

}  // namespace

Lefschetz lefschetz_fibre(double r, double eta, double xi) {
  if (r <= 0.0) throw DomainError("lefschetz fibre: r must be positive");
  Lefschetz out{0, 0, 0, 0, {AltForm(2), AltForm(2), AltForm(2)}, Eigen::Matrix3d::Zero()};
  double ch = std::cosh(xi), sh = std::sinh(xi), c2 = std::cosh(2 * xi);
  out.g_xx = r * r * c2;
  out.g_11 = r * r * sh * sh;
  out.g_22 = r * r * ch * ch;
  out.g_33 = r * r * c2;
  Point p{xi, 0.2, 1.0, 0.5};
  double r2 = r * r, s2x = std::sinh(2 * xi);
  AltForm dxi = AltForm::basis({0});
  AltForm s1 = lef_sigma(1, p), s2 = lef_sigma(2, p), s3 = lef_sigma(3, p);
  AltForm blockA = sh * wedge(dxi, s1) + ch * wedge(s2, s3);
  AltForm blockB = ch * wedge(dxi, s2) + sh * wedge(s3, s1);
  out.omega[0] = (-r2 * std::cos(3 * eta)) * blockA + (r2 * std::sin(3 * eta)) * blockB;
  out.omega[1] = (r2 * std::sin(3 * eta)) * blockA + (r2 * std::cos(3 * eta)) * blockB;
  out.omega[2] = (-r2 / 2.0) * (2.0 * c2 * wedge(dxi, s3) + s2x * wedge(s1, s2));
  out.q(0, 0) = out.q(1, 1) = 1.0 / c2;
  out.q(2, 2) = 1.0;
  return out;
}

MetricAt lefschetz_metric_at(double r, const Point& p) {
  double xi = p[0];
  Lefschetz lf = lefschetz_fibre(r, 0.0, xi);
  AltForm dxi = AltForm::basis({0});
  AltForm s1 = lef_sigma(1, p), s2 = lef_sigma(2, p), s3 = lef_sigma(3, p);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  auto add = [&g](double w, const AltForm& a) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) += w * a[i] * a[j];
  };
  add(lf.g_xx, dxi);
  add(lf.g_11, s1);
  add(lf.g_22, s2);
  add(lf.g_33, s3);
  AltForm vol = (0.25 * std::pow(r, 4) * std::sinh(4 * xi)) *
                wedge(wedge(dxi, s1), wedge(s2, s3));
  return MetricAt::from_matrix(g, vol);
}

std::array<AltForm, 3> lefschetz_hyper_at(double r, double eta, const Point& p) {
  Lefschetz lf = lefschetz_fibre(r, eta, p[0]);
  // re-evaluate the sigma blocks at the requested angles
  double xi = p[0];
  double ch = std::cosh(xi), sh = std::sinh(xi), c2 = std::cosh(2 * xi),
         s2x = std::sinh(2 * xi);
  AltForm dxi = AltForm::basis({0});
  AltForm s1 = lef_sigma(1, p), s2 = lef_sigma(2, p), s3 = lef_sigma(3, p);
  AltForm blockA = sh * wedge(dxi, s1) + ch * wedge(s2, s3);
  AltForm blockB = ch * wedge(dxi, s2) + sh * wedge(s3, s1);
  double r2 = r * r;
  std::array<AltForm, 3> w{AltForm(2), AltForm(2), AltForm(2)};
  w[0] = (-r2 * std::cos(3 * eta)) * blockA + (r2 * std::sin(3 * eta)) * blockB;
  w[1] = (r2 * std::sin(3 * eta)) * blockA + (r2 * std::cos(3 * eta)) * blockB;
  w[2] = (-r2 / 2.0) * (2.0 * c2 * wedge(dxi, s3) + s2x * wedge(s1, s2));
  (void)lf;
  return w;
}

std::array<std::complex<double>, 3> lefschetz_embed(double r, double eta,
                                                    const Point& p) {
  using cd = std::complex<double>;
  double xi = p[0], ps = p[1], th = p[2], ph = p[3];
  cd re = r * std::exp(cd(0, eta));
  double ch = std::cosh(xi), sh = std::sinh(xi);
  double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  Eigen::Vector3d n(st * cp, st * sp, ct);
  Eigen::Vector3d e1(ct * cp, ct * sp, -st);  // d n / d theta
  Eigen::Vector3d e2(-sp, cp, 0.0);
  Eigen::Vector3d m = -std::sin(ps) * e1 + std::cos(ps) * e2;
  std::array<cd, 3> z;
  for (int i = 0; i < 3; ++i)
    z[static_cast<size_t>(i)] = re * ch * n(i) + cd(0, 1) * re * sh * m(i);
  return z;
}

std::vector<std::pair<double, double>> lefschetz_cone_samples(double r, double R_min,
                                                              double R_max, int n) {
  // in rho = sqrt(2) r sinh(xi) coordinates the cone is
  // d rho^2 + rho^2/2 (s1^2 + s2^2) + rho^2 s3^2 with R = rho
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double R = R_min * std::pow(R_max / R_min, static_cast<double>(i) / (n - 1));
    double rho = R;
    double g_rr = 1.0 - r * r / (2 * r * r + rho * rho);
    double g11 = rho * rho / 2.0;
    double g22 = (rho * rho / 2.0) * (1.0 + 2.0 * r * r / (rho * rho));
    double g33 = rho * rho * (1.0 + r * r / (rho * rho));
    double dev = std::abs(g_rr - 1.0);
    dev = std::max(dev, std::abs(g11 / (R * R) - 0.5));
    dev = std::max(dev, std::abs(g22 / (R * R) - 0.5));
    dev = std::max(dev, std::abs(g33 / (R * R) - 1.0));
    out.emplace_back(R, dev);
  }
  return out;
}

}  // namespace g2fib::s4
