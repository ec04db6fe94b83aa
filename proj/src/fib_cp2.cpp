#include "fib_cp2.hpp"

#include <cmath>

#include "quat.hpp"

namespace g2fib::cp2 {

std::string case_name(CaseTag t) {
  switch (t) {
    case CaseTag::ZeroSection: return "zerosection";
    case CaseTag::SinGammaZero: return "singamma0";
    case CaseTag::CosGammaZero: return "cosgamma0";
    case CaseTag::AlphaPiHalf: return "alphapi2";
    case CaseTag::Generic: return "generic";
  }
  return "?";
}

CaseTag classify_case(const State& st, double tol) {
  if (st.r < tol) return CaseTag::ZeroSection;
  if (std::abs(std::sin(st.gamma)) < tol) return CaseTag::SinGammaZero;
  if (std::abs(std::cos(st.gamma)) < tol) return CaseTag::CosGammaZero;
  if (std::abs(std::cos(st.alpha)) < tol) return CaseTag::AlphaPiHalf;
  return CaseTag::Generic;
}

namespace {

// integral in the implicit sin(gamma) = 0 conserved quantity (c > 0)
double w_integral(double c, double r) {
  if (r == 0.0) return 0.0;
  auto f = [c](double s) { return std::pow(s, -0.5) * std::pow(c + s * s, -0.75); };
  return quad(f, 0.0, r, 1e-12, EndpointSingularity::SqrtLower).value;
}

double w_singamma(double c, double r, double alpha) {
  double w = std::sqrt(r) * std::pow(c + r * r, 0.25) * std::cos(2.0 * alpha);
  if (c > 0.0) w -= 0.5 * c * w_integral(c, r);
  return w;
}

}  // namespace

Conserved conserved(double c, const State& st) {
  Conserved out;
  out.tag = classify_case(st);
  out.beta = st.beta;
  switch (out.tag) {
    case CaseTag::ZeroSection:
      break;
    case CaseTag::SinGammaZero:
      out.w = w_singamma(c, st.r, st.alpha);
      break;
    case CaseTag::CosGammaZero: {
      if (c == 0.0) {
        double c2 = std::cos(2.0 * st.alpha);
        double w2 = st.r * (3.0 * c2 + 1.0) * (3.0 * c2 + 1.0) / (8.0 * (c2 + 1.0));
        // sign: the positive branch has cos(2 alpha) > -1/3
        out.w = std::copysign(std::sqrt(w2), 3.0 * c2 + 1.0);
      }
      break;
    }
    case CaseTag::AlphaPiHalf:
      out.w = st.r * std::cos(st.gamma);
      break;
    case CaseTag::Generic: {
      out.v = 2.0 * std::pow(c + st.r * st.r, 0.25) * std::cos(st.alpha) /
              std::tan(st.gamma);
      if (c == 0.0) {
        double sa2 = std::pow(std::sin(st.alpha), 2), ca2 = 1.0 - sa2;
        double sg2 = std::pow(std::sin(st.gamma), 2);
        out.u = (2.0 * ca2 - sa2 * sg2) / (ca2 * std::cos(st.gamma));
      }
      break;
    }
  }
  return out;
}

Residuals coass_residual(double c, const State& st, double dr, double dgamma,
                         double dalpha, double dbeta) {
  const double r = st.r, g = st.gamma, a = st.alpha;
  const double sg = std::sin(g), cg = std::cos(g), sa = std::sin(a), ca = std::cos(a);
  const double q = c + r * r;
  Residuals out;
  out.r0 = r * sg * sa * sa * ca * dbeta;
  out.r1 = std::pow(q, -0.75) * r * r * cg * ca * ca * dr +
           std::pow(q, 0.25) * (-cg * sa * sa * dr + r * sg * sa * sa * dgamma -
                                4.0 * r * cg * sa * ca * dalpha);
  out.r2 = std::pow(q, -0.75) * r * r * sg * ca * (1.0 + ca * ca) * dr +
           2.0 * std::pow(q, 0.25) *
               (-r * sg * sa * (1.0 + 3.0 * ca * ca) * dalpha -
                r * cg * sa * sa * ca * dgamma - sg * sa * sa * ca * dr);
  return out;
}

FlowField flow_field(double c, double v, double alpha, double gamma) {
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  const double sg = std::sin(gamma), cg = std::cos(gamma);
  const double v4 = v * v * v * v;
  const double E = v4 * std::pow(sg, 4) - 16.0 * c * std::pow(ca, 4) * std::pow(cg, 4);
  FlowField f;
  f.a_coef = ca * (E * (2.0 * ca * ca + sa * sa * sg * sg) -
                   2.0 * v4 * sa * sa * std::pow(sg, 4));
  f.b_coef = 2.0 * sa * sg * cg * (v4 * sa * sa * std::pow(sg, 4) + E * ca * ca);
  return f;
}

double flow_slope(double c, double v, double alpha, double gamma) {
  FlowField f = flow_field(c, v, alpha, gamma);
  if (f.a_coef == 0.0) throw DomainError("flow_slope: point on the boundary curve");
  return f.b_coef / f.a_coef;
}

namespace {

// 1-D safeguarded Newton on [lo, hi]; f must change sign.
double newton_1d(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fx = f(x);
    double h = 1e-7 * std::max(1.0, std::abs(x));
    double dfx = (f(x + h) - f(x - h)) / (2.0 * h);
    double xn = (dfx != 0.0) ? x - fx / dfx : x;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-15 * std::max(1.0, std::abs(x))) return xn;
    x = xn;
  }
  return x;
}

}  // namespace

std::vector<FixedPoint> fixed_points(double c, double v) {
  if (v <= 0.0) throw DomainError("fixed_points: need v > 0 for the generic family");
  std::vector<FixedPoint> out;
  auto push = [&](double a, double g) {
    FlowField f = flow_field(c, v, a, g);
    out.push_back({a, g, std::abs(f.a_coef) + std::abs(f.b_coef)});
  };
  if (c > 0.0) {
    // alpha = 0 line: tan^4 g = 16 c / v^4, refined on the A coefficient
    double g0 = std::atan(2.0 * std::pow(c, 0.25) / v);
    double root = newton_1d([&](double g) { return flow_field(c, v, 0.0, g).a_coef; },
                            std::max(1e-6, g0 - 0.3), std::min(M_PI / 2 - 1e-6, g0 + 0.3));
    push(0.0, root);
    push(M_PI / 2, 0.0);
  } else {
    push(0.0, 0.0);
    // gamma = 0 line, reduced field: 2 cos(2 alpha) = 0 at alpha = pi/4
    double root = newton_1d([](double a) { return 2.0 * std::cos(2.0 * a); }, 0.4, 1.1);
    push(root, 0.0);
    push(M_PI / 2, 0.0);
  }
  // gamma = pi/2 line: v^4 (2 cos^2 a - sin^2 a) = 0 -> tan^2 a = 2
  double root = newton_1d(
      [&](double a) { return flow_field(c, v, a, M_PI / 2).a_coef; }, 0.6, 1.3);
  push(root, M_PI / 2);
  push(M_PI / 2, M_PI / 2);
  return out;
}

double fixed_point_gap(double c, double v, int grid, double exclude_radius) {
  std::vector<FixedPoint> roots = fixed_points(c, v);
  double gap = 1e300;
  for (int i = 0; i <= grid; ++i) {
    double a = (M_PI / 2) * i / grid;
    for (int j = 0; j <= grid; ++j) {
      double g = (M_PI / 2) * j / grid;
      bool near = false;
      for (const auto& rt : roots)
        if (std::hypot(a - rt.alpha, g - rt.gamma) < exclude_radius) near = true;
      if (near) continue;
      FlowField f = flow_field(c, v, a, g);
      gap = std::min(gap, std::abs(f.a_coef) + std::abs(f.b_coef));
    }
  }
  return gap;
}

std::optional<double> boundary_curve_gamma(double c, double v, double alpha) {
  auto f = [&](double g) { return flow_field(c, v, alpha, g).a_coef; };
  const int n = 400;
  double prev_g = 1e-9, prev_f = f(prev_g);
  for (int i = 1; i <= n; ++i) {
    double g = (M_PI / 2 - 2e-9) * i / n + 1e-9;
    double fg = f(g);
    if ((prev_f < 0) != (fg < 0)) {
      double lo = prev_g, hi = g, flo = prev_f;
      for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_g = g;
    prev_f = fg;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

double r_of_generic(double c, double v, double alpha, double gamma) {
  double tg = std::tan(gamma), ca = std::cos(alpha);
  double r2 = std::pow(v, 4) * std::pow(tg, 4) / (16.0 * std::pow(ca, 4)) - c;
  return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

struct EndInfo {
  enum Kind { Bolt, OpenInfinity, OpenConeEnd, Inconclusive } kind = Inconclusive;
  double r_end = 0;
  double angle = 0;
  std::string what;
};

// follow the generic unit-speed field (da, dg)/dtau = dir (A, B)/|(A, B)|
EndInfo follow_generic(double c, double v, double a0, double g0, double dir,
                       const ClassifyOptions& opt) {
  EndInfo out;
  std::vector<FixedPoint> fps = fixed_points(c, v);
  OdeSystem sys{2, [c, v, dir](double, std::span<const double> y, std::span<double> dy) {
                  FlowField f = flow_field(c, v, y[0], y[1]);
                  double norm = std::hypot(f.a_coef, f.b_coef);
                  if (norm < 1e-300) norm = 1.0;
                  dy[0] = dir * f.a_coef / norm;
                  dy[1] = dir * f.b_coef / norm;
                }};
  std::vector<EventSpec> events;
  for (const auto& fp : fps)
    events.push_back({"fp", [fp, opt](double, std::span<const double> y) {
                        return std::hypot(y[0] - fp.alpha, y[1] - fp.gamma) -
                               opt.fp_radius;
                      },
                      true});
  events.push_back({"rmax", [c, v, opt](double, std::span<const double> y) {
                      return r_of_generic(c, v, y[0], y[1]) - opt.r_max;
                    },
                    true});
  events.push_back({"alpha0", [opt](double, std::span<const double> y) {
                      return y[0] - opt.edge_margin;
                    },
                    true});
  events.push_back({"gamma0", [opt](double, std::span<const double> y) {
                      return y[1] - opt.edge_margin;
                    },
                    true});
  // r = 0 can only be crossed when c > 0 (the zero section)
  events.push_back({"r0", [c, v](double, std::span<const double> y) {
                      double tg = std::tan(y[1]), ca = std::cos(y[0]);
                      return std::pow(v, 4) * std::pow(tg, 4) /
                                 (16.0 * std::pow(ca, 4)) -
                             c;
                    },
                    c > 0.0});
  std::array<double, 2> y0{a0, g0};
  FlowOptions fopt;
  fopt.rtol = 1e-10;
  fopt.atol = 1e-12;
  fopt.max_steps = 500000;
  FlowLine fl = integrate_flow(sys, y0, 0.0, 50.0, events, {}, fopt);
  double ae = fl.samples.back().y[0], ge = fl.samples.back().y[1];
  double re = r_of_generic(c, v, ae, ge);
  out.r_end = re;
  if (fl.status != FlowStatus::Event) {
    out.kind = EndInfo::Inconclusive;
    out.what = "no event";
    return out;
  }
  const std::string& name = events[static_cast<size_t>(fl.event_index)].name;
  if (name == "rmax") {
    out.kind = EndInfo::OpenInfinity;
    out.what = "r exceeded cap";
    return out;
  }
  if (name == "fp") {
    const FixedPoint& fp = fps[static_cast<size_t>(fl.event_index)];
    out.angle = std::atan2(ge - fp.gamma, ae - fp.alpha);
    if (std::abs(fp.alpha - M_PI / 2) < 1e-9 && std::abs(fp.gamma) < 1e-9) {
      // (pi/2, 0) is a CP1 orbit: r stays positive at c = 0, and for c > 0
      // the flow meets the zero section there
      out.kind = EndInfo::Bolt;
      out.what = "entered (pi/2, 0)";
      return out;
    }
    if (fp.alpha < 1e-9 || std::abs(fp.alpha - M_PI / 4) < 1e-9) {
      out.kind = EndInfo::OpenConeEnd;
      out.what = "entered the r = 0 critical point";
      return out;
    }
    if (std::abs(fp.gamma - M_PI / 2) < 1e-9 && fp.alpha < 1.2) {
      out.kind = EndInfo::OpenInfinity;
      out.what = "entered (arctan sqrt2, pi/2)";
      return out;
    }
    out.kind = EndInfo::Inconclusive;
    out.what = "entered (pi/2, pi/2)";
    return out;
  }
  if (name == "alpha0" || name == "gamma0") {
    out.kind = (re > 1e-9) ? EndInfo::Bolt : EndInfo::OpenConeEnd;
    out.what = "reached the " + name + " edge";
    return out;
  }
  if (name == "r0") {
    out.kind = EndInfo::Bolt;  // zero-section CP1 for c > 0
    out.what = "reached the zero section";
    return out;
  }
  return out;
}

// planar follow for the special cases in the (alpha, r) half strip
EndInfo follow_planar(double c, double a0, double r0, double dir, bool cosgamma_case,
                      const ClassifyOptions& opt) {
  EndInfo out;
  OdeSystem sys{2, [c, dir, cosgamma_case](double, std::span<const double> y,
                                           std::span<double> dy) {
                  double a = y[0], r = y[1];
                  double sa = std::sin(a), ca = std::cos(a);
                  double A, B;  // (dalpha, dr) direction
                  if (!cosgamma_case) {
                    A = r * r * ca * ca - (c + r * r) * sa * sa;
                    B = 4.0 * r * (c + r * r) * sa * ca;
                  } else {
                    A = (r * r * (2.0 - sa * sa) - 2.0 * (c + r * r) * sa * sa) * ca;
                    B = 2.0 * r * (c + r * r) * (1.0 + 3.0 * ca * ca) * sa;
                  }
                  double norm = std::hypot(A, B);
                  if (norm < 1e-300) norm = 1.0;
                  dy[0] = dir * A / norm;
                  dy[1] = dir * B / norm;
                }};
  std::vector<EventSpec> events;
  events.push_back({"alpha0", [opt](double, std::span<const double> y) {
                      return y[0] - opt.edge_margin;
                    },
                    true});
  events.push_back({"alphapi2", [opt](double, std::span<const double> y) {
                      return M_PI / 2 - opt.edge_margin - y[0];
                    },
                    true});
  events.push_back({"rmax", [opt](double, std::span<const double> y) {
                      return y[1] - opt.r_max;
                    },
                    true});
  events.push_back({"r0", [opt](double, std::span<const double> y) {
                      return y[1] - opt.edge_margin;
                    },
                    true});
  std::array<double, 2> y0{a0, r0};
  FlowOptions fopt;
  fopt.rtol = 1e-10;
  fopt.atol = 1e-12;
  fopt.max_steps = 500000;
  FlowLine fl = integrate_flow(sys, y0, 0.0, 3.0 * opt.r_max, events, {}, fopt);
  double ae = fl.samples.back().y[0], re = fl.samples.back().y[1];
  out.r_end = re;
  if (fl.status != FlowStatus::Event) {
    out.kind = EndInfo::Inconclusive;
    out.what = "no event";
    return out;
  }
  const std::string& name = events[static_cast<size_t>(fl.event_index)].name;
  if (name == "rmax") {
    out.kind = EndInfo::OpenInfinity;
    out.what = "r exceeded cap";
  } else if (name == "alpha0") {
    out.kind = (re > 1e-6) ? EndInfo::Bolt : EndInfo::OpenConeEnd;
    out.what = "reached alpha = 0";
  } else if (name == "alphapi2") {
    if (!cosgamma_case) {
      // a CP1 orbit at alpha = pi/2, r > 0 when sin(gamma) = 0
      out.kind = EndInfo::Bolt;
      out.what = "reached alpha = pi/2";
    } else if (re < 1e-3) {
      out.kind = (c > 0.0) ? EndInfo::Bolt : EndInfo::OpenConeEnd;
      out.what = "entered (pi/2, 0)";
    } else {
      out.kind = EndInfo::Inconclusive;
      out.what = "alpha = pi/2 at positive r";
    }
  } else {  // r0
    out.kind = (c > 0.0 && std::abs(ae - M_PI / 2) < 1e-3) ? EndInfo::Bolt
                                                           : EndInfo::OpenConeEnd;
    out.what = "r reached 0";
  }
  return out;
}

Topology combine_ends(const EndInfo& e1, const EndInfo& e2, bool* ok) {
  *ok = true;
  int bolts = (e1.kind == EndInfo::Bolt) + (e2.kind == EndInfo::Bolt);
  int opens = (e1.kind == EndInfo::OpenInfinity || e1.kind == EndInfo::OpenConeEnd) +
              (e2.kind == EndInfo::OpenInfinity || e2.kind == EndInfo::OpenConeEnd);
  if (e1.kind == EndInfo::Inconclusive || e2.kind == EndInfo::Inconclusive) {
    *ok = false;
    return Topology::ConeOverS3;
  }
  if (bolts == 1 && opens == 1) return Topology::LineBundle;
  if (opens == 2) return Topology::ConeOverS3;
  *ok = false;
  return Topology::ConeOverS3;
}

}  // namespace

FibreClass classify_fibre(double c, const State& start, const ClassifyOptions& opt) {
  FibreClass out;
  out.tag = classify_case(start);
  switch (out.tag) {
    case CaseTag::ZeroSection:
      out.topology = Topology::ZeroSection;
      out.detail = "the zero section";
      return out;
    case CaseTag::AlphaPiHalf: {
      double w = start.r * std::cos(start.gamma);
      if (std::abs(w) > 1e-12) {
        out.topology = Topology::LineBundle;
        out.bolt_r = std::abs(w);
        out.detail = "bolt at sin(gamma) = 0, open end at infinity";
      } else if (c > 0.0) {
        out.topology = Topology::LineBundle;
        out.bolt_r = 0.0;
        out.detail = "bolt at the zero-section CP1, open end at infinity";
      } else {
        out.topology = Topology::ConeOverS3;
        out.detail = "cone end at r = 0, open end at infinity";
      }
      return out;
    }
    case CaseTag::SinGammaZero: {
      if (c == 0.0) {
        double w = start.r * std::cos(2.0 * start.alpha);
        if (std::abs(w) < 1e-10) {
          out.topology = Topology::ConeOverS3;
          out.detail = "alpha = pi/4 line: cone end and open end";
          return out;
        }
      }
      EndInfo e1 = follow_planar(c, start.alpha, start.r, +1.0, false, opt);
      EndInfo e2 = follow_planar(c, start.alpha, start.r, -1.0, false, opt);
      bool ok = true;
      out.topology = combine_ends(e1, e2, &ok);
      out.conclusive = ok;
      out.detail = e1.what + " / " + e2.what;
      out.bolt_r = (e1.kind == EndInfo::Bolt) ? e1.r_end
                                              : (e2.kind == EndInfo::Bolt ? e2.r_end : 0.0);
      return out;
    }
    case CaseTag::CosGammaZero: {
      if (c == 0.0) {
        double x = 2.0 - 3.0 * std::pow(std::sin(start.alpha), 2);
        if (std::abs(x) < 1e-10) {
          out.topology = Topology::ConeOverS3;
          out.detail = "cos(2 alpha) = -1/3 line: cone end and open end";
          return out;
        }
      }
      EndInfo e1 = follow_planar(c, start.alpha, start.r, +1.0, true, opt);
      EndInfo e2 = follow_planar(c, start.alpha, start.r, -1.0, true, opt);
      bool ok = true;
      out.topology = combine_ends(e1, e2, &ok);
      out.conclusive = ok;
      out.detail = e1.what + " / " + e2.what;
      out.bolt_r = (e1.kind == EndInfo::Bolt) ? e1.r_end
                                              : (e2.kind == EndInfo::Bolt ? e2.r_end : 0.0);
      return out;
    }
    case CaseTag::Generic: {
      Conserved cq = conserved(c, start);
      double v = *cq.v;
      if (v <= 0.0) {
        // normalise gamma -> pi - gamma for the mirror half
        State st2 = start;
        st2.gamma = M_PI - start.gamma;
        return classify_fibre(c, st2, opt);
      }
      EndInfo e1 = follow_generic(c, v, start.alpha, start.gamma, +1.0, opt);
      EndInfo e2 = follow_generic(c, v, start.alpha, start.gamma, -1.0, opt);
      bool ok = true;
      out.topology = combine_ends(e1, e2, &ok);
      out.conclusive = ok;
      out.detail = e1.what + " / " + e2.what;
      out.bolt_r = (e1.kind == EndInfo::Bolt) ? e1.r_end
                                              : (e2.kind == EndInfo::Bolt ? e2.r_end : 0.0);
      out.entry_angle = (e1.kind == EndInfo::Bolt) ? e1.angle : e2.angle;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double multimoment(double c, const State& st) {
  double sa2 = std::pow(std::sin(st.alpha), 2);
  double sg2 = std::pow(std::sin(st.gamma), 2);
  return 0.25 * st.r * st.r * sa2 * (4.0 * (1.0 - sa2) + sg2 * sa2) +
         0.5 * c * (1.0 - sa2 * sa2);
}

std::array<double, 3> multimoment_grad(double c, const State& st) {
  double sa = std::sin(st.alpha), ca = std::cos(st.alpha);
  double sg = std::sin(st.gamma), cg = std::cos(st.gamma);
  double r = st.r;
  double d_r = 0.5 * r * sa * sa * (4.0 * ca * ca + sg * sg * sa * sa);
  double d_g = 0.5 * r * r * std::pow(sa, 4) * sg * cg;
  double d_a = 0.25 * r * r *
                   (2.0 * sa * ca * (4.0 * ca * ca + sg * sg * sa * sa) +
                    sa * sa * (-8.0 * ca * sa + 2.0 * sg * sg * sa * ca)) -
               2.0 * c * sa * sa * sa * ca;
  return {d_r, d_g, d_a};
}

FibreMetric fibre_metric(double c, const State& st) {
  const double r = st.r, a = st.alpha, g = st.gamma;
  const double sa = std::sin(a), ca = std::cos(a), sg = std::sin(g), cg = std::cos(g);
  FibreMetric m;
  m.F2 = c + r * r;
  m.J2 = 4.0 * m.F2 * ca * ca + r * r * sa * sa * sg * sg * cg * cg;
  m.K2 = 4.0 * c * sa * sa * ca * ca + 4.0 * r * r * ca * ca +
         3.0 * r * r * sa * sa * ca * ca * sg * sg + r * r * sa * sa * sg * sg;
  m.L2 = r * r + c * sa * sa;
  const double F = std::sqrt(m.F2), J = std::sqrt(m.J2), K = std::sqrt(m.K2),
               L = std::sqrt(m.L2);
  if (K < 1e-14 || L < 1e-14)
    throw DomainError("cp2 fibre metric: degenerate coframe (K or L vanishes)");
  m.g_rr = 4.0 * (m.F2 * m.K2 + std::pow(r, 4) * sa * sa * ca * ca * sg * sg * cg * cg) /
           (F * m.K2 * m.K2 * m.L2 * sa * sa);
  m.g_11 = (m.K2 - 4.0 * r * r * std::pow(ca, 4) * cg * cg) / (4.0 * F);
  m.g_22 = (m.L2 - r * r * ca * ca * sg * sg) / F;
  m.g_33 = m.L2 / F;
  // displayed line-element cross terms carry twice the matrix entries
  m.g_r3 = 2.0 * r * r * ca * sg * cg * cg / (J * K * L);
  m.g_12 = -r * r * ca * (2.0 - sa * sa) * sg * cg / (2.0 * F);
  return m;
}

// ---------------------------------------------------------------------------
// Fibre curves

FibreCurve curve_singamma0_cone(double w) {
  return [w](double r) {
    OnFibre f;
    double x = w / r;  // cos(2 alpha)
    if (std::abs(x) > 1.0) throw DomainError("singamma0 curve: r below the bolt");
    f.alpha = 0.5 * std::acos(x);
    f.gamma = 0.0;
    f.dalpha_dr = w / (2.0 * r * r * std::sin(2.0 * f.alpha));
    f.dgamma_dr = 0.0;
    return f;
  };
}

FibreCurve curve_singamma0_smooth(double c, double r0, double alpha0) {
  double w = w_singamma(c, r0, alpha0);
  return [c, w](double r) {
    OnFibre f;
    double denom = std::sqrt(r) * std::pow(c + r * r, 0.25);
    double num = w + 0.5 * c * w_integral(c, r);
    double x = num / denom;
    if (std::abs(x) > 1.0) throw DomainError("singamma0 curve: r below the bolt");
    f.alpha = 0.5 * std::acos(x);
    f.gamma = 0.0;
    double ddenom = 0.5 * std::pow(r, -0.5) * std::pow(c + r * r, 0.25) +
                    std::sqrt(r) * 0.5 * r * std::pow(c + r * r, -0.75);
    double dnum = 0.5 * c * std::pow(r, -0.5) * std::pow(c + r * r, -0.75);
    double dx = (dnum * denom - num * ddenom) / (denom * denom);
    f.dalpha_dr = -dx / (2.0 * std::sin(2.0 * f.alpha));
    f.dgamma_dr = 0.0;
    return f;
  };
}

FibreCurve curve_cosgamma0_cone(double w) {
  return [w](double r) {
    OnFibre f;
    double w2 = w * w;
    double root = std::sqrt(w2 * w2 + 3.0 * w2 * r);
    double x = -1.0 / 3.0 + (4.0 / (9.0 * r)) * (w > 0 ? w2 + root : w2 - root);
    x = std::clamp(x, -1.0, 1.0);
    f.alpha = 0.5 * std::acos(x);
    f.gamma = M_PI / 2;
    double droot = 1.5 * w2 / root;
    double dx = -(4.0 / (9.0 * r * r)) * (w > 0 ? w2 + root : w2 - root) +
                (4.0 / (9.0 * r)) * (w > 0 ? droot : -droot);
    double s2a = std::sin(2.0 * f.alpha);
    f.dalpha_dr = (s2a > 1e-14) ? -dx / (2.0 * s2a) : 0.0;
    f.dgamma_dr = 0.0;
    return f;
  };
}

FibreCurve curve_alphapi2(double c, double w) {
  (void)c;
  return [w](double r) {
    OnFibre f;
    double x = w / r;  // cos(gamma)
    if (std::abs(x) > 1.0) throw DomainError("alphapi2 curve: r below the bolt");
    f.alpha = M_PI / 2;
    f.gamma = std::acos(x);
    f.dalpha_dr = 0.0;
    f.dgamma_dr = w / (r * r * std::sin(f.gamma));
    return f;
  };
}

FibreCurve curve_generic_cone(double u, double v) {
  return [u, v](double r) {
    auto gamma_of = [u, v](double rr) {
      double disc = std::sqrt(u * u * v * v + 12.0 * v * v + 48.0 * rr);
      double cg = v * (-u * v + disc) / (2.0 * (v * v + 4.0 * rr));
      return std::acos(std::clamp(cg, -1.0, 1.0));
    };
    auto alpha_of = [v, &gamma_of](double rr) {
      double g = gamma_of(rr);
      double ca2 = v * v * std::pow(std::sin(g), 2) /
                   (4.0 * rr * std::pow(std::cos(g), 2));
      return std::acos(std::sqrt(std::clamp(ca2, 0.0, 1.0)));
    };
    OnFibre f;
    f.gamma = gamma_of(r);
    f.alpha = alpha_of(r);
    double h = 1e-6 * std::max(1.0, r);
    f.dgamma_dr = (gamma_of(r + h) - gamma_of(r - h)) / (2.0 * h);
    f.dalpha_dr = (alpha_of(r + h) - alpha_of(r - h)) / (2.0 * h);
    return f;
  };
}

namespace {

struct ConeCoeffs3 {
  double c1, c2, c3;
};

ConeCoeffs3 cone_coeffs(ConeRef c) {
  if (c == ConeRef::A) return {1.0 / 6.0, 1.0 / 6.0, 1.0 / 4.0};
  return {1.0 / 16.0, 1.0 / 4.0, 1.0 / 4.0};
}

double deviation_at(double c, const State& st, double drho_dr, ConeRef cone, double R) {
  FibreMetric m = fibre_metric(c, st);
  ConeCoeffs3 cc = cone_coeffs(cone);
  double dr_dR = 0.5 * R;  // r = R^2/4
  double drho_dR = drho_dr * dr_dR;
  double dev = std::abs(m.g_rr * drho_dR * drho_dR - 1.0);
  dev = std::max(dev, std::abs(m.g_11 / (R * R) - cc.c1));
  dev = std::max(dev, std::abs(m.g_22 / (R * R) - cc.c2));
  dev = std::max(dev, std::abs(m.g_33 / (R * R) - cc.c3));
  dev = std::max(dev, std::abs(m.g_12 / (R * R)));
  dev = std::max(dev, std::abs(m.g_r3 * drho_dR / R));
  return dev;
}

double drho_dr_on_curve(double c, double r, const OnFibre& f) {
  State st{r, f.gamma, f.alpha, 0.0};
  auto grad = multimoment_grad(c, st);
  return grad[0] + grad[1] * f.dgamma_dr + grad[2] * f.dalpha_dr;
}

}  // namespace

std::vector<std::pair<double, double>> cone_deviation_samples(
    double c, const FibreCurve& curve, ConeRef cone, double R_min, double R_max,
    int n) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double R = R_min * std::pow(R_max / R_min, static_cast<double>(i) / (n - 1));
    double r = R * R / 4.0;
    OnFibre f = curve(r);
    State st{r, f.gamma, f.alpha, 0.0};
    out.emplace_back(R, deviation_at(c, st, drho_dr_on_curve(c, r, f), cone, R));
  }
  return out;
}

std::vector<std::pair<double, double>> cone_samples_cosgamma0_smooth(
    double c, double r0, double alpha0, double R_min, double R_max) {
  OdeSystem sys{1, [c](double r, std::span<const double> y, std::span<double> dy) {
                  double a = y[0];
                  double sa = std::sin(a), ca = std::cos(a);
                  double num = (r * r * (2.0 - sa * sa) -
                                2.0 * (c + r * r) * sa * sa) * ca;
                  double den = 2.0 * r * (c + r * r) * (1.0 + 3.0 * ca * ca) * sa;
                  dy[0] = num / den;
                }};
  std::array<double, 1> y0{alpha0};
  FlowOptions opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-13;
  opt.max_steps = 400000;
  double r_hi = R_max * R_max / 4.0;
  FlowLine fl = integrate_flow(sys, y0, r0, r_hi, {}, {}, opt);
  std::vector<std::pair<double, double>> out;
  for (const auto& s : fl.samples) {
    double r = s.t;
    double R = 2.0 * std::sqrt(r);
    if (R < R_min || R > R_max) continue;
    double a = s.y[0];
    double sa = std::sin(a), ca = std::cos(a);
    OnFibre f;
    f.alpha = a;
    f.gamma = M_PI / 2;
    f.dalpha_dr = (r * r * (2.0 - sa * sa) - 2.0 * (c + r * r) * sa * sa) * ca /
                  (2.0 * r * (c + r * r) * (1.0 + 3.0 * ca * ca) * sa);
    f.dgamma_dr = 0.0;
    State st{r, f.gamma, f.alpha, 0.0};
    out.emplace_back(R, deviation_at(c, st, drho_dr_on_curve(c, r, f), ConeRef::A, R));
  }
  return out;
}

std::vector<std::pair<double, double>> cone_samples_generic_smooth(
    double c, double v, double alpha0, double gamma0, double R_min, double R_max) {
  OdeSystem sys{1, [c, v](double g, std::span<const double> y, std::span<double> dy) {
                  FlowField f = flow_field(c, v, y[0], g);
                  dy[0] = f.a_coef / f.b_coef;  // d alpha / d gamma
                }};
  std::array<double, 1> y0{alpha0};
  FlowOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  opt.max_steps = 400000;
  std::vector<EventSpec> events;
  events.push_back({"rcap", [c, v, R_max](double g, std::span<const double> y) {
                      return r_of_generic(c, v, y[0], g) - R_max * R_max / 2.0;
                    },
                    true});
  FlowLine fl = integrate_flow(sys, y0, gamma0, M_PI / 2 - 1e-9, events, {}, opt);
  std::vector<std::pair<double, double>> out;
  for (const auto& s : fl.samples) {
    double g = s.t, a = s.y[0];
    double r = r_of_generic(c, v, a, g);
    if (r <= 0.0) continue;
    double R = 2.0 * std::sqrt(r);
    if (R < R_min || R > R_max) continue;
    FlowField ff = flow_field(c, v, a, g);
    OnFibre f;
    f.alpha = a;
    f.gamma = g;
    double tg = std::tan(g), ca = std::cos(a), sa = std::sin(a);
    double dr_dg = std::pow(v, 4) * 4.0 * std::pow(tg, 3) /
                   (std::cos(g) * std::cos(g) * 16.0 * std::pow(ca, 4)) / (2.0 * r);
    double dr_da = std::pow(v, 4) * std::pow(tg, 4) * 4.0 * sa /
                   (16.0 * std::pow(ca, 5)) / (2.0 * r);
    double dalpha_dg = ff.a_coef / ff.b_coef;
    double dr_total = dr_dg + dr_da * dalpha_dg;
    f.dgamma_dr = 1.0 / dr_total;
    f.dalpha_dr = dalpha_dg / dr_total;
    State st{r, g, a, 0.0};
    out.emplace_back(R, deviation_at(c, st, drho_dr_on_curve(c, r, f), ConeRef::A, R));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Harvey-Lawson

namespace {

// imaginary octonions R^7 = Im H + H e with the Cayley-Dickson product
struct Oct {
  Quat a, b;
};

Oct omul(const Oct& x, const Oct& y) {
  // (a, b)(c, d) = (a c - d* b, d a + b c*)
  Quat ac = x.a * y.a;
  Quat db = y.b.conj() * x.b;
  Quat da = y.b * x.a;
  Quat bc = x.b * y.a.conj();
  return {ac + (-1.0 * db), da + bc};
}

Eigen::Matrix<double, 7, 1> to_vec(const Oct& o) {
  Eigen::Matrix<double, 7, 1> v;
  v << o.a.x, o.a.y, o.a.z, o.b.w, o.b.x, o.b.y, o.b.z;
  return v;
}

Oct from_vec(const Eigen::Matrix<double, 7, 1>& v) {
  return {Quat{0, v(0), v(1), v(2)}, Quat{v(3), v(4), v(5), v(6)}};
}

double phi_octonion(const Eigen::Matrix<double, 7, 1>& u,
                    const Eigen::Matrix<double, 7, 1>& v,
                    const Eigen::Matrix<double, 7, 1>& w) {
  // phi(u, v, w) = <u x v, w> with u x v = Im(uv); this reproduces the
  // standard phi on the ordering (x1, x2, x3, y0, y1, y2, y3)
  Oct uv = omul(from_vec(u), from_vec(v));
  Oct vu = omul(from_vec(v), from_vec(u));
  Oct cr{0.5 * (uv.a + (-1.0 * vu.a)), 0.5 * (uv.b + (-1.0 * vu.b))};
  return to_vec(cr).dot(w);
}

Eigen::Matrix<double, 7, 1> hl_point(const Quat& eps, const Quat& q, double r,
                                     double s) {
  Quat x = q * eps * q.conj();
  Oct o{r * x, s * q.conj()};
  return to_vec(o);
}

}  // namespace

HlReport harvey_lawson_check(const std::array<double, 3>& epsilon, double tau,
                             int n_samples, uint64_t seed) {
  Quat eps{0, epsilon[0], epsilon[1], epsilon[2]};
  if (std::abs(eps.norm() - 1.0) > 1e-12)
    throw DomainError("harvey_lawson: |epsilon| must be 1");
  if (tau < 0.0) throw DomainError("harvey_lawson: tau < 0 (flip epsilon instead)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.2, 1.6);
  std::normal_distribution<double> gauss(0.0, 1.0);
  HlReport rep;
  auto constraint = [tau](double r, double s) {
    double f = 4.0 * r * r - 5.0 * s * s;
    return r * f * f - tau;
  };
  for (int i = 0; i < n_samples; ++i) {
    Quat q{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
    q = (1.0 / q.norm()) * q;
    double s = u01(rng);
    double r, dr_ds;
    int branch = i % 2;
    if (tau == 0.0) {
      if (branch == 0) {
        r = std::sqrt(5.0) / 2.0 * s;  // the Lawson-Osserman cone component
        dr_ds = std::sqrt(5.0) / 2.0;
      } else {
        r = 0.0;  // the flat C^2 component
        dr_ds = 0.0;
      }
    } else {
      double lo, hi;
      if (branch == 0) {
        lo = std::sqrt(5.0) / 2.0 * s + 1e-12;
        hi = lo + 10.0 + std::cbrt(tau);
      } else {
        // interior component: roots exist for 8 s^5 > tau; the constraint has
        // its interior maximum at r = s/2
        while (8.0 * std::pow(s, 5) <= tau) s *= 1.5;
        lo = 1e-14;
        hi = s / 2.0;
      }
      double flo = constraint(lo, s);
      for (int it = 0; it < 120; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((constraint(mid, s) < 0) == (flo < 0)) {
          lo = mid;
          flo = constraint(lo, s);
        } else {
          hi = mid;
        }
      }
      r = 0.5 * (lo + hi);
      double f = 4.0 * r * r - 5.0 * s * s;
      double dA = f * f + 16.0 * r * r * f;
      double dB = -20.0 * r * s * f;
      dr_ds = -dB / dA;
    }
    rep.worst_constraint = std::max(rep.worst_constraint, std::abs(constraint(r, s)));
    // FD tangents (five-point stencils): three directions of q, one along
    // the (r, s)-curve
    double h = 1e-3;
    std::array<Eigen::Matrix<double, 7, 1>, 4> T;
    const Quat gens[3] = {{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    for (int m = 0; m < 3; ++m) {
      auto at = [&](double e) {
        Quat qe = q + (0.5 * e) * (gens[m] * q);
        qe = (1.0 / qe.norm()) * qe;
        return hl_point(eps, qe, r, s);
      };
      T[static_cast<size_t>(m)] =
          (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
    }
    {
      auto at = [&](double e) { return hl_point(eps, q, r + e * dr_ds, s + e); };
      T[3] = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
    }
    double scale = 0.0;
    for (const auto& t : T) scale = std::max(scale, t.norm());
    scale = std::max(scale * scale * scale, 1e-12);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        for (int d = b + 1; d < 4; ++d) {
          double val = phi_octonion(T[static_cast<size_t>(a)], T[static_cast<size_t>(b)],
                                    T[static_cast<size_t>(d)]);
          rep.worst_phi = std::max(rep.worst_phi, std::abs(val) / scale);
        }
    ++rep.n_samples;
  }
  return rep;
}

}  // namespace g2fib::cp2
