#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace g2fib {

namespace {

AltForm d_fd_once(const FormField& f, const Point& p, double h_rel) {
  const Chart& chart = *f.chart;
  AltForm out(f.degree + 1);
  auto idx = multi_index::list(f.degree);
  for (int m = 0; m < chart.dim; ++m) {
    double h = h_rel * chart.fd_scale[static_cast<size_t>(m)];
    Point pp = p, pm = p;
    pp[static_cast<size_t>(m)] += h;
    pm[static_cast<size_t>(m)] -= h;
    if (!chart.contains(pp) || !chart.contains(pm))
      throw DomainError("d_fd: stencil leaves the chart near coordinate " +
                        chart.names[static_cast<size_t>(m)]);
    AltForm diff = f.eval(pp) - f.eval(pm);
    diff *= 1.0 / (2.0 * h);
    // dx^m ^ (d_m coefficients)
    AltForm dxm = AltForm::basis({m});
    out += wedge(dxm, diff);
  }
  return out;
}

}  // namespace

AltForm d_fd(const FormField& f, const Point& p, const FdOptions& opt) {
  if (!f.chart) throw DomainError("d_fd: field has no chart");
  if (opt.check_margin && !f.chart->contains(p))
    throw DomainError("d_fd: point outside chart");
  AltForm d1 = d_fd_once(f, p, opt.h_rel);
  if (!opt.richardson) return d1;
  AltForm d2 = d_fd_once(f, p, opt.h_rel / 2.0);
  // central differences have O(h^2) error: (4 D(h/2) - D(h)) / 3
  return (4.0 * d2 - d1) * (1.0 / 3.0);
}

AltForm d_fd(const ScalarField& f, const Chart& chart, const Point& p,
             const FdOptions& opt) {
  FormField ff{&chart, 0, [&f](const Point& q) {
                 AltForm a(0);
                 a[0] = f.eval(q);
                 return a;
               }};
  return d_fd(ff, p, opt);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with PI step-size control.

namespace {

constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200,
                           187.0 / 2100,    1.0 / 40};

struct Stepper {
  const OdeSystem& sys;
  std::vector<std::array<double, 7>> k;  // k[i][stage] transposed storage
  std::vector<double> ytmp, yerr;

  explicit Stepper(const OdeSystem& s)
      : sys(s), k(static_cast<size_t>(s.n)), ytmp(static_cast<size_t>(s.n)),
        yerr(static_cast<size_t>(s.n)) {}

  // One attempted step from (t, y) with size h; writes y_new and the error
  // estimate.
  void attempt(double t, std::span<const double> y, double h,
               std::span<double> y_new) {
    const int n = sys.n;
    std::vector<double> dy(static_cast<size_t>(n));
    for (int s = 0; s < 7; ++s) {
      for (int i = 0; i < n; ++i) {
        double acc = y[static_cast<size_t>(i)];
        for (int j = 0; j < s; ++j)
          acc += h * kA[s][j] * k[static_cast<size_t>(i)][static_cast<size_t>(j)];
        ytmp[static_cast<size_t>(i)] = acc;
      }
      if (s == 0) {
        sys.rhs(t, y, dy);
      } else {
        sys.rhs(t + kC[s] * h, ytmp, dy);
      }
      for (int i = 0; i < n; ++i) k[static_cast<size_t>(i)][static_cast<size_t>(s)] = dy[static_cast<size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
      double y5 = y[static_cast<size_t>(i)], y4 = y[static_cast<size_t>(i)];
      for (int s = 0; s < 7; ++s) {
        y5 += h * kB5[s] * k[static_cast<size_t>(i)][static_cast<size_t>(s)];
        y4 += h * kB4[s] * k[static_cast<size_t>(i)][static_cast<size_t>(s)];
      }
      y_new[static_cast<size_t>(i)] = y5;
      yerr[static_cast<size_t>(i)] = y5 - y4;
    }
  }
};

// Cubic Hermite interpolation between accepted samples, for event bisection.
void hermite(double t0, std::span<const double> y0, std::span<const double> f0,
             double t1, std::span<const double> y1, std::span<const double> f1,
             double t, std::span<double> out) {
  double h = t1 - t0;
  double s = (t - t0) / h;
  double s2 = s * s, s3 = s2 * s;
  double a = 2 * s3 - 3 * s2 + 1, b = s3 - 2 * s2 + s, c = -2 * s3 + 3 * s2,
         d = s3 - s2;
  for (size_t i = 0; i < y0.size(); ++i)
    out[i] = a * y0[i] + b * h * f0[i] + c * y1[i] + d * h * f1[i];
}

}  // namespace

FlowLine integrate_flow(const OdeSystem& sys, std::span<const double> y0,
                        double t0, double t_end,
                        std::span<const EventSpec> events,
                        std::span<const AuditSpec> audits,
                        const FlowOptions& opt) {
  FlowLine line;
  const int n = sys.n;
  const double dir = (t_end >= t0) ? 1.0 : -1.0;
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> ynew(static_cast<size_t>(n)), f_old(static_cast<size_t>(n)),
      f_new(static_cast<size_t>(n));
  Stepper st(sys);

  std::vector<double> audit0(audits.size());
  auto record = [&](double t, std::span<const double> ys, double h) {
    FlowSample s;
    s.t = t;
    s.y.assign(ys.begin(), ys.end());
    s.audit.resize(audits.size());
    for (size_t a = 0; a < audits.size(); ++a) {
      s.audit[a] = audits[a].fn(ys);
      if (line.samples.empty()) audit0[a] = s.audit[a];
      double drift = std::abs(s.audit[a] - audit0[a]) /
                     std::max(std::abs(audit0[a]), opt.audit_abs_floor);
      line.max_audit_drift = std::max(line.max_audit_drift, drift);
    }
    s.h = h;
    line.samples.push_back(std::move(s));
  };

  record(t0, y, 0.0);
  std::vector<double> ev_old(events.size());
  for (size_t e = 0; e < events.size(); ++e) ev_old[e] = events[e].fn(t0, y);

  double span_t = std::abs(t_end - t0);
  double h = opt.h0 != 0.0 ? std::abs(opt.h0) : span_t / 100.0;
  h = std::min(h, span_t);
  double t = t0;
  double prev_err = 1.0;

  for (long step = 0; step < opt.max_steps; ++step) {
    if (dir * (t - t_end) >= 0.0) {
      line.status = FlowStatus::ReachedEnd;
      return line;
    }
    h = std::min(h, std::abs(t_end - t));
    if (h < opt.h_min) {
      line.status = FlowStatus::SingularityReached;
      line.message = "step size underflow";
      return line;
    }
    st.attempt(t, y, dir * h, ynew);
    // error norm
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[static_cast<size_t>(i)]),
                                                 std::abs(ynew[static_cast<size_t>(i)]));
      double e = st.yerr[static_cast<size_t>(i)] / sc;
      err += e * e;
    }
    err = std::sqrt(err / n);
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
      continue;
    }
    // accepted
    double t_new = t + dir * h;
    for (int i = 0; i < n; ++i) {
      f_old[static_cast<size_t>(i)] = st.k[static_cast<size_t>(i)][0];
      f_new[static_cast<size_t>(i)] = st.k[static_cast<size_t>(i)][6];
    }
    if (opt.state_valid && !opt.state_valid(ynew)) {
      line.status = FlowStatus::LeftChart;
      record(t_new, ynew, dir * h);
      return line;
    }
    // event crossing on [t, t_new]?
    int fired = -1;
    double t_ev = t_new;
    std::vector<double> y_ev = ynew;
    for (size_t e = 0; e < events.size(); ++e) {
      double v_new = events[e].fn(t_new, ynew);
      if (ev_old[e] == 0.0) {
        ev_old[e] = v_new;
        continue;
      }
      if (v_new == 0.0 || (ev_old[e] < 0) != (v_new < 0)) {
        // bisect on the Hermite interpolant
        double lo = t, hi = t_new, vlo = ev_old[e];
        std::vector<double> ymid(static_cast<size_t>(n));
        for (int it = 0; it < 200; ++it) {
          double mid = 0.5 * (lo + hi);
          hermite(t, y, f_old, t_new, ynew, f_new, mid, ymid);
          double vm = events[e].fn(mid, ymid);
          if (std::abs(vm) < opt.event_tol) {
            lo = hi = mid;
            vlo = vm;
            break;
          }
          if ((vlo < 0) != (vm < 0)) {
            hi = mid;
          } else {
            lo = mid;
            vlo = vm;
          }
        }
        double tm = 0.5 * (lo + hi);
        if (fired < 0 || dir * (tm - t_ev) < 0) {
          fired = static_cast<int>(e);
          t_ev = tm;
          hermite(t, y, f_old, t_new, ynew, f_new, tm, ymid);
          y_ev = ymid;
          line.event_residual = std::abs(events[e].fn(tm, ymid));
        }
      }
      ev_old[e] = v_new;
    }
    if (fired >= 0 && events[static_cast<size_t>(fired)].terminal) {
      record(t_ev, y_ev, t_ev - t);
      line.status = FlowStatus::Event;
      line.event_index = fired;
      return line;
    }
    t = t_new;
    y = ynew;
    record(t, y, dir * h);
    // PI controller
    double fac = 0.9 * std::pow(err > 0 ? err : 1e-10, -0.7 / 5.0) *
                 std::pow(prev_err > 0 ? prev_err : 1e-10, 0.4 / 5.0);
    fac = std::clamp(fac, 0.2, 5.0);
    prev_err = err > 0 ? err : 1e-10;
    h *= fac;
  }
  line.status = FlowStatus::MaxSteps;
  return line;
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod (7,15)

namespace {

constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

void gk15(const std::function<double(double)>& f, double a, double b,
          double* value, double* err) {
  double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  double fc = f(c);
  double resk = kWk[7] * fc, resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    double x = hl * kXgk[j];
    double f1 = f(c - x), f2 = f(c + x);
    resk += kWk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  *value = resk * hl;
  *err = std::abs((resk - resg) * hl);
}

}  // namespace

QuadResult quad(const std::function<double(double)>& f, double a, double b,
                double abs_tol, EndpointSingularity sing) {
  if (sing == EndpointSingularity::SqrtLower) {
    // s = a + u^2 removes an (s-a)^(-1/2) singularity
    auto g = [f, a](double u) { return f(a + u * u) * 2.0 * u; };
    return quad(g, 0.0, std::sqrt(b - a), abs_tol, EndpointSingularity::None);
  }
  if (sing == EndpointSingularity::SqrtUpper) {
    auto g = [f, b](double u) { return f(b - u * u) * 2.0 * u; };
    return quad(g, 0.0, std::sqrt(b - a), abs_tol, EndpointSingularity::None);
  }
  struct Interval {
    double a, b, value, err;
  };
  QuadResult out;
  if (a == b) return out;
  std::deque<Interval> q;
  Interval whole{a, b, 0, 0};
  gk15(f, a, b, &whole.value, &whole.err);
  q.push_back(whole);
  double total = whole.value, total_err = whole.err;
  for (int iter = 0; iter < 2000 && total_err > abs_tol; ++iter) {
    // split the worst interval
    auto worst = std::max_element(q.begin(), q.end(), [](auto& x, auto& y) {
      return x.err < y.err;
    });
    Interval w = *worst;
    q.erase(worst);
    double mid = 0.5 * (w.a + w.b);
    Interval l{w.a, mid, 0, 0}, r{mid, w.b, 0, 0};
    gk15(f, l.a, l.b, &l.value, &l.err);
    gk15(f, r.a, r.b, &r.value, &r.err);
    total += l.value + r.value - w.value;
    total_err += l.err + r.err - w.err;
    q.push_back(l);
    q.push_back(r);
    if (mid == w.a || mid == w.b) break;  // cannot refine further
  }
  out.value = total;
  out.error_estimate = total_err;
  out.converged = (total_err <= abs_tol * 10.0);
  return out;
}

// ---------------------------------------------------------------------------

RateFit fit_rate(std::span<const std::pair<double, double>> samples,
                 double exact_tol) {
  RateFit out;
  out.n = static_cast<int>(samples.size());
  bool all_tiny = true;
  for (const auto& s : samples)
    if (s.second > exact_tol) all_tiny = false;
  if (all_tiny) {
    out.exact_cone = true;
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  std::vector<std::pair<double, double>> logs;
  for (const auto& s : samples) {
    if (s.second <= 0.0) continue;  // drop exact hits, keep the fit honest
    double x = std::log10(s.first), y = std::log10(s.second);
    logs.emplace_back(x, y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw DomainError("fit_rate: not enough positive deviations");
  double denom = n * sxx - sx * sx;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;
  for (const auto& l : logs)
    out.residual = std::max(out.residual,
                            std::abs(l.second - (out.intercept + out.slope * l.first)));
  out.n = n;
  return out;
}

double refit_half_window_slope(std::span<const std::pair<double, double>> samples) {
  // refit on the upper half of the R-window
  std::vector<std::pair<double, double>> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  size_t from = sorted.size() / 2;
  std::vector<std::pair<double, double>> upper(sorted.begin() + static_cast<long>(from),
                                                sorted.end());
  return fit_rate(upper).slope;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd hessian_fd(const ScalarField& h,
                           const std::function<Eigen::MatrixXd(const Point&)>& k,
                           const Chart& chart, const Point& p, double h_rel) {
  const int n = chart.dim;
  if (!chart.contains(p)) throw DomainError("hessian_fd: point outside chart");
  auto step = [&](int i) { return h_rel * chart.fd_scale[static_cast<size_t>(i)]; };
  auto shifted = [&](const Point& q, int i, double d) {
    Point r = q;
    r[static_cast<size_t>(i)] += d;
    if (!chart.contains(r)) throw DomainError("hessian_fd: stencil leaves chart");
    return r;
  };
  // first and second partials of h
  Eigen::VectorXd dh(n);
  Eigen::MatrixXd ddh(n, n);
  double h0 = h.eval(p);
  for (int i = 0; i < n; ++i) {
    double hi = step(i);
    double hp = h.eval(shifted(p, i, hi));
    double hm = h.eval(shifted(p, i, -hi));
    dh(i) = (hp - hm) / (2 * hi);
    ddh(i, i) = (hp - 2 * h0 + hm) / (hi * hi);
    for (int j = i + 1; j < n; ++j) {
      double hj = step(j);
      double hpp = h.eval(shifted(shifted(p, i, hi), j, hj));
      double hpm = h.eval(shifted(shifted(p, i, hi), j, -hj));
      double hmp = h.eval(shifted(shifted(p, i, -hi), j, hj));
      double hmm = h.eval(shifted(shifted(p, i, -hi), j, -hj));
      ddh(i, j) = ddh(j, i) = (hpp - hpm - hmp + hmm) / (4 * hi * hj);
    }
  }
  // Christoffel symbols from FD of the metric coefficients
  Eigen::MatrixXd g0 = k(p);
  Eigen::MatrixXd ginv = g0.inverse();
  std::vector<Eigen::MatrixXd> dg(static_cast<size_t>(n));
  for (int l = 0; l < n; ++l) {
    double hl = step(l);
    dg[static_cast<size_t>(l)] = (k(shifted(p, l, hl)) - k(shifted(p, l, -hl))) / (2 * hl);
  }
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double gam_dh = 0.0;
      for (int kk = 0; kk < n; ++kk) {
        double gamma = 0.0;
        for (int l = 0; l < n; ++l)
          gamma += ginv(kk, l) * (dg[static_cast<size_t>(i)](j, l) + dg[static_cast<size_t>(j)](i, l) -
                                  dg[static_cast<size_t>(l)](i, j));
        gam_dh += 0.5 * gamma * dh(kk);
      }
      out(i, j) = ddh(i, j) - gam_dh;
    }
  }
  // enforce exact symmetry
  return 0.5 * (out + out.transpose());
}

}  // namespace g2fib
