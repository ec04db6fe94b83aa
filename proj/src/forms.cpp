#include "forms.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace g2fib {
namespace multi_index {
namespace {

struct Tables {
  // combos[k] = list of increasing k-subsets of {0..6}, lexicographic.
  std::array<std::vector<std::array<int, 7>>, 8> combos;
  // rank_of[k][bitmask] -> position, -1 otherwise.
  std::array<std::vector<int>, 8> rank_of;

  Tables() {
    for (int k = 0; k <= 7; ++k) {
      rank_of[k].assign(1 << 7, -1);
      std::array<int, 7> idx;
      idx.fill(-1);
      std::vector<int> cur(k);
      // enumerate subsets in lexicographic order
      std::vector<std::array<int, 7>>& out = combos[k];
      std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
          std::array<int, 7> e;
          e.fill(-1);
          int mask = 0;
          for (int i = 0; i < k; ++i) {
            e[i] = cur[static_cast<size_t>(i)];
            mask |= 1 << e[i];
          }
          rank_of[k][static_cast<size_t>(mask)] = static_cast<int>(out.size());
          out.push_back(e);
          return;
        }
        for (int v = start; v < 7; ++v) {
          cur[static_cast<size_t>(depth)] = v;
          rec(v + 1, depth + 1);
        }
      };
      rec(0, 0);
    }
  }
};

const Tables& tables() {
  static Tables t;
  return t;
}

int mask_of(std::span<const int> idx) {
  int mask = 0;
  for (int i : idx) {
    if (i < 0 || i >= 7) throw DomainError("multi_index: index out of range");
    if (mask & (1 << i)) return -1;  // repeated index
    mask |= 1 << i;
  }
  return mask;
}

}  // namespace

int rank(int degree, std::span<const int> idx) {
  int mask = mask_of(idx);
  if (mask < 0) return -1;
  return tables().rank_of[static_cast<size_t>(degree)][static_cast<size_t>(mask)];
}

std::span<const std::array<int, 7>> list(int degree) {
  return tables().combos[static_cast<size_t>(degree)];
}

int merge_sign(std::span<const int> a, std::span<const int> b,
               int* merged_rank, int degree_sum) {
  int maska = 0, maskb = 0;
  for (int i : a) maska |= 1 << i;
  for (int i : b) maskb |= 1 << i;
  if (maska & maskb) return 0;
  // Count inversions between the two increasing sequences.
  int sign = 1;
  size_t ia = 0;
  for (size_t ib = 0; ib < b.size(); ++ib) {
    while (ia < a.size() && a[ia] < b[ib]) ++ia;
    // all a[ia..] are > b[ib]; each transposition flips the sign
    if ((a.size() - ia) % 2 == 1) sign = -sign;
  }
  if (merged_rank) {
    *merged_rank = tables().rank_of[static_cast<size_t>(degree_sum)]
                                   [static_cast<size_t>(maska | maskb)];
  }
  return sign;
}

}  // namespace multi_index

namespace {

// Sign of the permutation sorting idx; 0 if repeated. Writes sorted copy.
int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  for (size_t i = 0; i < idx.size(); ++i) {
    for (size_t j = i + 1; j < idx.size(); ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) {
        std::swap(idx[i], idx[j]);
        sign = -sign;
      }
    }
  }
  return sign;
}

}  // namespace

AltForm AltForm::basis(std::initializer_list<int> idx, double scale) {
  std::vector<int> v(idx);
  int sign = sort_sign(v);
  AltForm out(static_cast<int>(v.size()));
  if (sign == 0) return out;
  int r = multi_index::rank(out.degree_, v);
  out.c_[static_cast<size_t>(r)] = sign * scale;
  return out;
}

double AltForm::coeff(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != degree_)
    throw DomainError("AltForm::coeff: wrong arity");
  std::vector<int> v(idx.begin(), idx.end());
  int sign = sort_sign(v);
  if (sign == 0) return 0.0;
  return sign * c_[static_cast<size_t>(multi_index::rank(degree_, v))];
}

void AltForm::add_term(std::span<const int> idx, double value) {
  std::vector<int> v(idx.begin(), idx.end());
  int sign = sort_sign(v);
  if (sign == 0) return;
  c_[static_cast<size_t>(multi_index::rank(degree_, v))] += sign * value;
}

AltForm& AltForm::operator+=(const AltForm& o) {
  if (degree_ != o.degree_) throw DomainError("AltForm: degree mismatch in +");
  for (int i = 0; i < size(); ++i) c_[static_cast<size_t>(i)] += o.c_[static_cast<size_t>(i)];
  return *this;
}

AltForm& AltForm::operator-=(const AltForm& o) {
  if (degree_ != o.degree_) throw DomainError("AltForm: degree mismatch in -");
  for (int i = 0; i < size(); ++i) c_[static_cast<size_t>(i)] -= o.c_[static_cast<size_t>(i)];
  return *this;
}

AltForm& AltForm::operator*=(double s) {
  for (int i = 0; i < size(); ++i) c_[static_cast<size_t>(i)] *= s;
  return *this;
}

double AltForm::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < size(); ++i) m = std::max(m, std::abs(c_[static_cast<size_t>(i)]));
  return m;
}

namespace {

// Wedge tables enumerate, for each output multi-index, its splits into an
// (ka, kb) pair in an order fixed by the unordered degree pair. Equal-degree
// splits are grouped so that a^b and (-1)^(k l) b^a agree bit for bit.
struct WedgeOp {
  int16_t out, ra, rb;
  int8_t sign;     // sign of merge(ra-set, rb-set)
  int8_t grouped;  // 1: add sign*(a[ra] b[rb] + (-1)^k a[rb] b[ra])
};

struct WedgeTable {
  std::vector<WedgeOp> ops;
};

WedgeTable build_wedge_table(int ka, int kb) {
  WedgeTable t;
  const int kout = ka + kb;
  auto lout = multi_index::list(kout);
  const bool equal = (ka == kb);
  const int ksmall = std::min(ka, kb);
  for (size_t rout = 0; rout < lout.size(); ++rout) {
    std::span<const int> K(lout[rout].data(), static_cast<size_t>(kout));
    // enumerate size-ksmall subsets S of K in lexicographic order
    std::vector<int> sel(static_cast<size_t>(ksmall));
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == ksmall) {
        std::vector<int> S, T;
        std::vector<bool> used(static_cast<size_t>(kout), false);
        for (int d = 0; d < ksmall; ++d) used[static_cast<size_t>(sel[static_cast<size_t>(d)])] = true;
        for (int p = 0; p < kout; ++p)
          (used[static_cast<size_t>(p)] ? S : T).push_back(K[static_cast<size_t>(p)]);
        int rS = multi_index::rank(ksmall, S);
        int rT = multi_index::rank(kout - ksmall, T);
        int sgn = multi_index::merge_sign(S, T, nullptr, kout);
        if (equal && ksmall > 0) {
          if (rS > rT) return;  // unordered pair, visited once
          t.ops.push_back({static_cast<int16_t>(rout), static_cast<int16_t>(rS),
                           static_cast<int16_t>(rT), static_cast<int8_t>(sgn), 1});
        } else if (ka == ksmall) {
          t.ops.push_back({static_cast<int16_t>(rout), static_cast<int16_t>(rS),
                           static_cast<int16_t>(rT), static_cast<int8_t>(sgn), 0});
        } else {
          int sgn2 = multi_index::merge_sign(T, S, nullptr, kout);
          t.ops.push_back({static_cast<int16_t>(rout), static_cast<int16_t>(rT),
                           static_cast<int16_t>(rS), static_cast<int8_t>(sgn2), 0});
        }
        return;
      }
      for (int v = start; v < kout; ++v) {
        sel[static_cast<size_t>(depth)] = v;
        rec(v + 1, depth + 1);
      }
    };
    rec(0, 0);
  }
  return t;
}

const WedgeTable& wedge_table(int ka, int kb) {
  static std::array<std::array<WedgeTable, 8>, 8> cache;
  static std::once_flag built;
  std::call_once(built, [] {
    for (int a = 0; a <= 7; ++a)
      for (int b = 0; a + b <= 7; ++b)
        cache[static_cast<size_t>(a)][static_cast<size_t>(b)] = build_wedge_table(a, b);
  });
  return cache[static_cast<size_t>(ka)][static_cast<size_t>(kb)];
}

}  // namespace

AltForm wedge(const AltForm& a, const AltForm& b) {
  int ka = a.degree(), kb = b.degree();
  if (ka + kb > kDim) throw DomainError("wedge: degree overflow");
  AltForm out(ka + kb);
  const WedgeTable& t = wedge_table(ka, kb);
  const double swap = (ka % 2 == 0) ? 1.0 : -1.0;  // (-1)^k for grouped ops
  for (const WedgeOp& op : t.ops) {
    double term;
    if (op.grouped) {
      term = op.sign * (a[op.ra] * b[op.rb] + swap * a[op.rb] * b[op.ra]);
    } else {
      term = op.sign * (a[op.ra] * b[op.rb]);
    }
    out[op.out] += term;
  }
  return out;
}

AltForm interior(const TangentVector& x, const AltForm& a) {
  int k = a.degree();
  if (k < 1) throw DomainError("interior: degree must be >= 1");
  AltForm out(k - 1);
  auto idx = multi_index::list(k);
  for (int r = 0; r < a.size(); ++r) {
    double ar = a[r];
    if (ar == 0.0) continue;
    const std::array<int, 7>& I = idx[static_cast<size_t>(r)];
    int sign = 1;
    for (int p = 0; p < k; ++p) {
      double xv = x[I[static_cast<size_t>(p)]];
      if (xv != 0.0) {
        // remove slot p
        std::array<int, 7> J{};
        int q = 0;
        for (int t2 = 0; t2 < k; ++t2)
          if (t2 != p) J[static_cast<size_t>(q++)] = I[static_cast<size_t>(t2)];
        int rr = multi_index::rank(k - 1, std::span<const int>(J.data(), static_cast<size_t>(k - 1)));
        out[rr] += sign * xv * ar;
      }
      sign = -sign;
    }
  }
  return out;
}

double eval3(const AltForm& phi, const TangentVector& x,
             const TangentVector& y, const TangentVector& z) {
  AltForm zy = interior(y, interior(x, phi));
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) s += zy[i] * z[i];
  return s;
}

AltForm contract2(const AltForm& phi, const TangentVector& x,
                  const TangentVector& y) {
  return interior(y, interior(x, phi));
}

AltForm contract3(const AltForm& psi, const TangentVector& x,
                  const TangentVector& y, const TangentVector& z) {
  return interior(z, interior(y, interior(x, psi)));
}

MetricAt MetricAt::from_matrix(const Eigen::MatrixXd& g, const AltForm& vol) {
  MetricAt m;
  m.dim = static_cast<int>(g.rows());
  m.g = g;
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw DomainError("MetricAt: matrix not positive definite");
  m.ginv = llt.solve(Eigen::MatrixXd::Identity(m.dim, m.dim));
  m.vol = vol;
  return m;
}

MetricAt MetricAt::euclidean(int dim) {
  AltForm vol(dim);
  vol[0] = 1.0;
  return from_matrix(Eigen::MatrixXd::Identity(dim, dim), vol);
}

namespace {

// det of the k x k matrix ginv[I, J]
double minor_det(const Eigen::MatrixXd& ginv, std::span<const int> I,
                 std::span<const int> J) {
  const int k = static_cast<int>(I.size());
  switch (k) {
    case 0:
      return 1.0;
    case 1:
      return ginv(I[0], J[0]);
    case 2:
      return ginv(I[0], J[0]) * ginv(I[1], J[1]) -
             ginv(I[0], J[1]) * ginv(I[1], J[0]);
    default: {
      Eigen::MatrixXd m(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) m(r, c) = ginv(I[static_cast<size_t>(r)], J[static_cast<size_t>(c)]);
      return m.determinant();
    }
  }
}

void check_form_in_chart(const MetricAt& m, const AltForm& a) {
  if (m.dim == kDim) return;
  auto idx = multi_index::list(a.degree());
  for (int r = 0; r < a.size(); ++r) {
    if (a[r] == 0.0) continue;
    const auto& I = idx[static_cast<size_t>(r)];
    for (int p = 0; p < a.degree(); ++p)
      if (I[static_cast<size_t>(p)] >= m.dim)
        throw DomainError("form touches coordinates outside the chart");
  }
}

}  // namespace

double inner(const MetricAt& m, const AltForm& a, const AltForm& b) {
  if (a.degree() != b.degree()) throw DomainError("inner: degree mismatch");
  check_form_in_chart(m, a);
  check_form_in_chart(m, b);
  const int k = a.degree();
  auto idx = multi_index::list(k);
  double s = 0.0;
  for (int r = 0; r < a.size(); ++r) {
    if (a[r] == 0.0) continue;
    std::span<const int> I(idx[static_cast<size_t>(r)].data(), static_cast<size_t>(k));
    for (int q = 0; q < b.size(); ++q) {
      if (b[q] == 0.0) continue;
      std::span<const int> J(idx[static_cast<size_t>(q)].data(), static_cast<size_t>(k));
      s += a[r] * b[q] * minor_det(m.ginv, I, J);
    }
  }
  return s;
}

double form_norm(const MetricAt& m, const AltForm& a) {
  return std::sqrt(std::max(0.0, inner(m, a, a)));
}

AltForm hodge(const MetricAt& m, const AltForm& a) {
  check_form_in_chart(m, a);
  const int n = m.dim;
  const int k = a.degree();
  if (k > n) throw DomainError("hodge: degree exceeds chart dimension");
  // vol = volc * dx^{0..n-1}
  std::vector<int> full(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) full[static_cast<size_t>(i)] = i;
  double volc = m.vol.coeff(full);
  if (volc == 0.0) throw DomainError("hodge: degenerate volume form");
  AltForm out(n - k);
  auto idx = multi_index::list(k);
  // For each increasing I within the chart: dx^I ^ (star a) = <dx^I, a> vol.
  for (size_t r = 0; r < idx.size(); ++r) {
    std::span<const int> I(idx[r].data(), static_cast<size_t>(k));
    bool in_chart = true;
    for (int p = 0; p < k; ++p)
      if (I[static_cast<size_t>(p)] >= n) in_chart = false;
    if (!in_chart) continue;
    // <dx^I, a>
    double ip = 0.0;
    for (int q = 0; q < a.size(); ++q) {
      if (a[q] == 0.0) continue;
      std::span<const int> J(idx[static_cast<size_t>(q)].data(), static_cast<size_t>(k));
      ip += a[q] * minor_det(m.ginv, I, J);
    }
    if (ip == 0.0) continue;
    // complement of I within {0..n-1}
    std::array<int, 7> comp{};
    int nc = 0;
    int maskI = 0;
    for (int p = 0; p < k; ++p) maskI |= 1 << I[static_cast<size_t>(p)];
    for (int i = 0; i < n; ++i)
      if (!(maskI & (1 << i))) comp[static_cast<size_t>(nc++)] = i;
    int mr = -1;
    int s = multi_index::merge_sign(I, std::span<const int>(comp.data(), static_cast<size_t>(nc)),
                                    &mr, n);
    // dx^I ^ dx^comp = s * dx^{0..n-1}; so (star a)_comp * s = ip * volc
    out[multi_index::rank(n - k, std::span<const int>(comp.data(), static_cast<size_t>(nc)))] +=
        ip * volc * s;
  }
  return out;
}

MetricAt metric_from_three_form(const AltForm& phi) {
  if (phi.degree() != 3) throw DomainError("metric_from_three_form: need a 3-form");
  Eigen::Matrix<double, 7, 7> B;
  std::array<AltForm, 7> iphi = {AltForm(2), AltForm(2), AltForm(2), AltForm(2),
                                 AltForm(2), AltForm(2), AltForm(2)};
  for (int i = 0; i < 7; ++i) {
    TangentVector e;
    e[i] = 1.0;
    iphi[static_cast<size_t>(i)] = interior(e, phi);
  }
  for (int i = 0; i < 7; ++i) {
    for (int j = i; j < 7; ++j) {
      AltForm w = wedge(wedge(iphi[static_cast<size_t>(i)], iphi[static_cast<size_t>(j)]), phi);
      B(i, j) = w[0];  // coefficient on dx^{0..6}
      B(j, i) = w[0];
    }
  }
  double detB = B.determinant();
  if (detB == 0.0)
    throw DomainError("metric_from_three_form: 3-form is not definite");
  // det B = (-6)^7 volc^9, so the real ninth root keeps the chart orientation
  double volc = std::copysign(std::pow(std::abs(detB), 1.0 / 9.0) /
                                  std::pow(6.0, 7.0 / 9.0),
                              -detB);
  Eigen::MatrixXd g = B / (-6.0 * volc);
  AltForm vol(7);
  vol[0] = volc;
  MetricAt m;
  try {
    m = MetricAt::from_matrix(g, vol);
  } catch (const DomainError&) {
    throw DomainError("metric_from_three_form: induced metric not positive definite");
  }
  return m;
}

TangentVector cross(const MetricAt& m, const AltForm& phi,
                    const TangentVector& x, const TangentVector& y) {
  AltForm one = contract2(phi, x, y);
  return sharp(m, one);
}

TangentVector sharp(const MetricAt& m, const AltForm& one_form) {
  if (one_form.degree() != 1) throw DomainError("sharp: need a 1-form");
  Eigen::VectorXd w(m.dim);
  for (int i = 0; i < m.dim; ++i) w(i) = one_form[i];
  Eigen::VectorXd v = m.ginv * w;
  TangentVector out;
  for (int i = 0; i < m.dim; ++i) out[i] = v(i);
  return out;
}

AltForm flat(const MetricAt& m, const TangentVector& x) {
  AltForm out(1);
  for (int i = 0; i < m.dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.dim; ++j) s += m.g(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

namespace {

AltForm normalized(const MetricAt& m, const AltForm& a, const char* what) {
  double n = form_norm(m, a);
  if (n < 1e-14) throw DomainError(std::string("adapted_coframe: vanishing ") + what);
  return a * (1.0 / n);
}

}  // namespace

AdaptedCoframe adapted_coframe(const AltForm& phi, const AltForm& h2,
                               const AltForm& h3, const AltForm& w0,
                               double tol) {
  MetricAt m = metric_from_three_form(phi);
  AltForm h2n = normalized(m, h2, "h2");
  AltForm h3n = normalized(m, h3, "h3");
  AltForm w0n = normalized(m, w0, "w0");
  // orthogonality preconditions
  if (std::abs(inner(m, h2n, h3n)) > tol || std::abs(inner(m, h2n, w0n)) > tol ||
      std::abs(inner(m, h3n, w0n)) > tol)
    throw DomainError("adapted_coframe: inputs not orthogonal");
  if (std::abs(eval3(phi, sharp(m, h2n), sharp(m, h3n), sharp(m, w0n))) > tol)
    throw DomainError("adapted_coframe: phi(h2#, h3#, w0#) != 0");

  AdaptedCoframe out{std::array<AltForm, 7>{AltForm(1), AltForm(1), AltForm(1), AltForm(1),
                                            AltForm(1), AltForm(1), AltForm(1)}};
  AltForm h1 = interior(sharp(m, h3n), interior(sharp(m, h2n), phi));
  out.forms[0] = normalized(m, h1, "h1");
  out.forms[1] = h2n;
  out.forms[2] = h3n;
  out.forms[3] = w0n;
  for (int k = 0; k < 3; ++k) {
    AltForm wk = interior(sharp(m, w0n), interior(sharp(m, out.forms[static_cast<size_t>(k)]), phi));
    out.forms[static_cast<size_t>(4 + k)] = normalized(m, wk, "wk");
  }
  return out;
}

OrbitCoframe orbit_coframe(const AltForm& phi, const AltForm& starphi,
                           const TangentVector& x1, const TangentVector& x2,
                           const TangentVector& x3) {
  Eigen::Matrix<double, 7, 3> X;
  for (int i = 0; i < 7; ++i) {
    X(i, 0) = x1[i];
    X(i, 1) = x2[i];
    X(i, 2) = x3[i];
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 7, 3>> svd(X);
  if (svd.singularValues()(2) < 1e-12 * svd.singularValues()(0))
    throw DomainError("orbit_coframe: vertical vectors are dependent");
  OrbitCoframe out{AltForm(1), AltForm(1), AltForm(1), AltForm(1)};
  out.h1 = contract2(phi, x2, x3);
  out.h2 = contract2(phi, x3, x1);
  out.h3 = contract2(phi, x1, x2);
  out.w0 = contract3(starphi, x1, x2, x3);
  return out;
}

AltForm canonical_phi(const std::array<AltForm, 7>& e) {
  const AltForm &h1 = e[0], &h2 = e[1], &h3 = e[2], &w0 = e[3], &w1 = e[4],
                &w2 = e[5], &w3 = e[6];
  AltForm phi = wedge(wedge(h1, h2), h3);
  phi += wedge(h1, wedge(w0, w1) - wedge(w2, w3));
  phi += wedge(h2, wedge(w0, w2) - wedge(w3, w1));
  phi += wedge(h3, wedge(w0, w3) - wedge(w1, w2));
  return phi;
}

AltForm canonical_starphi(const std::array<AltForm, 7>& e) {
  const AltForm &h1 = e[0], &h2 = e[1], &h3 = e[2], &w0 = e[3], &w1 = e[4],
                &w2 = e[5], &w3 = e[6];
  AltForm psi = wedge(wedge(w0, w1), wedge(w2, w3));
  psi -= wedge(wedge(h2, h3), wedge(w0, w1) - wedge(w2, w3));
  psi -= wedge(wedge(h3, h1), wedge(w0, w2) - wedge(w3, w1));
  psi -= wedge(wedge(h1, h2), wedge(w0, w3) - wedge(w1, w2));
  return psi;
}

AltForm phi_r7() {
  // coordinates (x1,x2,x3,y0,y1,y2,y3) -> indices 0..6
  AltForm phi = AltForm::basis({0, 1, 2});
  AltForm w1 = AltForm::basis({3, 4}) - AltForm::basis({5, 6});
  AltForm w2 = AltForm::basis({3, 5}) - AltForm::basis({6, 4});
  AltForm w3 = AltForm::basis({3, 6}) - AltForm::basis({4, 5});
  phi += wedge(AltForm::basis({0}), w1);
  phi += wedge(AltForm::basis({1}), w2);
  phi += wedge(AltForm::basis({2}), w3);
  return phi;
}

AltForm starphi_r7() {
  AltForm w1 = AltForm::basis({3, 4}) - AltForm::basis({5, 6});
  AltForm w2 = AltForm::basis({3, 5}) - AltForm::basis({6, 4});
  AltForm w3 = AltForm::basis({3, 6}) - AltForm::basis({4, 5});
  AltForm psi = AltForm::basis({3, 4, 5, 6});
  psi -= wedge(AltForm::basis({1, 2}), w1);
  psi -= wedge(AltForm::basis({2, 0}), w2);
  psi -= wedge(AltForm::basis({0, 1}), w3);
  return psi;
}

AltForm pullback(const Eigen::Matrix<double, 7, 7>& jac, const AltForm& a) {
  const int k = a.degree();
  if (k == 0) return a;
  AltForm out(k);
  auto idx = multi_index::list(k);
  for (int r = 0; r < out.size(); ++r) {
    std::span<const int> I(idx[static_cast<size_t>(r)].data(), static_cast<size_t>(k));
    double s = 0.0;
    for (int q = 0; q < a.size(); ++q) {
      if (a[q] == 0.0) continue;
      std::span<const int> J(idx[static_cast<size_t>(q)].data(), static_cast<size_t>(k));
      // det of jac[J, I]
      Eigen::MatrixXd msub(k, k);
      for (int rr = 0; rr < k; ++rr)
        for (int cc = 0; cc < k; ++cc)
          msub(rr, cc) = jac(J[static_cast<size_t>(rr)], I[static_cast<size_t>(cc)]);
      s += a[q] * msub.determinant();
    }
    out[r] = s;
  }
  return out;
}

HypersymplecticAt hypersymplectic_at(const AltForm& phi,
                                     const std::array<TangentVector, 4>& frame,
                                     const std::array<TangentVector, 3>& normals,
                                     const AltForm& vol4) {
  HypersymplecticAt out{{AltForm(2), AltForm(2), AltForm(2)}, Eigen::Matrix3d::Zero(), false};
  for (int k = 0; k < 3; ++k) {
    AltForm two = interior(normals[static_cast<size_t>(k)], phi);
    AltForm restricted(2);
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        AltForm c = interior(frame[static_cast<size_t>(j)], interior(frame[static_cast<size_t>(i)], two));
        const int ij[2] = {i, j};
        restricted.add_term(std::span<const int>(ij, 2), c[0]);
      }
    }
    out.omega[static_cast<size_t>(k)] = restricted;
  }
  std::array<int, 4> full = {0, 1, 2, 3};
  double volc = vol4.coeff(std::span<const int>(full.data(), 4));
  if (volc == 0.0) throw DomainError("hypersymplectic_at: degenerate volume");
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      AltForm w = wedge(out.omega[static_cast<size_t>(i)], out.omega[static_cast<size_t>(j)]);
      double q = w.coeff(std::span<const int>(full.data(), 4)) / (2.0 * volc);
      out.q(i, j) = q;
      out.q(j, i) = q;
    }
  }
  Eigen::LLT<Eigen::Matrix3d> llt(out.q);
  out.q_positive_definite = (llt.info() == Eigen::Success);
  return out;
}

}  // namespace g2fib
