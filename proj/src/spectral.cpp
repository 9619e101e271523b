#include "tfim/spectral.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace tfim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

SpectralModel::SpectralModel(const Box& box, EdgeMode mode, double lambda, double delta, double gamma,
                             std::size_t cap)
    : box_(box), mode_(mode), lambda_(lambda), delta_(delta), gamma_(gamma) {
  if (lambda < 0 || delta < 0 || gamma < 0) throw std::invalid_argument("parameters must be nonnegative");
  n_ = box.size();
  if (n_ >= 63 || (std::size_t{1} << n_) > cap)
    throw std::length_error("Hilbert space dimension 2^" + std::to_string(n_) + " exceeds cap " +
                            std::to_string(cap));
  dim_ = std::size_t{1} << n_;
  EdgeSet es(box, mode == EdgeMode::periodic ? EdgeMode::periodic : EdgeMode::free);
  std::vector<double> hx(n_, gamma);
  if (mode == EdgeMode::wired)
    for (std::size_t x = 0; x < n_; ++x) hx[x] += lambda * box.exterior_neighbours(x);

  H_ = MatrixXd::Zero(dim_, dim_);
  for (std::size_t b = 0; b < dim_; ++b) {
    double diag = 0;
    for (std::size_t x = 0; x < n_; ++x) diag -= delta * (((b >> x) & 1) ? -1.0 : 1.0);
    H_(b, b) = diag;
    for (const auto& e : es.edges) H_(b ^ (std::size_t{1} << e.a) ^ (std::size_t{1} << e.b), b) -= lambda;
    for (std::size_t x = 0; x < n_; ++x)
      if (hx[x] != 0) H_(b ^ (std::size_t{1} << x), b) -= hx[x];
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_(H_);
  if (es_.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  E_ = es_.eigenvalues();
  V_ = es_.eigenvectors();
  s3_.resize(n_);
}

std::size_t SpectralModel::ground_degeneracy(double tol) const {
  std::size_t g = 1;
  while (g < dim_ && E_(g) - E_(0) < tol) ++g;
  return g;
}

double SpectralModel::hermiticity_residue() const { return (H_ - H_.transpose()).cwiseAbs().maxCoeff(); }

double SpectralModel::reconstruction_error() const {
  MatrixXd R = V_ * E_.asDiagonal() * V_.transpose() - H_;
  return R.cwiseAbs().maxCoeff();
}

const MatrixXd& SpectralModel::sigma3_eig(std::size_t site) const {
  if (site >= n_) throw std::out_of_range("site index");
  std::lock_guard<std::mutex> lk(mu_);
  if (!s3_[site]) {
    MatrixXd PV(dim_, dim_);
    const std::size_t bit = std::size_t{1} << site;
    for (std::size_t b = 0; b < dim_; ++b) PV.row(b) = V_.row(b ^ bit);
    s3_[site] = std::make_unique<MatrixXd>(V_.transpose() * PV);
  }
  return *s3_[site];
}

MatrixXd SpectralModel::sigma1_op(std::size_t site) const {
  MatrixXd S = MatrixXd::Zero(dim_, dim_);
  for (std::size_t b = 0; b < dim_; ++b) S(b, b) = ((b >> site) & 1) ? -1.0 : 1.0;
  return S;
}

MatrixXd SpectralModel::sigma3_op(std::size_t site) const {
  MatrixXd S = MatrixXd::Zero(dim_, dim_);
  const std::size_t bit = std::size_t{1} << site;
  for (std::size_t b = 0; b < dim_; ++b) S(b ^ bit, b) = 1.0;
  return S;
}

double SpectralModel::thermal_expectation(const MatrixXd& Q, double beta) const {
  MatrixXd Qe = V_.transpose() * Q * V_;
  if (std::isinf(beta)) {
    const std::size_t g = ground_degeneracy();
    double s = 0;
    for (std::size_t i = 0; i < g; ++i) s += Qe(i, i);
    return s / static_cast<double>(g);
  }
  double num = 0, z = 0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double w = std::exp(-beta * (E_(i) - E_(0)));
    num += w * Qe(i, i);
    z += w;
  }
  return num / z;
}

VectorXd SpectralModel::boundary_vector(BC time) const {
  VectorXd v(dim_);
  if (time == BC::f) {
    // sum over both σ³ values: ⊗(1,0)
    v.setZero();
    v(0) = 1.0;
  } else {
    // σ³ = +1 eigenvector on every site
    v.setConstant(std::pow(2.0, -0.5 * static_cast<double>(n_)));
  }
  return V_.transpose() * v;
}

double SpectralModel::correlation(const std::vector<STPoint>& A, double r, BC time) const {
  std::vector<STPoint> P = A;
  std::stable_sort(P.begin(), P.end(), [](const STPoint& a, const STPoint& b) { return a.t < b.t; });
  for (const auto& p : P)
    if (p.t < -0.5 * r || p.t > 0.5 * r) throw std::domain_error("time outside I_r");
  VectorXd e = E_.array() - E_(0);
  auto prop = [&](double tau) { return (-tau * e.array()).exp().matrix(); };
  if (time != BC::p) {
    VectorXd c = boundary_vector(time);
    VectorXd u = prop(P.empty() ? r : P.front().t + 0.5 * r).cwiseProduct(c);
    for (std::size_t i = 0; i < P.size(); ++i) {
      u = sigma3_eig(P[i].site) * u;
      double next = i + 1 < P.size() ? P[i + 1].t : 0.5 * r;
      u = prop(next - P[i].t).cwiseProduct(u);
    }
    double num = c.dot(u);
    double den = c.dot(prop(r).cwiseProduct(c));
    return num / den;
  }
  // trace; the two-point case avoids dense products
  VectorXd z = prop(r);
  if (P.empty()) return 1.0;
  if (P.size() == 1) return 0.0 * z(0) + (z.cwiseProduct(sigma3_eig(P[0].site).diagonal())).sum() / z.sum();
  MatrixXd M = prop(P.front().t + 0.5 * r).asDiagonal();
  for (std::size_t i = 0; i < P.size(); ++i) {
    M = sigma3_eig(P[i].site) * M;
    double next = i + 1 < P.size() ? P[i + 1].t : 0.5 * r;
    M = prop(next - P[i].t).asDiagonal() * M;
  }
  return M.trace() / z.sum();
}

double SpectralModel::schwinger(std::size_t x, std::size_t y, double s, double t, double beta) const {
  const MatrixXd& Ax = sigma3_eig(x);
  const MatrixXd& Ay = sigma3_eig(y);
  VectorXd e = E_.array() - E_(0);
  double u = t - s;
  if (std::isinf(beta)) {
    const std::size_t g = ground_degeneracy();
    double au = std::abs(u), acc = 0;
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t n = 0; n < dim_; ++n) acc += std::exp(-au * e(n)) * Ay(i, n) * Ax(n, i);
    return acc / static_cast<double>(g);
  }
  u = std::fmod(u, beta);
  if (u < 0) u += beta;
  double acc = 0, z = 0;
  for (std::size_t m = 0; m < dim_; ++m) {
    z += std::exp(-beta * e(m));
    for (std::size_t n = 0; n < dim_; ++n) {
      double w = Ay(m, n) * Ax(n, m);
      if (w != 0) acc += w * std::exp(-(beta - u) * e(m) - u * e(n));
    }
  }
  return acc / z;
}

namespace {

// ∫_0^β e^{-(β-u)E_m - u E_n} du, energies shifted to be ≥ 0
inline double pair_integral(double em, double en, double beta) {
  double lo = std::min(em, en), a = std::abs(em - en);
  if (a * beta < 1e-12) return beta * std::exp(-beta * lo);
  return std::exp(-beta * lo) * (-std::expm1(-beta * a)) / a;
}

double bernoulli_number(int k) {
  if (k == 0) return 1.0;
  if (k == 1) return -0.5;
  if (k % 2) return 0.0;
  return boost::math::bernoulli_b2n<double>(k / 2);
}

double bernoulli_poly(int p, double x) {
  double s = 0;
  for (int k = 0; k <= p; ++k)
    s += boost::math::binomial_coefficient<double>(p, k) * bernoulli_number(k) * std::pow(x, p - k);
  return s;
}

// Σ_{ℓ ∈ (2π/r)Z, ℓ≠0} e^{-iℓt}/(iℓ)^p = -r^p B_p({-t/r})/p!
double periodic_power_sum(int p, double t, double r) {
  double x = -t / r;
  x -= std::floor(x);
  if (p == 1 && (x < 1e-15 || x > 1 - 1e-15)) return 0.0;
  return -std::pow(r, p) * bernoulli_poly(p, x) / std::tgamma(p + 1.0);
}

struct PairData {
  std::vector<double> a, D, lo_int;  // a = E_m - E_n, D = e^{-βE_n} - e^{-βE_m}, ∫ at ℓ = 0
  std::vector<cd> W;                  // Σ_x e^{ikx} (A_x)_{mn} (A_0)_{nm} / Z
};

std::vector<std::size_t> site_list(const SpectralModel& m) {
  std::vector<std::size_t> s(m.n_sites());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
  return s;
}

PairData pair_data(const SpectralModel& m, const std::vector<double>& k, double beta) {
  const std::size_t D = m.dim();
  const Box& box = m.box();
  VectorXd e = m.energies().array() - m.ground_energy();
  double z = 0;
  for (std::size_t i = 0; i < D; ++i) z += std::exp(-beta * e(i));
  const std::size_t o = box.origin();
  const MatrixXd& A0 = m.sigma3_eig(o);
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(D, D);
  for (std::size_t x : site_list(m)) {
    auto c = box.coords(x);
    double ph = 0;
    for (std::size_t j = 0; j < c.size(); ++j) ph += k[j] * c[j];
    B += std::polar(1.0, ph) * m.sigma3_eig(x).cast<cd>();
  }
  PairData P;
  P.a.resize(D * D);
  P.D.resize(D * D);
  P.lo_int.resize(D * D);
  P.W.resize(D * D);
  for (std::size_t mm = 0; mm < D; ++mm)
    for (std::size_t n = 0; n < D; ++n) {
      std::size_t i = mm * D + n;
      P.W[i] = B(mm, n) * A0(n, mm) / z;
      P.a[i] = e(mm) - e(n);
      P.D[i] = std::exp(-beta * e(n)) - std::exp(-beta * e(mm));
      P.lo_int[i] = pair_integral(e(mm), e(n), beta);
    }
  return P;
}

cd c_hat_from(const PairData& P, double ell) {
  cd s = 0;
  if (ell == 0) {
    for (std::size_t i = 0; i < P.W.size(); ++i) s += P.W[i] * P.lo_int[i];
    return s;
  }
  for (std::size_t i = 0; i < P.W.size(); ++i)
    if (P.W[i] != 0.0) s += P.W[i] * P.D[i] / cd(P.a[i], ell);
  return s;
}

void require_fourier_model(const SpectralModel& m) {
  if (m.mode() != EdgeMode::periodic || m.box().conv != BoxConvention::even_side)
    throw std::invalid_argument("Fourier sweep needs a spatially periodic even-side box");
}

}  // namespace

double SpectralModel::schwinger_time_integral(std::size_t x, std::size_t y, double beta) const {
  const MatrixXd& Ax = sigma3_eig(x);
  const MatrixXd& Ay = sigma3_eig(y);
  VectorXd e = E_.array() - E_(0);
  double acc = 0, z = 0;
  for (std::size_t m = 0; m < dim_; ++m) {
    z += std::exp(-beta * e(m));
    for (std::size_t n = 0; n < dim_; ++n) {
      double w = Ay(m, n) * Ax(n, m);
      if (w != 0) acc += w * pair_integral(e(m), e(n), beta);
    }
  }
  return acc / z;
}

double E_function(const std::vector<double>& p, double q, double lambda, double delta) {
  if (!(delta > 0)) throw std::domain_error("E needs delta > 0");
  bool zero = q == 0;
  for (double v : p) zero = zero && v == 0;
  if (zero) throw std::domain_error("E is singular at (p,q) = 0");
  return (2 * lambda * graph_laplacian_ft(p) + q * q / (2 * delta)) / 48.0;
}

std::complex<double> c_hat_entry(const SpectralModel& m, const std::vector<double>& k, double ell, double beta) {
  require_fourier_model(m);
  return c_hat_from(pair_data(m, k, beta), ell);
}

FourierTable schwinger_fourier(const SpectralModel& m, double beta, double l_max) {
  require_fourier_model(m);
  DualLattice dl(m.box(), beta, DualLattice::m_for_cutoff(beta, l_max));
  FourierTable T;
  T.beta = beta;
  T.k = dl.momenta();
  T.ell = dl.frequencies(true);
  for (const auto& k : T.k) {
    PairData P = pair_data(m, k, beta);
    std::vector<double> row;
    for (double l : T.ell) {
      cd v = c_hat_from(P, l);
      T.max_imag = std::max(T.max_imag, std::abs(v.imag()));
      row.push_back(v.real());
    }
    T.c_hat.push_back(std::move(row));
  }
  if (T.max_imag > 1e-9) throw std::runtime_error("c_hat has an imaginary residue above 1e-9");
  return T;
}

double fourier_inverse(const SpectralModel& m, std::size_t x, double t, double beta, double l_max, int tail_order) {
  require_fourier_model(m);
  const Box& box = m.box();
  DualLattice dl(box, beta, DualLattice::m_for_cutoff(beta, l_max));
  auto xc = box.coords(x);
  const double vol = static_cast<double>(box.size());
  cd total = 0;
  for (const auto& k : dl.momenta()) {
    PairData P = pair_data(m, k, beta);
    std::vector<cd> C(tail_order + 1, 0.0);
    for (std::size_t i = 0; i < P.W.size(); ++i) {
      if (P.W[i] == 0.0) continue;
      cd base = P.W[i] * P.D[i];
      double pw = 1;
      for (int p = 1; p <= tail_order; ++p) {
        C[p] += base * pw;
        pw *= -P.a[i];
      }
    }
    cd acc = c_hat_from(P, 0.0);
    for (double l : dl.frequencies(false)) {
      cd v = c_hat_from(P, l), asym = 0, il(0, l), ilp = il;
      for (int p = 1; p <= tail_order; ++p, ilp *= il) asym += C[p] / ilp;
      acc += (v - asym) * std::polar(1.0, -l * t);
    }
    for (int p = 1; p <= tail_order; ++p) acc += C[p] * periodic_power_sum(p, t, beta);
    double ph = 0;
    for (std::size_t j = 0; j < k.size(); ++j) ph += k[j] * xc[j];
    total += acc * std::polar(1.0, -ph);
  }
  return total.real() / (vol * beta);
}

IRBReport irb_check(const SpectralModel& m, double beta, double l_max, double tol) {
  FourierTable T = schwinger_fourier(m, beta, l_max);
  IRBReport R;
  R.max_imag = T.max_imag;
  for (std::size_t ik = 0; ik < T.k.size(); ++ik) {
    bool kzero = std::all_of(T.k[ik].begin(), T.k[ik].end(), [](double v) { return v == 0; });
    for (std::size_t il = 0; il < T.ell.size(); ++il) {
      double l = T.ell[il];
      if (kzero && l == 0) continue;
      double E = E_function(T.k[ik], l, m.lambda(), m.delta());
      double bound = E > 0 ? 1.0 / E : kInf;
      IRBPoint p{T.k[ik], l, T.c_hat[ik][il], bound, bound - T.c_hat[ik][il]};
      if (p.slack < R.worst_slack) {
        R.worst_slack = p.slack;
        R.worst = p;
      }
      R.points.push_back(std::move(p));
    }
    if (kzero) {
      double l = T.ell.back();
      R.tail_chat_l2 = T.c_hat[ik].back() * l * l;
      R.tail_bound_l2 = l * l / E_function(T.k[ik], l, m.lambda(), m.delta());
    }
  }
  R.passed = R.worst_slack >= -tol;
  return R;
}

double susceptibility_quadrature(const SpectralModel& m, double beta) {
  // smooth on (0, β); Gauss-Legendre over a few panels
  const std::size_t o = m.box().origin();
  double chi = 0;
  const int panels = 16;
  for (std::size_t x = 0; x < m.n_sites(); ++x)
    for (int p = 0; p < panels; ++p) {
      double a = beta * p / panels, b = beta * (p + 1) / panels;
      chi += boost::math::quadrature::gauss<double, 30>::integrate(
          [&](double t) { return m.schwinger(o, x, 0.0, t, beta); }, a, b);
    }
  return chi;
}

namespace {

double phi1(double x) {
  if (std::abs(x) < 1e-5) return 1 + x / 2 + x * x / 6;
  return std::expm1(x) / x;
}

double phi2(double x) {
  if (std::abs(x) < 0.5) {
    double s = 0, term = 0.5;  // x^k/(k+2)!
    for (int k = 0; k < 25; ++k) {
      s += term;
      term *= x / (k + 3);
    }
    return s;
  }
  return (std::expm1(x) - x) / (x * x);
}

// second antiderivative of u -> c(z, u) on (-β, β), c extended periodically
struct F2Kernel {
  std::vector<double> w, em, a;
  double beta;
  double F1p(double u) const {  // u in [0, β]
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::exp(-beta * em[i]) * u * phi1(u * a[i]);
    return s;
  }
  double F2p(double u) const {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::exp(-beta * em[i]) * u * u * phi2(u * a[i]);
    return s;
  }
  double operator()(double u) const {
    if (u >= 0) return F2p(u);
    return F2p(u + beta) - F2p(beta) - u * F1p(beta);
  }
};

}  // namespace

QuadFormReport quadratic_form_identity(const SpectralModel& m, double beta,
                                       const std::vector<std::vector<cd>>& v, int m_max) {
  require_fourier_model(m);
  const Box& box = m.box();
  const std::size_t ns = box.size(), D = m.dim();
  if (v.size() != ns) throw std::invalid_argument("v needs one row per site");
  const std::size_t nc = v[0].size();
  VectorXd e = m.energies().array() - m.ground_energy();
  double z = 0;
  for (std::size_t i = 0; i < D; ++i) z += std::exp(-beta * e(i));
  const std::size_t o = box.origin();
  const MatrixXd& A0 = m.sigma3_eig(o);
  const int L = box.side();

  // kernel per displacement z = x - y (periodic)
  std::vector<F2Kernel> K(ns);
  for (std::size_t zi = 0; zi < ns; ++zi) {
    const MatrixXd& Az = m.sigma3_eig(zi);
    F2Kernel k;
    k.beta = beta;
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = 0; b < D; ++b) {
        double w = Az(a, b) * A0(b, a) / z;
        if (w == 0) continue;
        k.w.push_back(w);
        k.em.push_back(e(a));
        k.a.push_back(e(a) - e(b));
      }
    K[zi] = std::move(k);
  }
  auto wrap = [&](int c) { return ((c - box.lo()) % L + L) % L + box.lo(); };
  const double h = beta / static_cast<double>(nc), t0 = -0.5 * beta;
  QuadFormReport R;
  cd lhs = 0;
  for (std::size_t x = 0; x < ns; ++x)
    for (std::size_t y = 0; y < ns; ++y) {
      auto cx = box.coords(x), cy = box.coords(y);
      std::vector<int> dz(cx.size());
      for (std::size_t j = 0; j < cx.size(); ++j) dz[j] = wrap(cx[j] - cy[j]);
      const F2Kernel& k = K[box.index(dz)];
      for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
          cd vv = v[x][i] * std::conj(v[y][j]);
          if (vv == 0.0) continue;
          double a = t0 + i * h, b = a + h, c = t0 + j * h, d = c + h;
          lhs += vv * (k(b - c) - k(a - c) - k(b - d) + k(a - d));
        }
    }
  R.lhs = lhs.real();

  DualLattice dl(box, beta, m_max);
  double rhs = 0, last = 0;
  for (const auto& kv : dl.momenta()) {
    PairData P = pair_data(m, kv, beta);
    for (int mm = -m_max; mm <= m_max; ++mm) {
      double l = 2 * kPi * mm / beta;
      cd zv = 0;
      for (std::size_t x = 0; x < ns; ++x) {
        auto cx = box.coords(x);
        double ph = 0;
        for (std::size_t j = 0; j < cx.size(); ++j) ph += kv[j] * cx[j];
        cd sx = 0;
        for (std::size_t i = 0; i < nc; ++i) {
          double a = t0 + i * h, b = a + h;
          cd cell = l == 0 ? cd(h, 0) : (std::polar(1.0, -l * b) - std::polar(1.0, -l * a)) / cd(0, -l);
          sx += v[x][i] * cell;
        }
        zv += std::polar(1.0, -ph) * sx;
      }
      double term = c_hat_from(P, l).real() * std::norm(zv);
      rhs += term;
      if (std::abs(mm) == m_max) last += term;
    }
  }
  const double norm = 1.0 / (static_cast<double>(ns) * beta);
  R.rhs = rhs * norm;
  // terms decay like ℓ^-4, so the tail is about (m_max/3) times the last pair
  R.rhs_tail_bound = std::abs(last) * norm * m_max / 3.0;
  return R;
}

double box_average(const SpectralModel& m, int n, double beta) {
  const Box& B = m.box();
  Box sub = B.with_n(n);
  const std::size_t o = B.origin();
  double s = 0;
  for (std::size_t i = 0; i < sub.size(); ++i) s += m.schwinger_time_integral(o, B.index(sub.coords(i)), beta);
  return s / static_cast<double>(sub.size());
}

double box_average_ground(const SpectralModel& m, int n, double r) {
  const Box& B = m.box();
  Box sub = B.with_n(n);
  const std::size_t o = B.origin();
  double s = 0;
  using GL = boost::math::quadrature::gauss<double, 30>;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    std::size_t x = B.index(sub.coords(i));
    auto f = [&](double t) { return m.correlation({{o, 0.0}, {x, t}}, r, BC::f); };
    const int panels = 8;
    for (int p = 0; p < panels; ++p) {
      double a = 0.5 * r * p / panels, b = 0.5 * r * (p + 1) / panels;
      s += GL::integrate(f, a, b) + GL::integrate(f, -b, -a);
    }
  }
  return s / (static_cast<double>(sub.size()) * r);
}

double ell_sum(double b, double u, double r) {
  double up = std::fmod(u, r);
  if (up < 0) up += r;
  if (b == 0) {
    double x = -u / r;
    x -= std::floor(x);
    return r * r * (x * x - x + 1.0 / 6.0) / 2.0;
  }
  // (r/2b) cosh(b(r/2 - u'))/sinh(br/2), written with decaying exponentials
  double num = std::exp(-b * up) + std::exp(-b * (r - up));
  double den = -std::expm1(-b * r);
  return r / (2 * b) * num / den;
}

double G_finite(const std::vector<int>& x, double s, const std::vector<int>& y, double t, double lambda, double delta,
                int N, double r) {
  Box box(static_cast<int>(x.size()), N, BoxConvention::even_side);
  DualLattice dl(box, r, 0);
  double acc = 0;
  for (const auto& k : dl.momenta()) {
    double ph = 0;
    for (std::size_t j = 0; j < k.size(); ++j) ph += k[j] * (x[j] - y[j]);
    double b = std::sqrt(4 * lambda * delta * graph_laplacian_ft(k));
    acc += std::cos(ph) * ell_sum(b, s - t, r);
  }
  return 96 * delta * acc / (static_cast<double>(box.size()) * r);
}

namespace {

// 2^d ∫_{[0,π]^d} Π cos(p_j z_j) f(p) dp by nested tanh-sinh
QuadResult cube_integral(const std::vector<int>& z, const std::function<double(const std::vector<double>&)>& f) {
  const int d = static_cast<int>(z.size());
  boost::math::quadrature::tanh_sinh<double> ts(10);
  std::vector<double> p(d);
  double err_top = 0;
  std::function<double(int)> level = [&](int j) -> double {
    auto g = [&](double pj) {
      p[j] = pj;
      double c = std::cos(pj * z[j]);
      return c * (j + 1 == d ? f(p) : level(j + 1));
    };
    double err = 0;
    double v = ts.integrate(g, 0.0, kPi, 1e-9, &err);
    if (j == 0) err_top = err;
    return v;
  };
  double v = level(0) * std::pow(2.0, d);
  return {v, err_top * std::pow(2.0, d)};
}

double lhat_from(const std::vector<double>& p) {
  double s = 0;
  for (double v : p) s += 1 - std::cos(v);
  return s;
}

}  // namespace

QuadResult G_beta(const std::vector<int>& z, double u, double lambda, double delta, double beta) {
  const int d = static_cast<int>(z.size());
  if (d < 3) throw std::runtime_error("G_beta diverges for d < 3 (1/E is not integrable at p = 0)");
  auto f = [&](const std::vector<double>& p) {
    double b = std::sqrt(4 * lambda * delta * lhat_from(p));
    return b == 0 ? 0.0 : ell_sum(b, u, beta);
  };
  QuadResult q = cube_integral(z, f);
  double c = 96 * delta / (std::pow(2 * kPi, d) * beta);
  return {q.value * c, q.error * c};
}

QuadResult G_infinity(const std::vector<int>& z, double u, double lambda, double delta) {
  const int d = static_cast<int>(z.size());
  if (d < 2) throw std::runtime_error("G_infinity diverges for d < 2 (1/E is not integrable at p = 0)");
  auto f = [&](const std::vector<double>& p) {
    double b = std::sqrt(4 * lambda * delta * lhat_from(p));
    return b == 0 ? 0.0 : kPi * std::exp(-b * std::abs(u)) / b;
  };
  QuadResult q = cube_integral(z, f);
  double c = 96 * delta / std::pow(2 * kPi, d + 1);
  return {q.value * c, q.error * c};
}

IntegrabilityReport integrability_probe(int d, double lambda, double delta, double beta, int levels) {
  IntegrabilityReport R;
  R.d = d;
  R.finite_beta = std::isfinite(beta);
  auto f = [&](const std::vector<double>& p) {
    double b = std::sqrt(4 * lambda * delta * lhat_from(p));
    if (R.finite_beta) return 96 * delta * ell_sum(b, 0.0, beta);
    return 96 * delta * kPi / b;
  };
  using GL = boost::math::quadrature::gauss<double, 10>;
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  // symmetric Gauss-Legendre nodes on [-1, 1]
  std::vector<double> nx, nw;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    nx.push_back(xs[i]);
    nw.push_back(ws[i]);
    if (xs[i] != 0) {
      nx.push_back(-xs[i]);
      nw.push_back(ws[i]);
    }
  }
  double eps = 0.5;
  for (int lv = 0; lv < levels; ++lv, eps *= 0.5) {
    const double lo[3] = {-2 * eps, -eps, eps};
    int ncell = 1;
    for (int j = 0; j < d; ++j) ncell *= 3;
    double shell = 0;
    for (int c = 0; c < ncell; ++c) {
      std::vector<int> idx(d);
      int cc = c;
      bool centre = true;
      for (int j = 0; j < d; ++j) {
        idx[j] = cc % 3;
        cc /= 3;
        centre = centre && idx[j] == 1;
      }
      if (centre) continue;
      // tensor product rule over this box
      std::size_t np = nx.size(), tot = 1;
      for (int j = 0; j < d; ++j) tot *= np;
      std::vector<double> p(d);
      for (std::size_t q = 0; q < tot; ++q) {
        std::size_t qq = q;
        double w = 1;
        for (int j = 0; j < d; ++j) {
          std::size_t k = qq % np;
          qq /= np;
          double a = lo[idx[j]], h = (idx[j] == 1 ? 2 * eps : eps);
          p[j] = a + 0.5 * h * (nx[k] + 1);
          w *= 0.5 * h * nw[k];
        }
        shell += w * f(p);
      }
    }
    R.eps.push_back(eps);
    R.shell.push_back(shell);
  }
  R.ratio = R.shell[R.shell.size() - 1] / R.shell[R.shell.size() - 2];
  R.converges = R.ratio < 0.75;
  return R;
}

double ring_gap(int L, double lambda, double delta) {
  if (L < 2) throw std::invalid_argument("ring needs at least 2 sites");
  Box b = (L % 2 == 0) ? Box(1, L / 2, BoxConvention::even_side) : Box(1, (L - 1) / 2);
  EdgeSet es(b, EdgeMode::periodic);
  const std::size_t n = b.size(), D = std::size_t{1} << n;
  if (n > 12) throw std::length_error("ring too large for dense diagonalisation");
  // σ³σ³ flips bits in pairs, so H splits by bit-count parity
  std::vector<double> low[2];
  for (int par = 0; par < 2; ++par) {
    std::vector<std::size_t> states, pos(D, SIZE_MAX);
    for (std::size_t s = 0; s < D; ++s)
      if ((std::popcount(s) & 1) == par) {
        pos[s] = states.size();
        states.push_back(s);
      }
    MatrixXd H = MatrixXd::Zero(states.size(), states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::size_t s = states[i];
      for (std::size_t x = 0; x < n; ++x) H(i, i) -= delta * (((s >> x) & 1) ? -1.0 : 1.0);
      for (const auto& e : es.edges) H(pos[s ^ (std::size_t{1} << e.a) ^ (std::size_t{1} << e.b)], i) -= lambda;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    low[par] = {solver.eigenvalues()(0), solver.eigenvalues()(1)};
  }
  std::vector<double> all{low[0][0], low[0][1], low[1][0], low[1][1]};
  std::sort(all.begin(), all.end());
  return all[1] - all[0];
}

GapCrossing gap_crossing(int L1, int L2, double delta, double lo, double hi, double tol) {
  auto f = [&](double l) { return L1 * ring_gap(L1, l, delta) - L2 * ring_gap(L2, l, delta); };
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0) throw std::runtime_error("L*gap curves do not cross in the bracket");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi), fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {L1, L2, 0.5 * (lo + hi)};
}

}  // namespace tfim
