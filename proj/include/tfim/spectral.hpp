#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "tfim/geometry.hpp"

namespace tfim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact diagonalisation of H = -λ Σ σ³σ³ - δ Σ σ¹ - γ Σ σ³, using
// σ¹ = diag(1,-1) and σ³ = [[0,1],[1,0]]. Basis bit x = 0 is the
// σ¹ = +1 state. Spatially wired boxes carry the field -λ n_ext(x) σ³_x of the
// frozen exterior.
class SpectralModel {
 public:
  SpectralModel(const Box& box, EdgeMode mode, double lambda, double delta, double gamma = 0.0,
                std::size_t cap = 4096);

  std::size_t n_sites() const { return n_; }
  std::size_t dim() const { return dim_; }
  const Box& box() const { return box_; }
  EdgeMode mode() const { return mode_; }
  double lambda() const { return lambda_; }
  double delta() const { return delta_; }

  const Eigen::VectorXd& energies() const { return E_; }  // sorted, raw
  double ground_energy() const { return E_(0); }
  const Eigen::MatrixXd& vectors() const { return V_; }
  const Eigen::MatrixXd& hamiltonian() const { return H_; }
  std::size_t ground_degeneracy(double tol = 1e-10) const;
  double gap() const { return E_(1) - E_(0); }

  double hermiticity_residue() const;
  double reconstruction_error() const;

  // σ³_x in the eigenbasis, computed on first use
  const Eigen::MatrixXd& sigma3_eig(std::size_t site) const;

  // single-site operators in the computational basis
  Eigen::MatrixXd sigma1_op(std::size_t site) const;
  Eigen::MatrixXd sigma3_op(std::size_t site) const;

  // tr(Q e^{-βH}) / tr(e^{-βH}); β = kInf averages the ground space
  double thermal_expectation(const Eigen::MatrixXd& Q, double beta) const;

  // ⟨Π σ(x,t)⟩ on K(N,r) with time boundary f, w (boundary vectors) or p (trace)
  double correlation(const std::vector<STPoint>& A, double r, BC time) const;

  // tr(e^{-(β-u)H} σ³_y e^{-uH} σ³_x)/Z with u = t - s in [0, β]; β = kInf gives
  // the ground-state form for any real u
  double schwinger(std::size_t x, std::size_t y, double s, double t, double beta) const;

  // ∫_{I_β} ⟨σ(x,0) σ(y,t)⟩ dt, analytic per eigenpair
  double schwinger_time_integral(std::size_t x, std::size_t y, double beta) const;

 private:
  Box box_;
  EdgeMode mode_;
  double lambda_, delta_, gamma_;
  std::size_t n_, dim_;
  Eigen::MatrixXd H_, V_;
  Eigen::VectorXd E_;
  mutable std::vector<std::unique_ptr<Eigen::MatrixXd>> s3_;
  mutable std::mutex mu_;

  Eigen::VectorXd boundary_vector(BC time) const;  // eigenbasis
};

double E_function(const std::vector<double>& p, double q, double lambda, double delta);

struct FourierTable {
  std::vector<std::vector<double>> k;
  std::vector<double> ell;
  // c_hat[ik][il], real part; imag residue tracked separately
  std::vector<std::vector<double>> c_hat;
  double max_imag = 0;
  double beta = 0;
};

// ĉ(k,ℓ) for all k in (π/N)Λ_N and |ℓ| ≤ l_max; model must be periodic, even-side
FourierTable schwinger_fourier(const SpectralModel& m, double beta, double l_max);
// single entry
std::complex<double> c_hat_entry(const SpectralModel& m, const std::vector<double>& k, double ell, double beta);

// inverse transform at (x,t) with the asymptotic 1/ℓ^p tail summed in closed form
double fourier_inverse(const SpectralModel& m, std::size_t x, double t, double beta, double l_max, int tail_order = 8);

struct IRBPoint {
  std::vector<double> k;
  double ell, c_hat, bound, slack;
};

struct IRBReport {
  std::vector<IRBPoint> points;
  double worst_slack = kInf;
  IRBPoint worst;
  double max_imag = 0;
  bool passed = false;
  // ℓ²·ĉ and ℓ²/E at the largest |ℓ| for k = 0 (both approach constants)
  double tail_chat_l2 = 0, tail_bound_l2 = 0;
};

IRBReport irb_check(const SpectralModel& m, double beta, double l_max, double tol = 1e-9);

// finite-volume susceptibility Σ_x ∫ c(x,t) dt by direct quadrature of the Schwinger function
double susceptibility_quadrature(const SpectralModel& m, double beta);

// Σ_{x,y} ∫∫ v v̄ c  versus  (1/((2N)^d r)) Σ_ξ ĉ |z_v|², v piecewise constant on
// n_cells equal time cells; v is indexed [site][cell]
struct QuadFormReport {
  double lhs = 0, rhs = 0, rhs_tail_bound = 0;
};
QuadFormReport quadratic_form_identity(const SpectralModel& m, double beta,
                                       const std::vector<std::vector<std::complex<double>>>& v, int m_max);

// (1/|Λ_n|) Σ_{x∈Λ_n} ∫_{I_β} ⟨σ(0,0)σ(x,t)⟩^{f,p} dt
double box_average(const SpectralModel& m, int n, double beta);
// (1/(|Λ_n| r)) Σ_{x∈Λ_n} ∫_{I_r} ⟨σ(0,0)σ(x,t)⟩^{f,f}_{N,r} dt, r = 2N proxy
double box_average_ground(const SpectralModel& m, int n, double r);

// G functions. dual-lattice sum is exact in ℓ (closed form).
double G_finite(const std::vector<int>& x, double s, const std::vector<int>& y, double t, double lambda, double delta,
                int N, double r);
// Σ_{ℓ ∈ (2π/r)Z} e^{-iℓu}/(b²+ℓ²), ℓ = 0 dropped when b = 0
double ell_sum(double b, double u, double r);

struct QuadResult {
  double value = 0, error = 0;
};
// continuum forms; throw std::runtime_error for divergent dimensions
QuadResult G_beta(const std::vector<int>& z, double u, double lambda, double delta, double beta);
QuadResult G_infinity(const std::vector<int>& z, double u, double lambda, double delta);

struct IntegrabilityReport {
  int d = 1;
  bool finite_beta = true;
  std::vector<double> eps, shell;  // shell contributions for ε, ε/2, ...
  double ratio = 0;                // last shell ratio I(ε/2)/I(ε)
  bool converges = false;
};
// ∫_{(-π,π]^d} Σ_ℓ 1/E (β < ∞) or ∫ dp ∫ dq 1/E (β = ∞) near p = 0
IntegrabilityReport integrability_probe(int d, double lambda, double delta, double beta, int levels = 6);

struct GapCrossing {
  int L1, L2;
  double lambda;
};
// λ where L·gap of periodic rings (at most 12 sites) of sizes L1, L2 cross (δ fixed)
double ring_gap(int L, double lambda, double delta);
GapCrossing gap_crossing(int L1, int L2, double delta, double lo, double hi, double tol = 1e-6);

}  // namespace tfim
