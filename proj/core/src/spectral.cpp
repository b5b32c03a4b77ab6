#include "specreg/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace specreg {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

SpectralOperator SpectralOperator::from_svd(Eigen::MatrixXd u_basis,
                                            Eigen::VectorXd sigma_phys,
                                            Eigen::MatrixXd v_basis) {
  const Eigen::Index p = sigma_phys.size();
  require(p > 0, "SpectralOperator: empty spectrum");
  require(u_basis.cols() == p && v_basis.cols() == p,
          "SpectralOperator: basis/spectrum size mismatch");
  require((sigma_phys.array() > 0.0).all(),
          "SpectralOperator: singular values must be positive");
  for (Eigen::Index i = 1; i < p; ++i)
    require(sigma_phys(i) <= sigma_phys(i - 1),
            "SpectralOperator: singular values must be non-increasing");

  SpectralOperator op;
  op.norm_scale_ = sigma_phys(0);
  op.sigma_ = sigma_phys / op.norm_scale_;
  op.sigma_(0) = 1.0;  // exact after normalization
  op.u_ = std::move(u_basis);
  op.v_ = std::move(v_basis);
  return op;
}

SpectralVector SpectralOperator::to_u_coeffs(const Eigen::VectorXd& y) const {
  require(y.size() == rows(), "to_u_coeffs: dimension mismatch");
  return {u_.transpose() * y, Basis::u};
}

SpectralVector SpectralOperator::to_v_coeffs(const Eigen::VectorXd& x) const {
  require(x.size() == cols(), "to_v_coeffs: dimension mismatch");
  return {v_.transpose() * x, Basis::v};
}

Eigen::VectorXd SpectralOperator::from_u_coeffs(const SpectralVector& c) const {
  require(c.basis == Basis::u && c.coeffs.size() == rank(),
          "from_u_coeffs: wrong basis or length");
  return u_ * c.coeffs;
}

Eigen::VectorXd SpectralOperator::from_v_coeffs(const SpectralVector& c) const {
  require(c.basis == Basis::v && c.coeffs.size() == rank(),
          "from_v_coeffs: wrong basis or length");
  return v_ * c.coeffs;
}

double SpectralOperator::orthonormality_defect() const {
  const Eigen::Index p = rank();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
  const double du = (u_.transpose() * u_ - eye).cwiseAbs().maxCoeff();
  const double dv = (v_.transpose() * v_ - eye).cwiseAbs().maxCoeff();
  return std::max(du, dv);
}

SpectralOperator decompose(const Eigen::MatrixXd& matrix, double rel_cutoff) {
  require(matrix.size() > 0, "decompose: empty matrix");
  require(matrix.allFinite(), "decompose: matrix has non-finite entries");
  require(rel_cutoff >= 0.0 && rel_cutoff < 1.0,
          "decompose: rel_cutoff must lie in [0, 1)");

  Eigen::MatrixXd u, v;
  Eigen::VectorXd sigma;

  const bool symmetric =
      matrix.rows() == matrix.cols() && matrix == matrix.transpose();
  if (symmetric) {
    // For A = A^T the SVD follows from the eigendecomposition:
    // sigma = |lambda|, u = sign(lambda) * q, v = q.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
    require(es.info() == Eigen::Success, "decompose: eigensolver failed");
    const Eigen::Index n = matrix.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Eigen::VectorXd& lam = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return std::abs(lam(a)) > std::abs(lam(b));
                     });
    sigma.resize(n);
    u.resize(n, n);
    v.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index j = order[static_cast<std::size_t>(k)];
      sigma(k) = std::abs(lam(j));
      v.col(k) = es.eigenvectors().col(j);
      u.col(k) = lam(j) < 0.0 ? (-es.eigenvectors().col(j)).eval()
                              : es.eigenvectors().col(j);
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma = svd.singularValues();
    u = svd.matrixU();
    v = svd.matrixV();
  }

  const double sigma1 = sigma.size() > 0 ? sigma(0) : 0.0;
  require(sigma1 > 0.0, "decompose: rank zero");

  Eigen::Index p = 0;
  while (p < sigma.size() && sigma(p) > rel_cutoff * sigma1) ++p;
  require(p > 0, "decompose: rank zero");

  return SpectralOperator::from_svd(u.leftCols(p), sigma.head(p),
                                    v.leftCols(p));
}

Eigen::VectorXd apply(const SpectralOperator& op, const Eigen::VectorXd& x,
                      Units units) {
  require(x.size() == op.cols(), "apply: dimension mismatch");
  Eigen::VectorXd c = op.sigma().cwiseProduct(op.v_basis().transpose() * x);
  if (units == Units::physical) c *= op.norm_scale();
  return op.u_basis() * c;
}

Eigen::VectorXd apply_adjoint(const SpectralOperator& op,
                              const Eigen::VectorXd& y, Units units) {
  require(y.size() == op.rows(), "apply_adjoint: dimension mismatch");
  Eigen::VectorXd c = op.sigma().cwiseProduct(op.u_basis().transpose() * y);
  if (units == Units::physical) c *= op.norm_scale();
  return op.v_basis() * c;
}

Eigen::VectorXd fractional_power_apply(const SpectralOperator& op,
                                       double exponent,
                                       const Eigen::VectorXd& x) {
  require(std::isfinite(exponent), "fractional_power_apply: exponent not finite");
  require(exponent >= 0.0, "fractional_power_apply: negative exponent");
  require(x.size() == op.cols(), "fractional_power_apply: dimension mismatch");

  Eigen::VectorXd c = op.v_basis().transpose() * x;
  if (exponent != 0.0) {
    for (Eigen::Index m = 0; m < c.size(); ++m) {
      // exp(p * log(sigma^2)); underflows to a clean 0 for huge exponents.
      c(m) *= std::exp(2.0 * exponent * std::log(op.sigma()(m)));
    }
  }
  return op.v_basis() * c;
}

Eigen::VectorXd make_source_solution(const SpectralOperator& op,
                                     const SourceCondition& sc,
                                     const SpectralVector& omega_coeffs,
                                     bool rescale) {
  require(sc.nu >= 0.0, "make_source_solution: nu must be >= 0");
  require(sc.rho > 0.0, "make_source_solution: rho must be positive");
  require(omega_coeffs.basis == Basis::v &&
              omega_coeffs.coeffs.size() == op.rank(),
          "make_source_solution: omega must be v-basis coefficients");

  Eigen::VectorXd omega = omega_coeffs.coeffs;
  const double norm = omega.norm();
  if (norm > sc.rho) {
    require(rescale, "make_source_solution: ||omega|| exceeds rho");
    omega *= sc.rho / norm;
  }

  Eigen::VectorXd c(op.rank());
  for (Eigen::Index m = 0; m < c.size(); ++m) {
    const double s = op.sigma()(m);
    c(m) = (sc.nu == 0.0 ? 1.0 : std::exp(sc.nu * std::log(s))) * omega(m);
  }
  return op.v_basis() * c;
}

}  // namespace specreg
