#include "numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace rcc {

Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, const Vec& x,
             double t, double h) {
  require(h > 0, "rk4_step: step size must be positive");
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
  const Vec k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
  const Vec k4 = f(t + h, x + h * k3);
  Vec out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    std::ostringstream msg;
    msg << "integration diverged at t=" << t;
    throw DivergedError(t, msg.str());
  }
  return out;
}

namespace {

// |largest root| of mu^2 + a mu + b = 0 fitted to y2 + a y1 + b y0 ~ 0.
// Handles a dominant complex pair, where plain power iteration stalls.
double two_step_estimate(const Vec& y0, const Vec& y1, const Vec& y2) {
  Mat a(y0.size(), 2);
  a.col(0) = y1;
  a.col(1) = y0;
  Eigen::Vector2d coef = a.colPivHouseholderQr().solve(-y2);
  const double p = coef(0), q = coef(1);
  const double disc = p * p - 4.0 * q;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return std::max(std::abs((-p + r) / 2.0), std::abs((-p - r) / 2.0));
  }
  return std::sqrt(std::abs(q));  // complex pair: |mu|^2 = q
}

}  // namespace

double spectral_radius(const SpMat& w, double tol, int max_iter) {
  require(w.rows() == w.cols(), "spectral_radius: matrix must be square");
  const int n = static_cast<int>(w.rows());
  if (n == 0) return 0.0;

  Rng rng(0x5eed5eedULL);
  const int max_restarts = 4;
  for (int restart = 0; restart < max_restarts; ++restart) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
    x.normalize();

    double est = 0.0, prev = -1.0;
    int stall = 0, stable = 0;
    for (int it = 0; it < max_iter; ++it) {
      Vec y = w * x;
      const double norm = y.norm();
      if (norm == 0.0) break;  // nilpotent direction; restart or report 0
      est = norm;
      if (prev > 0.0 && std::abs(est - prev) <= tol * est) {
        if (++stable >= 3) return est;  // settled on a real dominant eigenvalue
      } else {
        stable = 0;
      }
      // oscillating norm ratios indicate a complex pair; try the
      // two-step estimate once the oscillation is persistent
      if (prev > 0.0 && std::abs(est - prev) > tol * est) {
        ++stall;
        if (stall >= 64) {
          Vec y1 = w * x;
          Vec y2 = w * y1;
          const double r = two_step_estimate(x, y1, y2);
          // confirm: run a few more two-step refinements
          Vec z = y2.normalized();
          Vec z1 = w * z;
          Vec z2 = w * z1;
          const double r2 = two_step_estimate(z, z1, z2);
          if (std::abs(r - r2) <= 10 * tol * std::max(r, r2)) return r2;
          stall = 0;
        }
      } else {
        stall = 0;
      }
      prev = est;
      x = y / norm;
    }
    if (est > 0.0) return est;  // ran out of iterations: best estimate
  }
  return 0.0;
}

namespace {

Mat solve_normal(const Mat& g, const Mat& vut, double beta) {
  const int n = static_cast<int>(g.rows());
  Mat shifted = g;
  shifted.diagonal().array() += beta * beta;
  Eigen::LLT<Mat> llt(shifted);
  if (llt.info() == Eigen::Success) {
    return llt.solve(vut.transpose()).transpose();
  }
  if (beta == 0.0) {
    // diagnose rank for the error message
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double cut = std::max(lmax, 1.0) * n * 1e-14;
    int null_dim = 0;
    for (int i = 0; i < n; ++i)
      if (es.eigenvalues()(i) <= cut) ++null_dim;
    std::ostringstream msg;
    msg << "ridge_solve: singular system with beta=0 (null dimension "
        << null_dim << " of " << n << ")";
    throw Error(ErrorCode::RankDeficient, msg.str());
  }
  Eigen::LDLT<Mat> ldlt(shifted);
  require(ldlt.info() == Eigen::Success, "ridge_solve: factorization failed",
          ErrorCode::Internal);
  return ldlt.solve(vut.transpose()).transpose();
}

}  // namespace

Mat ridge_solve(const Mat& u, const Mat& vd, double beta) {
  require(u.cols() == vd.cols(),
          "ridge_solve: U and Vd must have the same number of samples");
  require(u.cols() >= 1, "ridge_solve: need at least one sample");
  require(beta >= 0.0, "ridge_solve: beta must be non-negative");
  Mat g = Mat::Zero(u.rows(), u.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(u);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  Mat vut = vd * u.transpose();
  // beta == 0 with an exactly singular Gram can still pass LLT by luck of
  // rounding; check rank explicitly in that case
  if (beta == 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    const int n = static_cast<int>(g.rows());
    int null_dim = 0;
    for (int i = 0; i < n; ++i)
      if (es.eigenvalues()(i) <= std::max(lmax, 1.0) * n * 1e-14) ++null_dim;
    if (null_dim > 0) {
      std::ostringstream msg;
      msg << "ridge_solve: singular system with beta=0 (null dimension "
          << null_dim << " of " << n << ")";
      throw Error(ErrorCode::RankDeficient, msg.str());
    }
  }
  return solve_normal(g, vut, beta);
}

Mat ridge_solve_gram(const Mat& uut, const Mat& vut, double beta) {
  require(uut.rows() == uut.cols(), "ridge_solve_gram: U U^T must be square");
  require(vut.cols() == uut.rows(), "ridge_solve_gram: dimension mismatch");
  return solve_normal(uut, vut, beta);
}

GramAccumulator::GramAccumulator(int state_dim, int target_dim, int block)
    : uut_(Mat::Zero(state_dim, state_dim)),
      vut_(Mat::Zero(target_dim, state_dim)),
      ubuf_(state_dim, block),
      vbuf_(target_dim, block) {}

void GramAccumulator::add(const Vec& u, const Vec& v, double weight) {
  const double s = std::sqrt(weight);
  ubuf_.col(fill_) = s * u;
  vbuf_.col(fill_) = s * v;
  ++fill_;
  ++count_;
  if (fill_ == ubuf_.cols()) flush();
}

void GramAccumulator::flush() {
  if (fill_ == 0) return;
  const auto ub = ubuf_.leftCols(fill_);
  uut_.selfadjointView<Eigen::Lower>().rankUpdate(ub);
  vut_.noalias() += vbuf_.leftCols(fill_) * ub.transpose();
  fill_ = 0;
  uut_.triangularView<Eigen::StrictlyUpper>() = uut_.transpose();
}

}  // namespace rcc
