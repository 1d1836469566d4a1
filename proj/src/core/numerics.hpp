#pragma once

#include <functional>

#include "rng.hpp"
#include "types.hpp"

namespace rcc {

// Classical 4th-order Runge-Kutta update for dx/dt = f(t, x).
// Throws DivergedError if the result is not finite.
Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, const Vec& x,
             double t, double h);

// Largest eigenvalue magnitude of a square sparse matrix, to relative
// tolerance `tol`. Power iteration; a stalled iteration (dominant complex
// pair) falls back to a two-step Krylov estimate. Zero/nilpotent matrices
// return 0.
double spectral_radius(const SpMat& w, double tol = 1e-6, int max_iter = 10000);

// Tikhonov-regularized least squares: minimize over W of
//   sum_t |v_d(t) - W u(t)|^2 + |beta W|^2,
// i.e. W = Vd U^T (U U^T + beta^2 I)^{-1}.  U is N x T (one state sample
// per column), Vd is l x T.  With beta == 0 a singular system raises
// RankDeficient naming the null-space dimension.
Mat ridge_solve(const Mat& u, const Mat& vd, double beta);

// Same solve from precomputed Gram matrices: uut = U U^T, vut = Vd U^T.
Mat ridge_solve_gram(const Mat& uut, const Mat& vut, double beta);

// Accumulates U U^T and V U^T incrementally without storing U.
// Columns are buffered and flushed through a rank-k update.
class GramAccumulator {
public:
  GramAccumulator(int state_dim, int target_dim, int block = 256);

  void add(const Vec& u, const Vec& v, double weight = 1.0);
  void flush();

  const Mat& uut() { flush(); return uut_; }
  const Mat& vut() { flush(); return vut_; }
  long count() const { return count_; }

private:
  Mat uut_, vut_;
  Mat ubuf_, vbuf_;
  int fill_ = 0;
  long count_ = 0;
};

}  // namespace rcc
