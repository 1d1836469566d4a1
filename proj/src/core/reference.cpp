#include "reference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rcc {

Reference Reference::constant(const Vec& value) {
  Reference r;
  r.kind_ = Kind::Constant;
  r.dim_ = static_cast<int>(value.size());
  r.a_ = value;
  return r;
}

Reference Reference::square_wave(const Vec& a, const Vec& b, double period,
                                 double smoothing, double duty) {
  require(a.size() == b.size(), "square wave: endpoint dimensions differ");
  require(period > 0, "square wave: period must be positive");
  require(duty > 0 && duty < 1, "square wave: duty must lie in (0, 1)");
  require(smoothing >= 0 && smoothing <= 0.5 * period,
          "square wave: smoothing must lie in [0, period/2]");
  Reference r;
  r.kind_ = Kind::SquareWave;
  r.dim_ = static_cast<int>(a.size());
  r.a_ = a;
  r.b_ = b;
  r.period_ = period;
  r.smoothing_ = smoothing;
  r.duty_ = duty;
  return r;
}

Reference Reference::ellipse(const Vec& center, const Vec& e1, const Vec& e2,
                             double ax, double bx, double period, double phase,
                             int direction) {
  require(center.size() == e1.size() && e1.size() == e2.size(),
          "ellipse: dimension mismatch");
  require(ax > 0 && bx > 0 && period > 0, "ellipse: axes and period positive");
  Reference r;
  r.kind_ = Kind::Ellipse;
  r.dim_ = static_cast<int>(center.size());
  r.center_ = center;
  r.e1_ = e1;
  r.e2_ = e2;
  r.ax_ = ax;
  r.bx_ = bx;
  r.period_ = period;
  r.phase_ = phase;
  r.direction_ = direction >= 0 ? 1 : -1;
  return r;
}

Reference Reference::recorded(double h, Mat values) {
  require(h > 0 && values.cols() >= 2, "recorded reference: need samples");
  Reference r;
  r.kind_ = Kind::Recorded;
  r.dim_ = static_cast<int>(values.rows());
  r.h_ = h;
  r.samples_ = std::move(values);
  return r;
}

void Reference::eval(double t, Vec& out) const {
  switch (kind_) {
    case Kind::Constant:
      out = a_;
      return;
    case Kind::SquareWave: {
      double ph = std::fmod(t, period_);
      if (ph < 0) ph += period_;
      const double t_a = duty_ * period_;  // dwell at a, then at b
      const Vec *from, *to;
      double local;
      if (ph < t_a) {
        from = &b_;
        to = &a_;
        local = ph;
      } else {
        from = &a_;
        to = &b_;
        local = ph - t_a;
      }
      if (smoothing_ > 0 && local < smoothing_) {
        const double w = local / smoothing_;
        out = (1.0 - w) * (*from) + w * (*to);
      } else {
        out = *to;
      }
      return;
    }
    case Kind::Ellipse: {
      double frac = std::fmod(t / period_, 1.0);
      if (frac < 0) frac += 1.0;
      const double ang =
          phase_ + static_cast<double>(direction_) * 2.0 * M_PI * frac;
      out = center_ + (ax_ * std::cos(ang)) * e1_ + (bx_ * std::sin(ang)) * e2_;
      return;
    }
    case Kind::Recorded: {
      const double s = t / h_;
      long i = static_cast<long>(std::floor(s));
      const long n = samples_.cols();
      if (i < 0) {
        out = samples_.col(0);
      } else if (i >= n - 1) {
        out = samples_.col(n - 1);
      } else {
        const double w = s - static_cast<double>(i);
        out = (1.0 - w) * samples_.col(i) + w * samples_.col(i + 1);
      }
      return;
    }
  }
}

EllipseFit fit_ellipse(const Mat& segment, double h) {
  require(segment.rows() == 3, "fit_ellipse: expects a 3 x n segment");
  const long n = segment.cols();
  require(n >= 8, "fit_ellipse: segment too short");

  // principal-component plane through the centroid
  const Vec centroid = segment.rowwise().mean();
  Mat q = segment.colwise() - centroid;
  Eigen::JacobiSVD<Mat> svd(q, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  if (sv(1) <= 1e-10 * std::max(sv(0), 1e-300))
    throw Error(ErrorCode::DegenerateFit,
                "fit_ellipse: segment is (nearly) collinear");
  const Vec p1 = svd.matrixU().col(0);
  const Vec p2 = svd.matrixU().col(1);

  Vec px = q.transpose() * p1;  // in-plane coordinates
  Vec py = q.transpose() * p2;

  // direct least-squares conic fit constrained to an ellipse
  // (Halir & Flusser's numerically stable split of Fitzgibbon's method)
  Mat d1(n, 3), d2(n, 3);
  for (long i = 0; i < n; ++i) {
    d1(i, 0) = px(i) * px(i);
    d1(i, 1) = px(i) * py(i);
    d1(i, 2) = py(i) * py(i);
    d2(i, 0) = px(i);
    d2(i, 1) = py(i);
    d2(i, 2) = 1.0;
  }
  const Mat s1 = d1.transpose() * d1;
  const Mat s2 = d1.transpose() * d2;
  const Mat s3 = d2.transpose() * d2;
  Eigen::FullPivLU<Mat> s3lu(s3);
  if (!s3lu.isInvertible())
    throw Error(ErrorCode::DegenerateFit, "fit_ellipse: degenerate segment");
  const Mat tmat = -s3lu.solve(s2.transpose());
  const Mat m0 = s1 + s2 * tmat;
  Mat m(3, 3);
  m.row(0) = m0.row(2) / 2.0;
  m.row(1) = -m0.row(1);
  m.row(2) = m0.row(0) / 2.0;
  Eigen::EigenSolver<Mat> es(m);
  Vec a1;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(es.eigenvectors().col(i).imag().norm()) > 1e-12) continue;
    Vec cand = es.eigenvectors().col(i).real();
    const double cond = 4.0 * cand(0) * cand(2) - cand(1) * cand(1);
    if (cond > 0) {
      a1 = cand;
      break;
    }
  }
  if (a1.size() == 0)
    throw Error(ErrorCode::DegenerateFit,
                "fit_ellipse: no elliptic solution found");
  Vec a2 = tmat * a1;
  // conic A x^2 + B xy + C y^2 + D x + E y + F = 0
  const double ca = a1(0), cb = a1(1), cc = a1(2);
  const double cd = a2(0), ce = a2(1), cf = a2(2);

  Eigen::Matrix2d mm;
  mm << ca, cb / 2.0, cb / 2.0, cc;
  Eigen::Vector2d rhs(-cd / 2.0, -ce / 2.0);
  Eigen::Vector2d cen2 = mm.colPivHouseholderQr().solve(rhs);
  const double fc = cf + 0.5 * (cd * cen2(0) + ce * cen2(1));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ees(mm);
  const Eigen::Vector2d ev = ees.eigenvalues();
  if (!(ev(0) * ev(1) > 0) || fc * ev(0) >= 0)
    throw Error(ErrorCode::DegenerateFit, "fit_ellipse: conic is not an ellipse");
  Eigen::Vector2d axes(std::sqrt(-fc / ev(0)), std::sqrt(-fc / ev(1)));

  EllipseFit fit;
  // order axes so e1 carries the larger semi-axis
  int imaj = axes(0) >= axes(1) ? 0 : 1;
  int imin = 1 - imaj;
  fit.ax = axes(imaj);
  fit.bx = axes(imin);
  Eigen::Vector2d va = ees.eigenvectors().col(imaj);
  Eigen::Vector2d vb = ees.eigenvectors().col(imin);
  fit.e1 = va(0) * p1 + va(1) * p2;
  fit.e2 = vb(0) * p1 + vb(1) * p2;
  fit.center = centroid + cen2(0) * p1 + cen2(1) * p2;

  // rms conic residual (normalized gradient distance proxy)
  double ss = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = px(i) - cen2(0), y = py(i) - cen2(1);
    const double xr = x * va(0) + y * va(1);
    const double yr = x * vb(0) + y * vb(1);
    const double rr = std::hypot(xr / fit.ax, yr / fit.bx);
    ss += (rr - 1.0) * (rr - 1.0);
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n)) *
                     0.5 * (fit.ax + fit.bx);

  // angular frequency from the unwrapped in-plane angle about the center
  double total = 0.0, prev = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = px(i) - cen2(0), y = py(i) - cen2(1);
    const double xr = (x * va(0) + y * va(1)) / fit.ax;
    const double yr = (x * vb(0) + y * vb(1)) / fit.bx;
    const double ang = std::atan2(yr, xr);
    if (i == 0) {
      fit.phase = ang;
      prev = ang;
      continue;
    }
    double dd = ang - prev;
    while (dd > M_PI) dd -= 2.0 * M_PI;
    while (dd < -M_PI) dd += 2.0 * M_PI;
    total += dd;
    prev = ang;
  }
  const double duration = static_cast<double>(n - 1) * h;
  require(std::abs(total) > 1e-6, "fit_ellipse: segment does not orbit",
          ErrorCode::DegenerateFit);
  fit.direction = total >= 0 ? 1 : -1;
  fit.period = 2.0 * M_PI * duration / std::abs(total);
  return fit;
}

}  // namespace rcc
