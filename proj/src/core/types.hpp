#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <stdexcept>
#include <string>

namespace rcc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class ErrorCode {
  InvalidArgument,
  Diverged,
  RankDeficient,
  Untrained,
  Config,
  Io,
  FormatOverflow,
  DegenerateFit,
  UndefinedMetric,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

// Integration blew up; carries the simulation time of the first bad sample.
class DivergedError : public Error {
public:
  DivergedError(double t, const std::string& what)
      : Error(ErrorCode::Diverged, what), time_(t) {}
  double time() const { return time_; }

private:
  double time_;
};

inline void require(bool cond, const std::string& msg,
                    ErrorCode code = ErrorCode::InvalidArgument) {
  if (!cond) throw Error(code, msg);
}

}  // namespace rcc
