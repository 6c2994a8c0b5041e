#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "optomag/errors.hpp"

namespace optomag {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6c = Eigen::Matrix<std::complex<double>, 6, 6>;
using Mat4 = Eigen::Matrix4d;

/// Modes carried by a covariance matrix, each contributing an (X, Y) pair.
enum class Mode { magnon, a2_out, b1_out, a2, b1, unlabeled };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::magnon: return "m";
    case Mode::a2_out: return "A2_out";
    case Mode::b1_out: return "B1_out";
    case Mode::a2: return "a2";
    case Mode::b1: return "b1";
    case Mode::unlabeled: break;
  }
  return "?";
}

/// Real symmetric covariance matrix in the vacuum-variance-1/2 convention,
/// quadrature ordering (X_1, Y_1, X_2, Y_2, ...). Symmetrized on construction.
class CovMat {
 public:
  CovMat() = default;

  explicit CovMat(const Eigen::MatrixXd& m, std::vector<Mode> modes = {})
      : m_(0.5 * (m + m.transpose())), modes_(std::move(modes)) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0)
      throw DomainError("CovMat: matrix must be square with even dimension");
    if (modes_.empty()) modes_.assign(m.rows() / 2, Mode::unlabeled);
    if (static_cast<Eigen::Index>(modes_.size()) * 2 != m.rows())
      throw DomainError("CovMat: mode labels do not match dimension");
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  const std::vector<Mode>& modes() const { return modes_; }
  Eigen::Index dim() const { return m_.rows(); }
  Eigen::Index num_modes() const { return m_.rows() / 2; }
  double operator()(Eigen::Index i, Eigen::Index k) const { return m_(i, k); }

  /// Index of `mode` in the ordering, or -1.
  int find(Mode mode) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
      if (modes_[i] == mode) return static_cast<int>(i);
    return -1;
  }

 private:
  Eigen::MatrixXd m_;
  std::vector<Mode> modes_;
};

/// Vacuum CM (1/2 identity) on n modes.
inline CovMat vacuum_cm(int n_modes) {
  return CovMat(0.5 * Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

}  // namespace optomag
