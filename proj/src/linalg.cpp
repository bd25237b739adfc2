#include "cfisac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cfisac {

CMat project_psd(const CMat& m) {
  const CMat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(h);
  Vec d = eig.eigenvalues();
  if (d.minCoeff() >= 0.0) return h;
  d = d.cwiseMax(0.0);
  CMat out = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

Mat project_psd(const Mat& m) {
  const Mat h = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(h);
  Vec d = eig.eigenvalues();
  if (d.minCoeff() >= 0.0) return h;
  d = d.cwiseMax(0.0);
  Mat out = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
  const Vec d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

Mat psd_factor(const Mat& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return Mat(0, 0);
  // Diagonal input is common (expectation-mode sensing forms); skip the eigensolve.
  const Mat off = m - Mat(m.diagonal().asDiagonal());
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 0.0);
  if (scale == 0.0) return Mat(0, n);
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (m(i, i) > kPsdClipTolerance * scale) keep.push_back(i);
    }
    Mat f = Mat::Zero(static_cast<Eigen::Index>(keep.size()), n);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      f(static_cast<Eigen::Index>(r), keep[r]) = std::sqrt(m(keep[r], keep[r]));
    }
    return f;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
  const Vec& d = eig.eigenvalues();
  const double top = std::max(d.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) > kPsdClipTolerance * top) keep.push_back(i);
  }
  Mat f(static_cast<Eigen::Index>(keep.size()), n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    f.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(d(keep[r])) * eig.eigenvectors().col(keep[r]).transpose();
  }
  return f;
}

double min_eigenvalue(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace cfisac
