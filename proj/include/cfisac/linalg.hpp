#pragma once

#include "cfisac/types.hpp"

namespace cfisac {

/// Clipping tolerance used by the PSD projections below.
inline constexpr double kPsdClipTolerance = 1e-10;

/// Hermitian part followed by eigenvalue clipping at zero.
CMat project_psd(const CMat& m);
Mat project_psd(const Mat& m);

/// Symmetric PSD square root (eigenvalues clipped at zero first).
Mat psd_sqrt(const Mat& m);

/// Rows F with F^T F = m for symmetric PSD m; rows for eigenvalues below
/// the clip tolerance (relative to the largest) are dropped.
Mat psd_factor(const Mat& m);

/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const CMat& m);
double min_eigenvalue(const Mat& m);

}  // namespace cfisac
