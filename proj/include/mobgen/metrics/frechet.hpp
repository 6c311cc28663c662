#pragma once

#include "mobgen/metrics/features.hpp"

namespace mobgen::metrics {

/// Frechet distance between Gaussian fits of two feature sets:
///   |mu_r - mu_g|^2 + Tr(S_r + S_g - 2 (S_r S_g)^(1/2))
/// with 1/(n-1) covariances. The trace of the square root is taken from the
/// eigenvalues of the symmetric product S_r^(1/2) S_g S_r^(1/2), negatives
/// clipped to 0. Needs at least 2 rows in each set and equal column counts.
double frechet_distance(const FeatureMatrix& real, const FeatureMatrix& fake);

}  // namespace mobgen::metrics
