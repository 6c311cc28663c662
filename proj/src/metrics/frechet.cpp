#include "mobgen/metrics/frechet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace mobgen::metrics {

namespace {

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Gaussian fit(const FeatureMatrix& f) {
  if (f.rows < 2) throw std::invalid_argument("frechet_distance needs at least 2 samples per set");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      f.values.data(), static_cast<Eigen::Index>(f.rows), static_cast<Eigen::Index>(f.cols));
  Gaussian g;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * centered) / static_cast<double>(f.rows - 1);
  return g;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const FeatureMatrix& real, const FeatureMatrix& fake) {
  if (real.cols != fake.cols) {
    throw std::invalid_argument("frechet_distance: feature widths differ (" + std::to_string(real.cols) + " vs " +
                                std::to_string(fake.cols) + ")");
  }
  const Gaussian r = fit(real);
  const Gaussian g = fit(fake);
  const Eigen::MatrixXd root_r = psd_sqrt(r.cov);
  Eigen::MatrixXd product = root_r * g.cov * root_r;
  product = 0.5 * (product + product.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(product, Eigen::EigenvaluesOnly);
  const double trace_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double distance =
      (r.mean - g.mean).squaredNorm() + r.cov.trace() + g.cov.trace() - 2.0 * trace_sqrt;
  return std::max(0.0, distance);
}

}  // namespace mobgen::metrics
