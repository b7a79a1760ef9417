#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "vicorpus/analysis.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/seed.hpp"

namespace vicorpus::analysis {

namespace {

using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

PcaModel fit_pca(const std::vector<BowVector>& vectors, std::size_t dim, std::size_t k, const PcaOptions& options) {
  const std::size_t n = vectors.size();
  if (k == 0) throw UsageError("number of components must be positive");
  if (k > dim) throw InputError("cannot fit " + std::to_string(k) + " components in " + std::to_string(dim) + " dimensions");
  if (n < k + 1) throw InputError("need at least k+1 = " + std::to_string(k + 1) + " vectors, got " + std::to_string(n));

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < n; ++r) {
    int last = -1;
    for (const auto& [idx, count] : vectors[r].entries) {
      if (idx <= last || static_cast<std::size_t>(idx) >= dim) throw InputError("bag-of-words indices must be increasing and < dim");
      last = idx;
      triplets.emplace_back(static_cast<int>(r), idx, count);
    }
  }
  Sparse x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  x.setFromTriplets(triplets.begin(), triplets.end());
  const Sparse xt = x.transpose();

  PcaModel model;
  model.mean = (xt * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const auto& mu = model.mean;
  // Centered covariance times a block, without materializing X - 1 mu^T.
  auto cov = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
    const Eigen::MatrixXd xv = x * v;
    const Eigen::RowVectorXd mv = mu.transpose() * v;
    const Eigen::MatrixXd centered = xv - Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)) * mv;
    return (xt * centered) / (nn - 1.0);
  };

  const auto block = static_cast<Eigen::Index>(std::min<std::size_t>(dim, std::max<std::size_t>(2 * k, k + 10)));
  const auto kk = static_cast<Eigen::Index>(k);
  std::mt19937_64 gen(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(static_cast<Eigen::Index>(dim), block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, j) = normal(gen);
  }
  q = orthonormal_basis(q);

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  for (int it = 1;; ++it) {
    const Eigen::MatrixXd z = cov(q);
    Eigen::MatrixXd h = q.transpose() * z;
    h = (h + h.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    // Eigen sorts ascending; flip to descending.
    theta = eig.eigenvalues().reverse();
    const Eigen::MatrixXd w = eig.eigenvectors().rowwise().reverse();
    ritz = q * w;
    const Eigen::MatrixXd zw = z * w;
    const double scale = std::max(std::abs(theta(0)), std::numeric_limits<double>::min());
    bool converged = true;
    for (Eigen::Index j = 0; j < kk && converged; ++j) {
      converged = (zw.col(j) - theta(j) * ritz.col(j)).norm() <= options.tolerance * scale;
    }
    model.iterations = it;
    if (converged) break;
    if (it >= options.max_iterations) {
      throw Error("PCA did not converge in " + std::to_string(options.max_iterations) + " iterations");
    }
    q = orthonormal_basis(zw);
  }

  const double top = std::max(theta(0), 0.0);
  int rank = 0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (top > 0 && theta(j) > 1e-10 * top) ++rank;
  }
  model.rank = rank;
  if (static_cast<std::size_t>(rank) < k && !options.allow_rank_deficient) {
    throw InputError("requested " + std::to_string(k) + " components but the centered data has numerical rank " +
                     std::to_string(rank));
  }

  model.components = ritz.leftCols(kk).transpose();
  model.explained_variance = theta.head(kk).cwiseMax(0.0);
  for (Eigen::Index r = 0; r < kk; ++r) {
    Eigen::Index arg = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (model.components(r, arg) < 0) model.components.row(r) *= -1;
  }
  return model;
}

Eigen::VectorXd PcaModel::project(const BowVector& v) const {
  Eigen::VectorXd out = -(components * mean);
  for (const auto& [idx, count] : v.entries) out += components.col(idx) * count;
  return out;
}

nlohmann::json PcaModel::to_json(const Vocabulary* vocab) const {
  nlohmann::json comps = nlohmann::json::array();
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(components.cols()));
    for (Eigen::Index c = 0; c < components.cols(); ++c) row[static_cast<std::size_t>(c)] = components(r, c);
    comps.push_back(std::move(row));
  }
  nlohmann::json j{{"k", components.rows()},
                   {"dim", components.cols()},
                   {"rank", rank},
                   {"iterations", iterations},
                   {"explained_variance", std::vector<double>(explained_variance.data(),
                                                              explained_variance.data() + explained_variance.size())},
                   {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
                   {"components", std::move(comps)}};
  if (vocab != nullptr) j["terms"] = vocab->terms;
  return j;
}

}  // namespace vicorpus::analysis
