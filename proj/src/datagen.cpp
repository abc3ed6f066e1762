#include "gstream/datagen.hpp"

#include "gstream/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace gstream {

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = normal(rng);
  }
  return g;
}

GroundTruth make_truth(OrthonormalBasis basis, TruthKind kind, double density) {
  const double mu0 = subspace_incoherence(basis.matrix());
  return GroundTruth{std::move(basis), kind, density, mu0};
}

// Splits `total` into `k` shares, each at most `cap`, proportional to `weights`
// wherever the cap is not active.
std::vector<double> capped_shares(std::vector<double> weights, double total, double cap) {
  const std::size_t k = weights.size();
  std::vector<double> share(k, 0.0);
  std::vector<bool> capped(k, false);
  double remaining = total;
  for (std::size_t round = 0; round <= k; ++round) {
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!capped[i]) weight_sum += weights[i];
    }
    if (weight_sum <= 0.0) break;
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (capped[i]) continue;
      share[i] = remaining * weights[i] / weight_sum;
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!capped[i] && share[i] > cap) {
        capped[i] = true;
        share[i] = cap;
        remaining -= cap;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return share;
}

}  // namespace

const char* to_string(TruthKind kind) {
  switch (kind) {
    case TruthKind::DenseGaussian: return "dense";
    case TruthKind::Sparse: return "sparse";
  }
  return "unknown";
}

GroundTruth gen_dense_truth(std::size_t n, std::size_t d, Rng& rng) {
  if (d < 1 || d >= n) throw std::invalid_argument("gen_dense_truth: need 1 <= d < n");
  return make_truth(orthonormalize(gaussian_matrix(n, d, rng)), TruthKind::DenseGaussian, 1.0);
}

double default_sparse_density(std::size_t n, std::size_t d) {
  const double nn = static_cast<double>(n);
  return std::clamp(std::max(4.0 * std::log(nn), 2.0 * static_cast<double>(d)) / nn, 0.0, 1.0);
}

GroundTruth gen_sparse_truth(std::size_t n, std::size_t d, double density, Rng& rng) {
  if (d < 1 || d >= n) throw std::invalid_argument("gen_sparse_truth: need 1 <= d < n");
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("gen_sparse_truth: density must lie in (0, 1]");
  }
  // A density with fewer than d expected nonzeros per column is not rejected up
  // front: such draws are mostly rank deficient and end in GenerationFailed below.
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> normal;
  constexpr int kMaxDraws = 100;
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Matrix g = Matrix::Zero(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (keep(rng)) g(i, j) = normal(rng);
      }
    }
    try {
      return make_truth(orthonormalize(g), TruthKind::Sparse, density);
    } catch (const RankDeficient&) {
    }
  }
  throw GenerationFailed("gen_sparse_truth: still rank deficient after 100 draws");
}

Vector gen_coefficients(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector s(d);
  for (std::size_t i = 0; i < d; ++i) s(i) = normal(rng);
  return s;
}

StreamGenerator::StreamGenerator(const GroundTruth& truth, OpSpec spec, Rng rng, bool keep_truth)
    : truth_(&truth), spec_(spec), rng_(std::move(rng)), keep_truth_(keep_truth) {
  const auto n = static_cast<std::size_t>(truth.basis.ambient_dim());
  if (spec_.kind != SamplingKind::Full && (spec_.m < 1 || spec_.m > n)) {
    throw std::invalid_argument("StreamGenerator: need 1 <= m <= n");
  }
}

SamplingOperator StreamGenerator::next_operator() {
  const auto n = static_cast<std::size_t>(truth_->basis.ambient_dim());
  switch (spec_.kind) {
    case SamplingKind::Full: return SamplingOperator::make_full(n);
    case SamplingKind::GaussianCompressive: return SamplingOperator::make_gaussian(spec_.m, n, rng_);
    case SamplingKind::EntrywiseMissing:
      return SamplingOperator::make_entrywise(spec_.m, n, rng_, spec_.with_replacement);
  }
  throw std::logic_error("StreamGenerator: unknown sampling kind");
}

StreamSample StreamGenerator::next() {
  const auto d = static_cast<std::size_t>(truth_->basis.rank());
  Vector v = truth_->matrix() * gen_coefficients(d, rng_);
  SamplingOperator op = next_operator();
  Vector x = op.apply(v);
  if (!keep_truth_) v = Vector();
  return StreamSample{std::move(v), std::move(op), std::move(x)};
}

std::vector<StreamSample> gen_stream(const GroundTruth& truth, const OpSpec& spec, std::size_t count,
                                     Rng& rng) {
  StreamGenerator gen(truth, spec, Rng(rng()));
  std::vector<StreamSample> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) out.push_back(gen.next());
  return out;
}

OrthonormalBasis perturb_within_region(const Matrix& ubar, double target, Rng& rng) {
  const auto n = static_cast<std::size_t>(ubar.rows());
  const auto d = static_cast<std::size_t>(ubar.cols());
  if (d < 1 || d >= n) throw std::invalid_argument("perturb_within_region: need 1 <= d < n");
  const std::size_t k = std::min(d, n - d);
  if (!(target >= 0.0 && target <= static_cast<double>(k) - 1e-9)) {
    throw std::invalid_argument("perturb_within_region: target out of range");
  }

  // Random principal directions inside span(Ubar).
  const Matrix rotation = orthonormalize(gaussian_matrix(d, d, rng)).matrix();
  const Matrix b = ubar * rotation;

  // Random orthonormal directions in the complement; projected twice for accuracy.
  Matrix q = gaussian_matrix(n, k, rng);
  for (int pass = 0; pass < 2; ++pass) q -= ubar * (ubar.transpose() * q);
  q = orthonormalize(q).matrix();
  for (int pass = 0; pass < 2; ++pass) q -= ubar * (ubar.transpose() * q);
  q = orthonormalize_unchecked(q);

  std::exponential_distribution<double> expo(1.0);
  std::vector<double> weights(k);
  for (auto& w : weights) w = expo(rng);
  const std::vector<double> sin2 = capped_shares(std::move(weights), target, 1.0);

  Matrix u = b;
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    u.col(col) = std::sqrt(1.0 - sin2[i]) * b.col(col) + std::sqrt(sin2[i]) * q.col(col);
  }
  return OrthonormalBasis(std::move(u));
}

}  // namespace gstream
