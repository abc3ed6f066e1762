#pragma once

/// Seeded synthetic ground truths and observation streams.

#include "gstream/numerics.hpp"
#include "gstream/random.hpp"
#include "gstream/sampling.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gstream {

class GenerationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TruthKind { DenseGaussian, Sparse };

const char* to_string(TruthKind kind);

struct GroundTruth {
  OrthonormalBasis basis;
  TruthKind kind;
  /// Bernoulli density of the generating matrix; 1 for dense truths.
  double density;
  /// subspace_incoherence(basis)
  double mu0;

  const Matrix& matrix() const { return basis.matrix(); }
};

/// Range of an n x d standard normal matrix.
GroundTruth gen_dense_truth(std::size_t n, std::size_t d, Rng& rng);

/// min(1, max(4 log n, 2d) / n).
double default_sparse_density(std::size_t n, std::size_t d);

/// Range of an n x d matrix whose entries are nonzero (standard normal) independently
/// with probability `density`. Rank-deficient draws are repeated; after 100 failed
/// draws GenerationFailed is thrown.
GroundTruth gen_sparse_truth(std::size_t n, std::size_t d, double density, Rng& rng);

/// i.i.d. N(0, 1) coefficient vector.
Vector gen_coefficients(std::size_t d, Rng& rng);

struct OpSpec {
  SamplingKind kind = SamplingKind::Full;
  /// Measurements per sample; ignored for Full.
  std::size_t m = 0;
  bool with_replacement = true;
};

struct StreamSample {
  /// Hidden full vector Ubar s; empty in observations-only mode.
  Vector v;
  SamplingOperator op;
  Vector x;
};

/// Lazily produces samples x_t = A_t v_t with a fresh operator and a fresh
/// coefficient vector per sample.
class StreamGenerator {
 public:
  StreamGenerator(const GroundTruth& truth, OpSpec spec, Rng rng, bool keep_truth = true);

  StreamSample next();

  /// Draws the next operator only; used by callers that generate v themselves.
  SamplingOperator next_operator();

 private:
  const GroundTruth* truth_;
  OpSpec spec_;
  Rng rng_;
  bool keep_truth_;
};

std::vector<StreamSample> gen_stream(const GroundTruth& truth, const OpSpec& spec, std::size_t count,
                                     Rng& rng);

/// Basis whose principal angles to `ubar` have sum of squared sines equal to
/// `target`. Rotates min(d, n - d) random principal directions of `ubar` towards
/// random orthogonal-complement directions. Requires 0 <= target <= min(d, n-d) - 1e-9.
OrthonormalBasis perturb_within_region(const Matrix& ubar, double target, Rng& rng);

}  // namespace gstream
