#pragma once

#include "gstream/numerics.hpp"
#include "gstream/random.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace gstream {

enum class SamplingKind { Full, GaussianCompressive, EntrywiseMissing };

const char* to_string(SamplingKind kind);

/// Linear observation map A: R^n -> R^m.
///
/// Full is the identity. GaussianCompressive stores an explicit m x n matrix.
/// EntrywiseMissing stores the observed index list; indices may repeat, in which
/// case the adjoint accumulates every copy.
class SamplingOperator {
 public:
  static SamplingOperator make_full(std::size_t n);
  /// m x n matrix with i.i.d. N(0, 1/n) entries drawn from `rng`.
  static SamplingOperator make_gaussian(std::size_t m, std::size_t n, Rng& rng);
  /// m uniform draws from [0, n). With `with_replacement = false` the indices are
  /// distinct (requires m <= n).
  static SamplingOperator make_entrywise(std::size_t m, std::size_t n, Rng& rng,
                                         bool with_replacement = true);

  static SamplingOperator from_matrix(Matrix a);
  static SamplingOperator from_indices(std::vector<std::size_t> indices, std::size_t n);

  SamplingKind kind() const;
  /// Number of measurements m.
  std::size_t rows() const;
  /// Ambient dimension n.
  std::size_t ambient_dim() const { return n_; }

  Vector apply(const Vector& v) const;
  Vector adjoint(const Vector& y) const;
  /// A U, column by column.
  Matrix restrict_basis(const Matrix& u) const;

  /// Gaussian only.
  const Matrix& matrix() const;
  /// Entrywise only.
  const std::vector<std::size_t>& indices() const;

 private:
  struct Full {};
  struct Gaussian {
    Matrix a;
  };
  struct Entrywise {
    std::vector<std::size_t> omega;
  };

  SamplingOperator(std::size_t n, std::variant<Full, Gaussian, Entrywise> impl)
      : n_(n), impl_(std::move(impl)) {}

  std::size_t n_;
  std::variant<Full, Gaussian, Entrywise> impl_;
};

}  // namespace gstream
