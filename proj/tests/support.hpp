#pragma once

#include "gstream/numerics.hpp"
#include "gstream/random.hpp"

#include <random>

namespace gstream::testing {

inline Rng test_rng(std::uint64_t salt = 0) { return make_rng(20240601, salt, StreamTag::Misc); }

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = normal(rng);
  }
  return g;
}

inline Vector gaussian_vector(Eigen::Index n, Rng& rng) { return gaussian(n, 1, rng).col(0); }

inline Matrix random_basis(Eigen::Index n, Eigen::Index d, Rng& rng) {
  return orthonormalize(gaussian(n, d, rng)).matrix();
}

inline Matrix random_orthogonal(Eigen::Index d, Rng& rng) { return random_basis(d, d, rng); }

}  // namespace gstream::testing
