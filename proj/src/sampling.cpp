#include "gstream/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gstream {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

const char* to_string(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::Full: return "full";
    case SamplingKind::GaussianCompressive: return "gaussian";
    case SamplingKind::EntrywiseMissing: return "entrywise";
  }
  return "unknown";
}

SamplingOperator SamplingOperator::make_full(std::size_t n) {
  if (n < 1) throw std::invalid_argument("make_full: n must be positive");
  return SamplingOperator(n, Full{});
}

SamplingOperator SamplingOperator::make_gaussian(std::size_t m, std::size_t n, Rng& rng) {
  if (m < 1 || m > n) throw std::invalid_argument("make_gaussian: need 1 <= m <= n");
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  Matrix a(m, n);
  // Row-major fill order keeps the draw sequence independent of Eigen's storage.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  return SamplingOperator(n, Gaussian{std::move(a)});
}

SamplingOperator SamplingOperator::make_entrywise(std::size_t m, std::size_t n, Rng& rng,
                                                  bool with_replacement) {
  if (m < 1 || n < 1) throw std::invalid_argument("make_entrywise: need m, n >= 1");
  std::vector<std::size_t> omega;
  omega.reserve(m);
  if (with_replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < m; ++i) omega.push_back(pick(rng));
  } else {
    if (m > n) throw std::invalid_argument("make_entrywise: m > n without replacement");
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::sample(all.begin(), all.end(), std::back_inserter(omega), m, rng);
  }
  return SamplingOperator(n, Entrywise{std::move(omega)});
}

SamplingOperator SamplingOperator::from_matrix(Matrix a) {
  if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("from_matrix: empty matrix");
  if (!a.allFinite()) throw NonFiniteInput("from_matrix: non-finite entry");
  const auto n = static_cast<std::size_t>(a.cols());
  return SamplingOperator(n, Gaussian{std::move(a)});
}

SamplingOperator SamplingOperator::from_indices(std::vector<std::size_t> indices, std::size_t n) {
  if (indices.empty()) throw std::invalid_argument("from_indices: empty index list");
  for (auto i : indices) {
    if (i >= n) throw std::out_of_range("from_indices: index outside [0, n)");
  }
  return SamplingOperator(n, Entrywise{std::move(indices)});
}

SamplingKind SamplingOperator::kind() const {
  return std::visit(Overloaded{
                        [](const Full&) { return SamplingKind::Full; },
                        [](const Gaussian&) { return SamplingKind::GaussianCompressive; },
                        [](const Entrywise&) { return SamplingKind::EntrywiseMissing; },
                    },
                    impl_);
}

std::size_t SamplingOperator::rows() const {
  return std::visit(Overloaded{
                        [this](const Full&) { return n_; },
                        [](const Gaussian& g) { return static_cast<std::size_t>(g.a.rows()); },
                        [](const Entrywise& e) { return e.omega.size(); },
                    },
                    impl_);
}

Vector SamplingOperator::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != n_) throw DimensionMismatch("apply: length != n");
  return std::visit(Overloaded{
                        [&](const Full&) -> Vector { return v; },
                        [&](const Gaussian& g) -> Vector { return g.a * v; },
                        [&](const Entrywise& e) -> Vector {
                          Vector out(static_cast<Eigen::Index>(e.omega.size()));
                          for (std::size_t i = 0; i < e.omega.size(); ++i) {
                            out(static_cast<Eigen::Index>(i)) =
                                v(static_cast<Eigen::Index>(e.omega[i]));
                          }
                          return out;
                        },
                    },
                    impl_);
}

Vector SamplingOperator::adjoint(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != rows()) throw DimensionMismatch("adjoint: length != m");
  return std::visit(Overloaded{
                        [&](const Full&) -> Vector { return y; },
                        [&](const Gaussian& g) -> Vector { return g.a.transpose() * y; },
                        [&](const Entrywise& e) -> Vector {
                          Vector out = Vector::Zero(static_cast<Eigen::Index>(n_));
                          for (std::size_t i = 0; i < e.omega.size(); ++i) {
                            out(static_cast<Eigen::Index>(e.omega[i])) +=
                                y(static_cast<Eigen::Index>(i));
                          }
                          return out;
                        },
                    },
                    impl_);
}

Matrix SamplingOperator::restrict_basis(const Matrix& u) const {
  if (static_cast<std::size_t>(u.rows()) != n_) throw DimensionMismatch("restrict_basis: rows != n");
  return std::visit(Overloaded{
                        [&](const Full&) -> Matrix { return u; },
                        [&](const Gaussian& g) -> Matrix { return g.a * u; },
                        [&](const Entrywise& e) -> Matrix {
                          Matrix out(static_cast<Eigen::Index>(e.omega.size()), u.cols());
                          for (std::size_t i = 0; i < e.omega.size(); ++i) {
                            out.row(static_cast<Eigen::Index>(i)) =
                                u.row(static_cast<Eigen::Index>(e.omega[i]));
                          }
                          return out;
                        },
                    },
                    impl_);
}

const Matrix& SamplingOperator::matrix() const {
  if (const auto* g = std::get_if<Gaussian>(&impl_)) return g->a;
  throw std::logic_error("SamplingOperator::matrix: not a Gaussian operator");
}

const std::vector<std::size_t>& SamplingOperator::indices() const {
  if (const auto* e = std::get_if<Entrywise>(&impl_)) return e->omega;
  throw std::logic_error("SamplingOperator::indices: not an entrywise operator");
}

}  // namespace gstream
