#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "subrec/types.hpp"

namespace subrec {

// Seeded generator with bit-portable output streams: the engine is
// std::mt19937_64 (identical across platforms) and the uniform/gaussian
// transforms are implemented here rather than taken from <random>, whose
// distributions differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; both values of each pair are consumed.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Row-major fill so the draw order is independent of storage order.
  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian();
    return m;
  }

  Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform();
    return m;
  }

  // Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
  // sign correction that makes the factorization unique.
  Matrix haar_orthogonal(Eigen::Index n) {
    const Matrix g = gaussian_matrix(n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Stream-splitting rule for parallel trials: trial i of a batch seeded with
// master_seed uses substream_seed(master_seed, i). Two splitmix64 rounds keep
// nearby (seed, index) pairs uncorrelated.
inline std::uint64_t substream_seed(std::uint64_t master_seed,
                                    std::uint64_t trial_index) {
  return detail::splitmix64(detail::splitmix64(master_seed) + trial_index);
}

}  // namespace subrec
