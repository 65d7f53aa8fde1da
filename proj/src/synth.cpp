#include "glru/synth.hpp"

#include "glru/error.hpp"

#include <cmath>
#include <random>

namespace glru {

namespace {

using triplet = Eigen::Triplet<double, index_t>;

struct draw_result {
  std::vector<triplet> entries;
  vector_t y;
};

draw_result draw(std::mt19937_64 &rng, index_t n, index_t d, double sparsity, double separation) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution keep(1.0 - sparsity);
  const double shift = d > 0 ? 0.5 * separation / std::sqrt(static_cast<double>(d)) : 0.0;
  draw_result out;
  out.y.resize(n);
  for (index_t i = 0; i < n; ++i) {
    const double y = coin(rng) ? 1.0 : -1.0;
    out.y[i] = y;
    for (index_t j = 0; j < d; ++j) {
      const double v = normal(rng) + y * shift;
      if (keep(rng) && v != 0.0) out.entries.emplace_back(i, j, v);
    }
  }
  return out;
}

}  // namespace

dataset synth_dataset(std::uint64_t seed, index_t n, index_t d, double sparsity,
                      double separation) {
  if (n < 1 || d < 1) throw validation_error("synthetic data needs n >= 1 and d >= 1");
  if (!(sparsity >= 0.0 && sparsity < 1.0))
    throw validation_error("sparsity must lie in [0, 1)");
  if (!std::isfinite(separation)) throw validation_error("separation must be finite");
  std::mt19937_64 rng(seed);
  draw_result r = draw(rng, n, d, sparsity, separation);
  row_matrix x(n, d);
  x.setFromTriplets(r.entries.begin(), r.entries.end());
  return dataset(std::move(x), std::move(r.y), task::classification);
}

noisy_split synth_dominant_noise(std::uint64_t seed, index_t n_train, index_t n_valid, index_t d,
                                 double separation, double strength) {
  if (d < 2) throw validation_error("the noise construction needs d >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto build = [&](index_t n, bool spurious) {
    draw_result r = draw(rng, n, d - 1, 0.0, separation);
    std::vector<triplet> entries;
    entries.reserve(r.entries.size() + static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) {
      const double v = spurious ? strength * r.y[i] + normal(rng) : normal(rng);
      entries.emplace_back(i, 0, v);
    }
    for (const auto &t : r.entries) entries.emplace_back(t.row(), t.col() + 1, t.value());
    row_matrix x(n, d);
    x.setFromTriplets(entries.begin(), entries.end());
    return dataset(std::move(x), std::move(r.y), task::classification);
  };
  noisy_split out;
  out.train = build(n_train, true);
  out.valid = build(n_valid, false);
  return out;
}

}  // namespace glru
