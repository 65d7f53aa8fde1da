#ifndef GLRU_SYNTH_HPP
#define GLRU_SYNTH_HPP

#include "glru/data.hpp"

#include <cstdint>

namespace glru {

// Seeded two-class Gaussian data: y = +-1 with equal probability and
// x ~ N(y (separation / 2) u, I) for the unit vector u = (1, ..., 1) / sqrt(d).
// Each entry is then kept with probability 1 - sparsity.
dataset synth_dataset(std::uint64_t seed, index_t n, index_t d, double sparsity = 0.0,
                      double separation = 2.0);

// Training/validation pair whose first feature is a spurious copy of the
// label (y * strength + noise) in training and pure noise in validation.
struct noisy_split {
  dataset train;
  dataset valid;
};

noisy_split synth_dominant_noise(std::uint64_t seed, index_t n_train, index_t n_valid, index_t d,
                                 double separation = 2.0, double strength = 2.0);

}  // namespace glru

#endif  // GLRU_SYNTH_HPP
