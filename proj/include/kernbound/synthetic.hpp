#pragma once

#include <cstdint>

#include "kernbound/kernel.hpp"

namespace kernbound {

// Seeded generators for verification sweeps and tests. Everything is a pure
// function of the seed via the counter generator, so instances are identical
// across platforms and thread counts.

// Uniform coordinates in [-1, 1]; labeled samples alternate +1/-1.
Sample random_sample(std::uint64_t seed, int m, int d, bool labeled = false);

// Cycles through linear, polynomial, and gaussian kernels with seeded
// parameters.
KernelSpec random_kernel_spec(std::uint64_t seed, int index);

// Dictionary over a random sample: m in [2, max_m], p in [1, max_p], mixed
// kernel kinds.
KernelDictionary random_dictionary(std::uint64_t seed, int max_m, int max_p);

// Feasible random weights for the requested constraint set.
CombinationWeights random_weights(std::uint64_t seed, int p, WeightConstraint c);

// Coefficients with entries uniform in [-scale, scale].
Eigen::VectorXd random_alpha(std::uint64_t seed, int m, double scale = 1.0);

// Two gaussian blobs around +-(separation, ..., separation) with alternating
// labels.
Sample two_blobs(std::uint64_t seed, int n, int d = 2, double separation = 1.2,
                 double spread = 0.7);

}  // namespace kernbound
