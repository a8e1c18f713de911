#include "kernbound/synthetic.hpp"

#include <cmath>

#include "kernbound/rng.hpp"

namespace kernbound {

namespace {

// Stream ids keep the draw families of one seed independent.
enum Stream : std::uint64_t {
  kPoints = 1,
  kShape = 2,
  kKernelParams = 3,
  kWeights = 4,
  kAlpha = 5,
  kBlobs = 6,
};

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
               double lo, double hi) {
  return lo + (hi - lo) * counter_uniform(seed, stream, counter);
}

}  // namespace

Sample random_sample(std::uint64_t seed, int m, int d, bool labeled) {
  Eigen::MatrixXd x(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j)
      x(i, j) = uniform(seed, kPoints, static_cast<std::uint64_t>(i) * d + j,
                        -1.0, 1.0);
  if (!labeled) return Sample(std::move(x));
  std::vector<int> labels(m);
  for (int i = 0; i < m; ++i) labels[i] = i % 2 == 0 ? 1 : -1;
  return Sample(std::move(x), std::move(labels));
}

KernelSpec random_kernel_spec(std::uint64_t seed, int index) {
  switch (index % 3) {
    case 0:
      return KernelSpec::linear();
    case 1: {
      int degree = 2 + static_cast<int>(counter_word(seed, kKernelParams,
                                                     2 * index) %
                                        2);
      double offset = uniform(seed, kKernelParams, 2 * index + 1, 0.0, 1.0);
      return KernelSpec::polynomial(degree, offset);
    }
    default: {
      double gamma = uniform(seed, kKernelParams, 2 * index, 0.1, 2.0);
      return KernelSpec::gaussian(gamma);
    }
  }
}

KernelDictionary random_dictionary(std::uint64_t seed, int max_m, int max_p) {
  if (max_m < 2 || max_p < 1) throw ParamError("dictionary limits too small");
  int m = 2 + static_cast<int>(counter_word(seed, kShape, 0) %
                               static_cast<std::uint64_t>(max_m - 1));
  int p = 1 + static_cast<int>(counter_word(seed, kShape, 1) %
                               static_cast<std::uint64_t>(max_p));
  int d = 1 + static_cast<int>(counter_word(seed, kShape, 2) % 4);
  Sample sample = random_sample(seed, m, d);
  std::vector<KernelSpec> specs;
  for (int k = 0; k < p; ++k) specs.push_back(random_kernel_spec(seed, k));
  return build_dictionary(sample, specs);
}

CombinationWeights random_weights(std::uint64_t seed, int p, WeightConstraint c) {
  if (p < 1) throw ParamError("p must be >= 1");
  Eigen::VectorXd raw(p);
  for (int k = 0; k < p; ++k)
    raw(k) = uniform(seed, kWeights, k, 0.05, 1.0);
  CombinationWeights w;
  w.constraint = c;
  switch (c) {
    case WeightConstraint::L1Simplex:
      w.mu = raw / raw.sum();
      break;
    case WeightConstraint::L2Sphere:
      w.mu = raw / raw.norm();
      break;
    case WeightConstraint::L2SphereSigned:
      for (int k = 0; k < p; ++k)
        if (counter_word(seed, kWeights, p + k) & 1) raw(k) = -raw(k);
      w.mu = raw / raw.norm();
      break;
  }
  return w;
}

Eigen::VectorXd random_alpha(std::uint64_t seed, int m, double scale) {
  Eigen::VectorXd a(m);
  for (int i = 0; i < m; ++i) a(i) = uniform(seed, kAlpha, i, -scale, scale);
  return a;
}

Sample two_blobs(std::uint64_t seed, int n, int d, double separation,
                 double spread) {
  if (n < 2) throw ParamError("blob sample needs at least two points");
  Eigen::MatrixXd x(n, d);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    int label = i % 2 == 0 ? 1 : -1;
    labels[i] = label;
    for (int j = 0; j < d; ++j)
      x(i, j) = label * separation +
                spread * counter_normal(seed, kBlobs,
                                        static_cast<std::uint64_t>(i) * d + j);
  }
  return Sample(std::move(x), std::move(labels));
}

}  // namespace kernbound
