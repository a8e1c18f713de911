#pragma once

#include <cstdint>
#include <vector>

#include "kernbound/kernel.hpp"

namespace kernbound {

struct InequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double slack = 0.0;  // rhs - lhs
};

// Real-valued comparison at 1e-9 relative tolerance.
InequalityResult real_inequality(double lhs, double rhs);

// Element of the product feature space expressed through coefficients over
// the sample span: block k holds c_k with |block_k|^2 = c_k' K_k c_k. Inner
// products and norms never touch explicit feature maps.
class BlockVector {
 public:
  // Weight vector of a combination: block k carries mu_k * alpha.
  static BlockVector weight_vector(const KernelDictionary& dict,
                                   const CombinationWeights& weights,
                                   const Eigen::VectorXd& alpha);

  // Mapped sample point x_j: block k carries the j-th unit coefficient.
  static BlockVector feature_point(const KernelDictionary& dict, int x_index);

  int blocks() const { return static_cast<int>(coefficients_.size()); }
  double block_norm(int k) const;
  double dot(const BlockVector& other) const;

 private:
  BlockVector(const KernelDictionary* dict,
              std::vector<Eigen::VectorXd> coefficients);

  const KernelDictionary* dict_;
  std::vector<Eigen::VectorXd> coefficients_;
};

// Blockwise Hoelder step: |w . Phi(x_j)| <= (sum_k |w_k|^q)^(1/q) *
// (sum_k |Phi_k(x_j)|^r)^(1/r) with 1/q + 1/r = 1. Requires q > 1.
InequalityResult check_holder_block(const KernelDictionary& dict,
                                    const CombinationWeights& weights,
                                    const Eigen::VectorXd& alpha, int x_index,
                                    double q);

// First-factor step: (sum_k (mu_k^2 alpha' K_k alpha)^(q/2))^(1/q) <=
// sqrt(alpha' K_mu alpha). The simplex admits any q > 1, spheres require
// q >= 4/3.
InequalityResult check_first_factor(const CombinationWeights& weights,
                                    const Eigen::VectorXd& alpha,
                                    const KernelDictionary& dict, double q);

// E[(sigma' g sigma)^(r/2)] <= (r Tr g)^(r/2) for even r, exact enumeration
// (m <= 12).
InequalityResult check_moment_bound(const GramMatrix& g, int r);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MomentEstimate moment_mc(const GramMatrix& g, int r, std::int64_t n_trials,
                         std::uint64_t seed);

// Monte Carlo variant of the moment check.
InequalityResult check_moment_bound(const GramMatrix& g, int r,
                                    std::int64_t n_trials, std::uint64_t seed);

// (2r')! / prod (2 t_i)! <= (2r')^{r'} r'! / prod t_i! in exact integer
// arithmetic. t must sum to r'; r' <= 10.
InequalityResult check_multinomial_footnote(int r_prime,
                                            const std::vector<int>& t);

// |E[prod_i sigma_i^{s_i}]| enumerated exactly over all sign vectors equals
// 1 when every exponent is even and 0 otherwise. m <= 10.
InequalityResult check_vanishing_odd_moments(int m, const std::vector<int>& s);

struct SuiteResult {
  std::string check;
  int instances = 0;
  int failures = 0;
  double min_slack = 0.0;
};

// Seeded randomized sweeps over all five checks; used by the verify command
// and the acceptance gate.
std::vector<SuiteResult> run_verify_suite(std::uint64_t seed);

}  // namespace kernbound
