#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kernbound/bounds.hpp"
#include "kernbound/kernel.hpp"

namespace kernbound {

enum class FamilyTag { L1, L2, L2Signed };

std::string family_tag_name(FamilyTag t);

// Family tags share the closed forms of their bound family; the signed
// sphere reuses the L2 forms.
BoundFamily bound_family(FamilyTag t);

struct HypothesisFamily {
  FamilyTag tag = FamilyTag::L1;
  double rho = 1.0;

  void validate() const;
};

// Sign vector with entries exactly +1 or -1.
class SigmaVector {
 public:
  explicit SigmaVector(Eigen::VectorXd signs);

  int size() const { return static_cast<int>(signs_.size()); }
  const Eigen::VectorXd& signs() const { return signs_; }

 private:
  Eigen::VectorXd signs_;
};

// Trial t's signs under seed s, independent of evaluation order.
SigmaVector sigma_for_trial(std::uint64_t seed, std::uint64_t trial, int m);

inline constexpr int kDefaultExactCap = 14;
inline constexpr int kHardExactCap = 24;

struct RademacherEstimate {
  enum class Method { MonteCarlo, ExactEnumeration };

  double value = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  Method method = Method::MonteCarlo;
  std::optional<std::uint64_t> seed;
  FamilyTag family = FamilyTag::L1;
  double rho = 1.0;
  int m = 0;
  int p = 0;
};

// Inner supremum over the weight constraint given the per-kernel quadratic
// forms u_k = sigma' K_k sigma (negatives clamped to 0): L1 takes
// sqrt(max_k u_k) / rho, both L2 tags take (sum_k u_k^2)^(1/4) / rho.
double sup_from_quadratic_forms(const Eigen::VectorXd& u,
                                const HypothesisFamily& family);

// Exact supremum of sigma' K_mu alpha over feasible (mu, alpha) for one sign
// vector.
double sup_closed_form(const KernelDictionary& dict, const SigmaVector& sigma,
                       const HypothesisFamily& family);

// Monte Carlo estimate of the scaled expectation (1/m) E sup. Identical
// (seed, trials) give bit-identical output for every thread count.
RademacherEstimate estimate_mc(const KernelDictionary& dict,
                               const HypothesisFamily& family,
                               std::int64_t n_trials, std::uint64_t seed,
                               int threads = 0);

// Same trial stream evaluated for several families at once; the per-trial
// quadratic forms are computed once and shared.
std::vector<RademacherEstimate> estimate_mc_many(
    const KernelDictionary& dict, const std::vector<HypothesisFamily>& families,
    std::int64_t n_trials, std::uint64_t seed, int threads = 0);

// Full enumeration over sign vectors, halved through the sigma -> -sigma
// symmetry. Requires m <= exact_cap (<= 24).
RademacherEstimate estimate_exact(const KernelDictionary& dict,
                                  const HypothesisFamily& family,
                                  int exact_cap = kDefaultExactCap);

std::vector<RademacherEstimate> estimate_exact_many(
    const KernelDictionary& dict, const std::vector<HypothesisFamily>& families,
    int exact_cap = kDefaultExactCap);

struct BruteForceSupResult {
  double grid_max = 0.0;
  double achiever_check = 0.0;
  bool degenerate = false;
  // |rho^2 (alpha* ' K_mu* alpha*) - 1| at the grid optimum.
  double membership_defect = 0.0;
};

// Grid oracle for the closed form: walks feasible mu on a simplex/sphere
// grid (p <= 3, m <= 6, step <= 0.25), evaluates the exact alpha-supremum at
// each grid point, and reproduces the best value through its explicit
// maximizer.
BruteForceSupResult brute_force_sup(const KernelDictionary& dict,
                                    const SigmaVector& sigma,
                                    const HypothesisFamily& family,
                                    double grid_step);

}  // namespace kernbound
