#include "kernbound/proof_checks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kernbound/parallel.hpp"
#include "kernbound/rademacher.hpp"
#include "kernbound/rng.hpp"
#include "kernbound/synthetic.hpp"

namespace kernbound {

namespace {

constexpr int kMomentExactCap = 12;
constexpr int kVanishingCap = 10;
constexpr int kMultinomialCap = 10;

double ipow(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

// Unsigned arbitrary-precision integer, just enough for factorial-scale
// products and comparisons. Limbs are base 2^32, least significant first.
class BigUInt {
 public:
  explicit BigUInt(std::uint64_t v) {
    limbs_.push_back(static_cast<std::uint32_t>(v));
    limbs_.push_back(static_cast<std::uint32_t>(v >> 32));
    trim();
  }

  void multiply(std::uint32_t v) {
    std::uint64_t carry = 0;
    for (std::uint32_t& limb : limbs_) {
      std::uint64_t prod = static_cast<std::uint64_t>(limb) * v + carry;
      limb = static_cast<std::uint32_t>(prod);
      carry = prod >> 32;
    }
    while (carry) {
      limbs_.push_back(static_cast<std::uint32_t>(carry));
      carry >>= 32;
    }
    trim();
  }

  bool less_equal(const BigUInt& other) const {
    if (limbs_.size() != other.limbs_.size())
      return limbs_.size() < other.limbs_.size();
    for (size_t i = limbs_.size(); i-- > 0;)
      if (limbs_[i] != other.limbs_[i]) return limbs_[i] < other.limbs_[i];
    return true;
  }

  double to_double() const {
    double r = 0.0;
    for (size_t i = limbs_.size(); i-- > 0;) r = r * 4294967296.0 + limbs_[i];
    return r;
  }

 private:
  void trim() {
    while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
  }

  std::vector<std::uint32_t> limbs_;
};

// C(n, k) for n <= 20 stays within 64 bits.
std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i);
    r /= static_cast<std::uint64_t>(i);
  }
  return r;
}

// n! / prod parts_i! via iterated binomials over prefix sums.
BigUInt multinomial(const std::vector<int>& parts) {
  BigUInt result(1);
  int prefix = 0;
  for (int part : parts) {
    prefix += part;
    std::uint64_t b = binomial(prefix, part);
    result.multiply(static_cast<std::uint32_t>(b & 0xffffffffull));
    if (b >> 32) throw ParamError("multinomial factor exceeds limb width");
  }
  return result;
}

}  // namespace

InequalityResult real_inequality(double lhs, double rhs) {
  InequalityResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.holds = lhs <= rhs + 1e-9 * std::max(1.0, rhs);
  r.slack = rhs - lhs;
  return r;
}

BlockVector::BlockVector(const KernelDictionary* dict,
                         std::vector<Eigen::VectorXd> coefficients)
    : dict_(dict), coefficients_(std::move(coefficients)) {}

BlockVector BlockVector::weight_vector(const KernelDictionary& dict,
                                       const CombinationWeights& weights,
                                       const Eigen::VectorXd& alpha) {
  if (weights.mu.size() != dict.p())
    throw ParamError("weight count does not match dictionary size");
  if (alpha.size() != dict.m())
    throw ParamError("alpha length does not match sample size");
  std::vector<Eigen::VectorXd> blocks;
  for (int k = 0; k < dict.p(); ++k) blocks.push_back(weights.mu(k) * alpha);
  return BlockVector(&dict, std::move(blocks));
}

BlockVector BlockVector::feature_point(const KernelDictionary& dict, int x_index) {
  if (x_index < 0 || x_index >= dict.m())
    throw ParamError("sample index out of range");
  std::vector<Eigen::VectorXd> blocks;
  for (int k = 0; k < dict.p(); ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dict.m());
    e(x_index) = 1.0;
    blocks.push_back(std::move(e));
  }
  return BlockVector(&dict, std::move(blocks));
}

double BlockVector::block_norm(int k) const {
  return std::sqrt(quadratic_form(dict_->gram(k), coefficients_.at(k)));
}

double BlockVector::dot(const BlockVector& other) const {
  if (dict_ != other.dict_ || blocks() != other.blocks())
    throw ParamError("block vectors live in different spaces");
  double sum = 0.0;
  for (int k = 0; k < blocks(); ++k)
    sum += coefficients_[k].dot(dict_->gram(k).entries() * other.coefficients_[k]);
  return sum;
}

InequalityResult check_holder_block(const KernelDictionary& dict,
                                    const CombinationWeights& weights,
                                    const Eigen::VectorXd& alpha, int x_index,
                                    double q) {
  if (!(q > 1.0)) throw ParamError("Hoelder exponent q must be > 1");
  double r = q / (q - 1.0);
  BlockVector w = BlockVector::weight_vector(dict, weights, alpha);
  BlockVector phi = BlockVector::feature_point(dict, x_index);
  double lhs = std::abs(w.dot(phi));
  double w_norm_q = 0.0;
  double phi_norm_r = 0.0;
  for (int k = 0; k < dict.p(); ++k) {
    w_norm_q += std::pow(w.block_norm(k), q);
    phi_norm_r += std::pow(phi.block_norm(k), r);
  }
  double rhs = std::pow(w_norm_q, 1.0 / q) * std::pow(phi_norm_r, 1.0 / r);
  return real_inequality(lhs, rhs);
}

InequalityResult check_first_factor(const CombinationWeights& weights,
                                    const Eigen::VectorXd& alpha,
                                    const KernelDictionary& dict, double q) {
  if (weights.constraint == WeightConstraint::L2SphereSigned)
    throw ParamError("first factor step requires nonnegative weights");
  if (!(q > 1.0)) throw ParamError("exponent q must be > 1");
  if (weights.constraint == WeightConstraint::L2Sphere && q < 4.0 / 3.0)
    throw ParamError("the sphere constraint requires q >= 4/3");
  weights.require_feasible();
  if (weights.mu.size() != dict.p())
    throw ParamError("weight count does not match dictionary size");
  double lhs_sum = 0.0;
  for (int k = 0; k < dict.p(); ++k) {
    double block = weights.mu(k) * weights.mu(k) * quadratic_form(dict.gram(k), alpha);
    lhs_sum += std::pow(block, q / 2.0);
  }
  double lhs = std::pow(lhs_sum, 1.0 / q);
  double rhs = std::sqrt(quadratic_form(combine_raw(dict, weights.mu), alpha));
  return real_inequality(lhs, rhs);
}

InequalityResult check_moment_bound(const GramMatrix& g, int r) {
  if (r < 2 || r % 2 != 0) throw ParamError("r must be an even integer >= 2");
  const int m = g.size();
  if (m > kMomentExactCap) {
    std::ostringstream msg;
    msg << "exact moment check limited to m <= " << kMomentExactCap;
    throw ParamError(msg.str());
  }
  // sigma -> -sigma leaves the form unchanged, so half the cube suffices.
  const std::uint64_t half = 1ull << (m - 1);
  double sum = 0.0;
  Eigen::VectorXd sigma(m);
  for (std::uint64_t bits = 0; bits < half; ++bits) {
    for (int i = 0; i < m - 1; ++i) sigma(i) = (bits >> i) & 1 ? 1.0 : -1.0;
    sigma(m - 1) = 1.0;
    double u = sigma.dot(g.entries() * sigma);
    sum += ipow(u, r / 2);
  }
  double lhs = sum / static_cast<double>(half);
  double rhs = ipow(static_cast<double>(r) * g.trace(), r / 2);
  return real_inequality(lhs, rhs);
}

MomentEstimate moment_mc(const GramMatrix& g, int r, std::int64_t n_trials,
                         std::uint64_t seed) {
  if (r < 2 || r % 2 != 0) throw ParamError("r must be an even integer >= 2");
  if (n_trials < 1) throw ParamError("trial count must be >= 1");
  const int m = g.size();
  std::vector<double> values(n_trials);
  parallel_chunks(n_trials, 0, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      SigmaVector sigma = sigma_for_trial(seed, t, m);
      double u = sigma.signs().dot(g.entries() * sigma.signs());
      values[t] = ipow(u, r / 2);
    }
  });
  MomentEstimate e;
  double n = static_cast<double>(n_trials);
  e.mean = pairwise_sum(values) / n;
  if (n_trials > 1) {
    for (double& v : values) {
      double d = v - e.mean;
      v = d * d;
    }
    e.std_error = std::sqrt(pairwise_sum(values) / (n - 1.0) / n);
  }
  return e;
}

InequalityResult check_moment_bound(const GramMatrix& g, int r,
                                    std::int64_t n_trials, std::uint64_t seed) {
  MomentEstimate e = moment_mc(g, r, n_trials, seed);
  double rhs = ipow(static_cast<double>(r) * g.trace(), r / 2);
  return real_inequality(e.mean, rhs);
}

InequalityResult check_multinomial_footnote(int r_prime,
                                            const std::vector<int>& t) {
  if (r_prime < 1 || r_prime > kMultinomialCap) {
    std::ostringstream msg;
    msg << "r' must be in [1, " << kMultinomialCap << "]";
    throw ParamError(msg.str());
  }
  int sum = 0;
  for (int part : t) {
    if (part < 0) throw ParamError("composition parts must be nonnegative");
    sum += part;
  }
  if (sum != r_prime) throw ParamError("composition must sum to r'");
  std::vector<int> doubled;
  doubled.reserve(t.size());
  for (int part : t) doubled.push_back(2 * part);
  BigUInt lhs = multinomial(doubled);
  BigUInt rhs = multinomial(t);
  for (int i = 0; i < r_prime; ++i)
    rhs.multiply(static_cast<std::uint32_t>(2 * r_prime));
  InequalityResult result;
  result.lhs = lhs.to_double();
  result.rhs = rhs.to_double();
  result.holds = lhs.less_equal(rhs);
  result.slack = result.rhs - result.lhs;
  return result;
}

InequalityResult check_vanishing_odd_moments(int m, const std::vector<int>& s) {
  if (m < 1 || m > kVanishingCap) {
    std::ostringstream msg;
    msg << "m must be in [1, " << kVanishingCap << "]";
    throw ParamError(msg.str());
  }
  if (static_cast<int>(s.size()) != m)
    throw ParamError("exponent list length must equal m");
  for (int e : s)
    if (e < 0) throw ParamError("exponents must be nonnegative");
  std::int64_t sum = 0;
  const std::uint64_t total = 1ull << m;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    std::int64_t prod = 1;
    for (int i = 0; i < m; ++i) {
      std::int64_t sigma = (bits >> i) & 1 ? 1 : -1;
      for (int e = 0; e < s[i]; ++e) prod *= sigma;
    }
    sum += prod;
  }
  bool all_even = std::all_of(s.begin(), s.end(), [](int e) { return e % 2 == 0; });
  InequalityResult result;
  result.lhs = std::abs(static_cast<double>(sum)) / static_cast<double>(total);
  result.rhs = all_even ? 1.0 : 0.0;
  result.holds = result.lhs == result.rhs;
  result.slack = result.rhs - result.lhs;
  return result;
}

namespace {

void fold(SuiteResult& suite, const InequalityResult& r) {
  ++suite.instances;
  if (!r.holds) ++suite.failures;
  if (suite.instances == 1 || r.slack < suite.min_slack) suite.min_slack = r.slack;
}

// Weak compositions of `total` into exactly `parts` nonnegative parts.
void for_each_composition(int total, int parts,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> current(parts, 0);
  std::function<void(int, int)> rec = [&](int index, int remaining) {
    if (index == parts - 1) {
      current[index] = remaining;
      fn(current);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      current[index] = v;
      rec(index + 1, remaining - v);
    }
  };
  if (parts >= 1) rec(0, total);
}

}  // namespace

std::vector<SuiteResult> run_verify_suite(std::uint64_t seed) {
  std::vector<SuiteResult> suites;

  {
    SuiteResult suite{"holderBlock", 0, 0, 0.0};
    for (int i = 0; i < 200; ++i) {
      std::uint64_t s = counter_word(seed, 100, i);
      KernelDictionary dict = random_dictionary(s, 8, 5);
      WeightConstraint c = i % 2 == 0 ? WeightConstraint::L1Simplex
                                      : WeightConstraint::L2Sphere;
      CombinationWeights w = random_weights(s, dict.p(), c);
      Eigen::VectorXd alpha = random_alpha(s, dict.m());
      int x_index = static_cast<int>(counter_word(s, 101, 0) %
                                     static_cast<std::uint64_t>(dict.m()));
      double q = 1.1 + 8.9 * counter_uniform(s, 102, 0);
      fold(suite, check_holder_block(dict, w, alpha, x_index, q));
    }
    suites.push_back(suite);
  }

  {
    SuiteResult suite{"firstFactor", 0, 0, 0.0};
    const double q_grid[] = {4.0 / 3.0, 1.5, 2.0, 4.0};
    for (WeightConstraint c :
         {WeightConstraint::L1Simplex, WeightConstraint::L2Sphere}) {
      for (int i = 0; i < 200; ++i) {
        std::uint64_t s = counter_word(seed, 200 + static_cast<int>(c), i);
        KernelDictionary dict = random_dictionary(s, 8, 5);
        CombinationWeights w = random_weights(s, dict.p(), c);
        Eigen::VectorXd alpha = random_alpha(s, dict.m());
        for (double q : q_grid)
          fold(suite, check_first_factor(w, alpha, dict, q));
      }
    }
    suites.push_back(suite);
  }

  {
    SuiteResult suite{"momentBound", 0, 0, 0.0};
    for (int i = 0; i < 50; ++i) {
      std::uint64_t s = counter_word(seed, 300, i);
      KernelDictionary dict = random_dictionary(s, 10, 1);
      for (int r : {2, 4, 6}) fold(suite, check_moment_bound(dict.gram(0), r));
    }
    suites.push_back(suite);
  }

  {
    SuiteResult suite{"multinomialFootnote", 0, 0, 0.0};
    for (int r_prime = 1; r_prime <= 6; ++r_prime)
      for (int parts = 1; parts <= 6; ++parts)
        for_each_composition(r_prime, parts, [&](const std::vector<int>& t) {
          fold(suite, check_multinomial_footnote(r_prime, t));
        });
    suites.push_back(suite);
  }

  {
    SuiteResult suite{"vanishingOddMoments", 0, 0, 0.0};
    for (int m = 1; m <= 5; ++m)
      for (int total = 0; total <= 6; ++total)
        for_each_composition(total, m, [&](const std::vector<int>& s) {
          fold(suite, check_vanishing_odd_moments(m, s));
        });
    suites.push_back(suite);
  }

  return suites;
}

}  // namespace kernbound
