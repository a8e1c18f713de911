#include "kernbound/rademacher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "kernbound/parallel.hpp"
#include "kernbound/rng.hpp"

namespace kernbound {

namespace {

// Per-kernel quadratic forms with the PSD clamp/error handled by
// quadratic_form.
Eigen::VectorXd quadratic_forms_all(const KernelDictionary& dict,
                                    const Eigen::VectorXd& v) {
  Eigen::VectorXd u(dict.p());
  for (int k = 0; k < dict.p(); ++k) u(k) = quadratic_form(dict.gram(k), v);
  return u;
}

double mean_and_std_error(std::vector<double>& values, int m, double* std_error) {
  double n = static_cast<double>(values.size());
  double mean = pairwise_sum(values) / n;
  double se = 0.0;
  if (values.size() > 1) {
    for (double& v : values) {
      double d = v - mean;
      v = d * d;
    }
    double var = pairwise_sum(values) / (n - 1.0);
    se = std::sqrt(var / n) / m;
  }
  *std_error = se;
  return mean / m;
}

// All weight grid points for the oracle. Simplex grids use exact multiples
// i/N; sphere grids reuse them as directions and normalize.
std::vector<Eigen::VectorXd> oracle_grid(int p, double step, FamilyTag tag) {
  int n = std::max<int>(1, static_cast<int>(std::llround(1.0 / step)));
  std::vector<Eigen::VectorXd> simplex;
  if (p == 1) {
    simplex.push_back(Eigen::VectorXd::Ones(1));
  } else if (p == 2) {
    for (int i = 0; i <= n; ++i) {
      Eigen::VectorXd w(2);
      w << static_cast<double>(i) / n, static_cast<double>(n - i) / n;
      simplex.push_back(w);
    }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        Eigen::VectorXd w(3);
        w << static_cast<double>(i) / n, static_cast<double>(j) / n,
            static_cast<double>(n - i - j) / n;
        simplex.push_back(w);
      }
  }
  if (tag == FamilyTag::L1) return simplex;
  std::vector<Eigen::VectorXd> sphere;
  for (const Eigen::VectorXd& w : simplex) {
    Eigen::VectorXd v = w / w.norm();
    if (tag == FamilyTag::L2) {
      sphere.push_back(v);
      continue;
    }
    // Signed sphere: every sign pattern of the nonzero coordinates.
    int nonzero = 0;
    for (int k = 0; k < p; ++k)
      if (v(k) != 0.0) ++nonzero;
    for (int bits = 0; bits < (1 << nonzero); ++bits) {
      Eigen::VectorXd s = v;
      int pos = 0;
      for (int k = 0; k < p; ++k) {
        if (s(k) == 0.0) continue;
        if (bits & (1 << pos)) s(k) = -s(k);
        ++pos;
      }
      sphere.push_back(s);
    }
  }
  return sphere;
}

}  // namespace

std::string family_tag_name(FamilyTag t) {
  switch (t) {
    case FamilyTag::L1: return "L1";
    case FamilyTag::L2: return "L2";
    case FamilyTag::L2Signed: return "L2Signed";
  }
  return "unknown";
}

BoundFamily bound_family(FamilyTag t) {
  return t == FamilyTag::L1 ? BoundFamily::L1 : BoundFamily::L2;
}

void HypothesisFamily::validate() const {
  if (!(rho > 0.0)) throw ParamError("rho must be > 0");
}

SigmaVector::SigmaVector(Eigen::VectorXd signs) : signs_(std::move(signs)) {
  if (signs_.size() < 1) throw ParamError("sign vector is empty");
  for (Eigen::Index i = 0; i < signs_.size(); ++i)
    if (signs_(i) != 1.0 && signs_(i) != -1.0)
      throw ParamError("sign vector entries must be exactly +1 or -1");
}

SigmaVector sigma_for_trial(std::uint64_t seed, std::uint64_t trial, int m) {
  if (m < 1) throw ParamError("m must be >= 1");
  Eigen::VectorXd signs(m);
  std::uint64_t word = 0;
  for (int i = 0; i < m; ++i) {
    if (i % 64 == 0) word = counter_word(seed, trial, i / 64);
    signs(i) = (word >> (i % 64)) & 1 ? 1.0 : -1.0;
  }
  return SigmaVector(std::move(signs));
}

double sup_from_quadratic_forms(const Eigen::VectorXd& u,
                                const HypothesisFamily& family) {
  family.validate();
  if (u.size() < 1) throw ParamError("quadratic form list is empty");
  if (family.tag == FamilyTag::L1) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) best = std::max(best, u(k));
    return std::sqrt(best) / family.rho;
  }
  double sum_sq = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    double c = std::max(u(k), 0.0);
    sum_sq += c * c;
  }
  return std::sqrt(std::sqrt(sum_sq)) / family.rho;
}

double sup_closed_form(const KernelDictionary& dict, const SigmaVector& sigma,
                       const HypothesisFamily& family) {
  if (sigma.size() != dict.m())
    throw ParamError("sign vector length does not match dictionary");
  return sup_from_quadratic_forms(quadratic_forms_all(dict, sigma.signs()), family);
}

std::vector<RademacherEstimate> estimate_mc_many(
    const KernelDictionary& dict, const std::vector<HypothesisFamily>& families,
    std::int64_t n_trials, std::uint64_t seed, int threads) {
  if (families.empty()) throw ParamError("no families requested");
  for (const HypothesisFamily& f : families) f.validate();
  if (n_trials < 1) throw ParamError("trial count must be >= 1");
  const int m = dict.m();
  std::vector<std::vector<double>> sups(families.size(),
                                        std::vector<double>(n_trials));
  parallel_chunks(n_trials, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t t = begin; t < end; ++t) {
      SigmaVector sigma = sigma_for_trial(seed, t, m);
      Eigen::VectorXd u = quadratic_forms_all(dict, sigma.signs());
      for (size_t f = 0; f < families.size(); ++f)
        sups[f][t] = sup_from_quadratic_forms(u, families[f]);
    }
  });
  std::vector<RademacherEstimate> out;
  for (size_t f = 0; f < families.size(); ++f) {
    RademacherEstimate e;
    e.method = RademacherEstimate::Method::MonteCarlo;
    e.trials = n_trials;
    e.seed = seed;
    e.family = families[f].tag;
    e.rho = families[f].rho;
    e.m = m;
    e.p = dict.p();
    e.value = mean_and_std_error(sups[f], m, &e.std_error);
    out.push_back(e);
  }
  return out;
}

RademacherEstimate estimate_mc(const KernelDictionary& dict,
                               const HypothesisFamily& family,
                               std::int64_t n_trials, std::uint64_t seed,
                               int threads) {
  return estimate_mc_many(dict, {family}, n_trials, seed, threads).front();
}

std::vector<RademacherEstimate> estimate_exact_many(
    const KernelDictionary& dict, const std::vector<HypothesisFamily>& families,
    int exact_cap) {
  if (families.empty()) throw ParamError("no families requested");
  for (const HypothesisFamily& f : families) f.validate();
  if (exact_cap < 1 || exact_cap > kHardExactCap) {
    std::ostringstream msg;
    msg << "exact cap must be in [1, " << kHardExactCap << "]";
    throw ParamError(msg.str());
  }
  const int m = dict.m();
  if (m > exact_cap) {
    std::ostringstream msg;
    msg << "exact enumeration limited to m <= " << exact_cap << ", got m = " << m;
    throw ParamError(msg.str());
  }
  const int p = dict.p();
  // Gray-code walk over the half-space with the last sign fixed at +1; each
  // flip updates K_k sigma and the quadratic forms in O(m) per kernel.
  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(m);
  std::vector<Eigen::VectorXd> ksig(p);
  Eigen::VectorXd u(p);
  for (int k = 0; k < p; ++k) {
    ksig[k] = dict.gram(k).entries() * sigma;
    u(k) = sigma.dot(ksig[k]);
  }
  std::vector<double> sums(families.size(), 0.0);
  std::vector<double> compensations(families.size(), 0.0);
  auto accumulate = [&] {
    for (size_t f = 0; f < families.size(); ++f) {
      double term = sup_from_quadratic_forms(u, families[f]);
      double y = term - compensations[f];
      double t = sums[f] + y;
      compensations[f] = (t - sums[f]) - y;
      sums[f] = t;
    }
  };
  accumulate();
  const std::uint64_t half = 1ull << (m - 1);
  for (std::uint64_t step = 1; step < half; ++step) {
    int i = std::countr_zero(step);
    double old_sign = sigma(i);
    for (int k = 0; k < p; ++k) {
      u(k) += 4.0 * (dict.gram(k)(i, i) - old_sign * ksig[k](i));
      ksig[k].noalias() -= 2.0 * old_sign * dict.gram(k).entries().col(i);
    }
    sigma(i) = -old_sign;
    accumulate();
  }
  std::vector<RademacherEstimate> out;
  for (size_t f = 0; f < families.size(); ++f) {
    RademacherEstimate e;
    e.method = RademacherEstimate::Method::ExactEnumeration;
    e.trials = static_cast<std::int64_t>(1) << m;
    e.std_error = 0.0;
    e.family = families[f].tag;
    e.rho = families[f].rho;
    e.m = m;
    e.p = p;
    e.value = sums[f] / (static_cast<double>(m) * static_cast<double>(half));
    out.push_back(e);
  }
  return out;
}

RademacherEstimate estimate_exact(const KernelDictionary& dict,
                                  const HypothesisFamily& family, int exact_cap) {
  return estimate_exact_many(dict, {family}, exact_cap).front();
}

BruteForceSupResult brute_force_sup(const KernelDictionary& dict,
                                    const SigmaVector& sigma,
                                    const HypothesisFamily& family,
                                    double grid_step) {
  family.validate();
  if (dict.p() > 3) throw ParamError("oracle grid supports p <= 3");
  if (dict.m() > 6) throw ParamError("oracle grid supports m <= 6");
  if (sigma.size() != dict.m())
    throw ParamError("sign vector length does not match dictionary");
  if (!(grid_step > 0.0 && grid_step <= 0.25))
    throw ParamError("grid step must lie in (0, 0.25]");
  Eigen::VectorXd u = quadratic_forms_all(dict, sigma.signs());
  double best_val = -1.0;
  Eigen::VectorXd best_mu;
  for (const Eigen::VectorXd& mu : oracle_grid(dict.p(), grid_step, family.tag)) {
    double s = std::max(mu.dot(u), 0.0);
    double val = std::sqrt(s) / family.rho;
    if (val > best_val) {
      best_val = val;
      best_mu = mu;
    }
  }
  BruteForceSupResult result;
  result.grid_max = best_val;
  GramMatrix combined = combine_raw(dict, best_mu);
  double s_star = sigma.signs().dot(combined.entries() * sigma.signs());
  if (s_star <= 0.0) {
    result.degenerate = true;
    return result;
  }
  // Explicit maximizer alpha* = sigma / (rho sqrt(s*)); re-derive the value
  // and the constraint activity through it.
  Eigen::VectorXd alpha = sigma.signs() / (family.rho * std::sqrt(s_star));
  Eigen::VectorXd k_alpha = combined.entries() * alpha;
  result.achiever_check = sigma.signs().dot(k_alpha);
  double membership = alpha.dot(k_alpha) * family.rho * family.rho;
  result.membership_defect = std::abs(membership - 1.0);
  return result;
}

}  // namespace kernbound
