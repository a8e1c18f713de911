#include "kernbound/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kernbound/io.hpp"

namespace kernbound {

namespace {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const int p = static_cast<int>(v.size());
  std::vector<double> sorted(v.data(), v.data() + p);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  int support = 0;
  for (int k = 0; k < p; ++k) {
    cumulative += sorted[k];
    double candidate = (cumulative - 1.0) / (k + 1);
    if (sorted[k] - candidate > 0.0) {
      threshold = candidate;
      support = k + 1;
    }
  }
  (void)support;
  Eigen::VectorXd out(p);
  for (int k = 0; k < p; ++k) out(k) = std::max(v(k) - threshold, 0.0);
  return out;
}

Eigen::VectorXd project_to_sphere(const Eigen::VectorXd& v) {
  Eigen::VectorXd clamped = v.cwiseMax(0.0);
  double norm = clamped.norm();
  if (norm == 0.0)
    return Eigen::VectorXd::Constant(v.size(),
                                     1.0 / std::sqrt(static_cast<double>(v.size())));
  return clamped / norm;
}

Eigen::VectorXd project_weights(const Eigen::VectorXd& v, BoundFamily family) {
  return family == BoundFamily::L1 ? project_to_simplex(v) : project_to_sphere(v);
}

struct InnerSolution {
  Eigen::VectorXd a;
  double objective = 0.0;
};

double dual_objective(const Eigen::VectorXd& a, const Eigen::MatrixXd& k,
                      const Eigen::VectorXd& y) {
  Eigen::VectorXd beta = a.cwiseProduct(y);
  return a.sum() - 0.5 * beta.dot(k * beta);
}

// Projected gradient ascent on the box [0, C]^m for the no-offset
// soft-margin dual.
InnerSolution solve_inner(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                          double reg_c, double lipschitz, Eigen::VectorXd a,
                          const TrainOptions& options) {
  double step = 1.0 / std::max(lipschitz, 1e-12);
  double objective = dual_objective(a, k, y);
  for (int iter = 0; iter < options.max_inner; ++iter) {
    Eigen::VectorXd beta = a.cwiseProduct(y);
    Eigen::VectorXd grad =
        Eigen::VectorXd::Ones(a.size()) - y.cwiseProduct(k * beta);
    a = (a + step * grad).cwiseMax(0.0).cwiseMin(reg_c);
    double next = dual_objective(a, k, y);
    if (std::abs(next - objective) <=
        options.inner_tol * std::max(1.0, std::abs(objective))) {
      objective = next;
      break;
    }
    objective = next;
  }
  return {std::move(a), objective};
}

double weight_lipschitz(const KernelDictionary& dict, const Eigen::VectorXd& mu) {
  double sum = 0.0;
  for (int k = 0; k < dict.p(); ++k)
    sum += std::abs(mu(k)) * std::max(dict.gram(k).max_eigenvalue(), 0.0);
  return sum;
}

}  // namespace

void TrainOptions::validate() const {
  if (!(reg_c > 0.0)) throw ParamError("reg_c must be > 0");
  if (max_outer < 1) throw ParamError("max_outer must be >= 1");
  if (!(tol > 0.0)) throw ParamError("tol must be > 0");
  if (max_inner < 1) throw ParamError("max_inner must be >= 1");
  if (!(inner_tol > 0.0)) throw ParamError("inner_tol must be > 0");
}

Model train(const Sample& sample, const KernelDictionary& dict,
            BoundFamily family, const TrainOptions& options) {
  options.validate();
  if (sample.size() != dict.m())
    throw ParamError("sample size does not match dictionary");
  const std::vector<int>& labels = sample.labels();
  const int m = sample.size();
  const int p = dict.p();
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DataError("training sample needs both labels present");
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) y(i) = labels[i];

  Eigen::VectorXd mu =
      family == BoundFamily::L1
          ? Eigen::VectorXd::Constant(p, 1.0 / p)
          : Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);

  Model model;
  model.family = family;
  model.kernel_specs = dict.specs();
  model.train_sample_ref = hash_hex(sample_hash(sample));
  model.converged = false;

  GramMatrix combined = combine_raw(dict, mu);
  InnerSolution inner = solve_inner(combined.entries(), y, options.reg_c,
                                    weight_lipschitz(dict, mu), a, options);
  a = inner.a;
  double objective = inner.objective;
  model.objective_log.push_back(objective);

  double step = 1.0;
  for (int outer = 1; outer < options.max_outer && p > 1; ++outer) {
    Eigen::VectorXd beta = a.cwiseProduct(y);
    Eigen::VectorXd grad(p);
    for (int k = 0; k < p; ++k)
      grad(k) = -0.5 * beta.dot(dict.gram(k).entries() * beta);
    double scale = grad.cwiseAbs().maxCoeff();
    if (scale > 0.0) step = std::min(step, 1.0 / scale);

    bool accepted = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::VectorXd candidate = project_weights(mu - step * grad, family);
      GramMatrix candidate_gram = combine_raw(dict, candidate);
      InnerSolution candidate_inner =
          solve_inner(candidate_gram.entries(), y, options.reg_c,
                      weight_lipschitz(dict, candidate), a, options);
      if (candidate_inner.objective <=
          objective + 1e-12 * std::max(1.0, std::abs(objective))) {
        mu = candidate;
        a = candidate_inner.a;
        double next = std::min(candidate_inner.objective, objective);
        model.objective_log.push_back(next);
        accepted = true;
        if (std::abs(next - objective) <=
            options.tol * std::max(1.0, std::abs(objective))) {
          objective = next;
          model.converged = true;
        } else {
          objective = next;
        }
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || model.converged) {
      if (!accepted) model.converged = true;  // no improving direction remains
      break;
    }
  }
  if (p == 1) model.converged = true;

  model.mu.mu = mu;
  model.mu.constraint = family == BoundFamily::L1 ? WeightConstraint::L1Simplex
                                                  : WeightConstraint::L2Sphere;
  model.mu.require_feasible();
  model.alpha = a.cwiseProduct(y);
  return model;
}

Eigen::VectorXd predict(const Model& model,
                        const std::vector<Eigen::MatrixXd>& cross_grams) {
  if (static_cast<int>(cross_grams.size()) != model.mu.mu.size())
    throw ParamError("cross-Gram count does not match weight count");
  if (cross_grams.empty()) throw ParamError("no cross-Gram matrices given");
  Eigen::Index n = cross_grams.front().rows();
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
  for (size_t k = 0; k < cross_grams.size(); ++k) {
    const Eigen::MatrixXd& g = cross_grams[k];
    if (g.rows() != n || g.cols() != model.alpha.size())
      throw ParamError("cross-Gram matrix has wrong shape");
    scores.noalias() += model.mu.mu(static_cast<int>(k)) * (g * model.alpha);
  }
  return scores;
}

double margin_loss(const Eigen::VectorXd& scores, const std::vector<int>& labels,
                   double rho) {
  if (scores.size() == 0) throw ParamError("no scores given");
  if (static_cast<size_t>(scores.size()) != labels.size())
    throw ParamError("scores and labels differ in length");
  if (!(rho > 0.0)) throw ParamError("rho must be > 0");
  int violations = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (labels[i] * scores(i) <= rho) ++violations;
  return static_cast<double>(violations) / static_cast<double>(scores.size());
}

std::string BoundChoice::render() const {
  switch (kind) {
    case Kind::TraceR: {
      std::ostringstream s;
      s << "traceR(" << r << ")";
      return s.str();
    }
    case Kind::Ceiling: return "ceiling";
    case Kind::EmpiricalExact: return "empiricalExact";
    case Kind::EmpiricalMc: return "empiricalMC";
  }
  return "unknown";
}

double admissible_rho_max(const Model& model, const KernelDictionary& dict) {
  double q = quadratic_form(combine(dict, model.mu), model.alpha);
  if (q <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(q);
}

Certificate certify(const Model& model, const Sample& sample,
                    const KernelDictionary& dict, const MarginConfig& config,
                    const BoundChoice& choice) {
  config.validate();
  if (sample.size() != dict.m())
    throw ParamError("sample size does not match dictionary");
  double rho_max = admissible_rho_max(model, dict);
  if (!(config.rho <= rho_max * (1.0 + 1e-9))) {
    std::ostringstream msg;
    msg << "rho = " << config.rho
        << " places the model outside the hypothesis ball; largest admissible rho = "
        << rho_max;
    throw ParamError(msg.str());
  }

  Certificate cert;
  cert.rho = config.rho;
  cert.delta = config.delta;
  cert.m = dict.m();
  cert.p = dict.p();
  cert.bound_choice = choice.render();
  cert.dictionary_hash = dictionary_hash(dict);

  GramMatrix combined = combine(dict, model.mu);
  Eigen::VectorXd scores = combined.entries() * model.alpha;
  cert.margin_loss = margin_loss(scores, sample.labels(), config.rho);

  HypothesisFamily family{model.family == BoundFamily::L1 ? FamilyTag::L1
                                                          : FamilyTag::L2,
                          config.rho};
  double bound_value = 0.0;
  switch (choice.kind) {
    case BoundChoice::Kind::TraceR:
      bound_value = trace_bound(dict.traces(), dict.m(), config.rho, choice.r,
                                model.family);
      break;
    case BoundChoice::Kind::Ceiling: {
      auto v = ceiling_bound(dict.p(), dict.kernel_ceiling_r2(), config.rho,
                             dict.m(), model.family);
      // p = 1 has no L1 ceiling form; the r = 2 trace bound covers it.
      bound_value = v ? *v
                      : trace_bound(dict.traces(), dict.m(), config.rho, 2,
                                    model.family);
      break;
    }
    case BoundChoice::Kind::EmpiricalExact:
      bound_value = estimate_exact(dict, family, choice.exact_cap).value;
      break;
    case BoundChoice::Kind::EmpiricalMc:
      bound_value =
          estimate_mc(dict, family, choice.mc_trials, choice.mc_seed).value;
      cert.seed = choice.mc_seed;
      break;
  }
  cert.complexity_term = 2.0 * bound_value;
  cert.confidence_term =
      2.0 * std::sqrt(std::log(2.0 / config.delta) / (2.0 * dict.m()));
  cert.total = cert.margin_loss + cert.complexity_term + cert.confidence_term;
  return cert;
}

}  // namespace kernbound
