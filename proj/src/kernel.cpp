#include "kernbound/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "kernbound/parallel.hpp"

namespace kernbound {

namespace {

double ipow(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

double max_abs_entry(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

// Largest |a_ij - a_ji| relative to max(1, largest |entry|). NaN anywhere
// makes the defect infinite.
double symmetric_defect(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst / std::max(1.0, max_abs_entry(a));
}

}  // namespace

Sample::Sample(Eigen::MatrixXd points, std::optional<std::vector<int>> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    throw ParamError("sample needs at least one point and one feature");
  if (!points_.allFinite()) throw DataError("sample contains non-finite coordinates");
  if (labels_) {
    if (static_cast<int>(labels_->size()) != size())
      throw ParamError("label count does not match point count");
    for (int y : *labels_)
      if (y != 1 && y != -1) throw DataError("labels must be +1 or -1");
  }
}

const std::vector<int>& Sample::labels() const {
  if (!labels_) throw ParamError("sample has no labels");
  return *labels_;
}

KernelSpec KernelSpec::linear(std::string name) {
  KernelSpec s;
  s.kind = Kind::Linear;
  s.name = std::move(name);
  return s;
}

KernelSpec KernelSpec::polynomial(int degree, double offset, std::string name) {
  KernelSpec s;
  s.kind = Kind::Polynomial;
  s.degree = degree;
  s.offset = offset;
  s.name = std::move(name);
  s.validate();
  return s;
}

KernelSpec KernelSpec::gaussian(double gamma, std::string name) {
  KernelSpec s;
  s.kind = Kind::Gaussian;
  s.gamma = gamma;
  s.name = std::move(name);
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (kind == Kind::Polynomial) {
    if (degree < 1) throw ParamError("polynomial degree must be a positive integer");
    if (!(offset >= 0.0)) throw ParamError("polynomial offset must be >= 0");
  }
  if (kind == Kind::Gaussian && !(gamma > 0.0))
    throw ParamError("gaussian gamma must be > 0");
}

std::string KernelSpec::kind_name() const {
  switch (kind) {
    case Kind::Linear: return "linear";
    case Kind::Polynomial: return "polynomial";
    case Kind::Gaussian: return "gaussian";
  }
  return "unknown";
}

double KernelSpec::eval(const Eigen::RowVectorXd& a,
                        const Eigen::RowVectorXd& b) const {
  switch (kind) {
    case Kind::Linear:
      return a.dot(b);
    case Kind::Polynomial:
      return ipow(a.dot(b) + offset, degree);
    case Kind::Gaussian:
      return std::exp(-gamma * (a - b).squaredNorm());
  }
  return 0.0;
}

GramMatrix::GramMatrix(Eigen::MatrixXd entries, double trace)
    : entries_(std::move(entries)), trace_(trace) {}

GramMatrix GramMatrix::from_entries(Eigen::MatrixXd entries) {
  if (entries.rows() != entries.cols())
    throw ParamError("gram matrix must be square");
  if (!entries.allFinite())
    throw DataError("gram matrix contains non-finite entries");
  if (symmetric_defect(entries) > 1e-10)
    throw DataError("gram matrix is not symmetric within tolerance");
  double trace = 0.0;
  for (Eigen::Index i = 0; i < entries.rows(); ++i) trace += entries(i, i);
  return GramMatrix(std::move(entries), trace);
}

void GramMatrix::ensure_eigen_range() const {
  std::call_once(range_->once, [this] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_,
                                                          Eigen::EigenvaluesOnly);
    range_->min = solver.eigenvalues().minCoeff();
    range_->max = solver.eigenvalues().maxCoeff();
  });
}

double GramMatrix::min_eigenvalue() const {
  ensure_eigen_range();
  return range_->min;
}

double GramMatrix::max_eigenvalue() const {
  ensure_eigen_range();
  return range_->max;
}

GramMatrix compute_gram(const Sample& sample, const KernelSpec& spec) {
  spec.validate();
  const int m = sample.size();
  Eigen::MatrixXd g(m, m);
  const Eigen::MatrixXd& x = sample.points();
  // Row-parallel; every entry is a self-contained evaluation, so the
  // partition cannot change any bit of the result.
  parallel_chunks(m, 0, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      for (int j = static_cast<int>(i); j < m; ++j) {
        double e = spec.eval(x.row(i), x.row(j));
        g(i, j) = e;
        g(j, i) = e;
      }
  });
  double trace = 0.0;
  for (int i = 0; i < m; ++i) trace += g(i, i);
  return GramMatrix(std::move(g), trace);
}

Eigen::MatrixXd compute_cross_gram(const Sample& query, const Sample& train,
                                   const KernelSpec& spec) {
  spec.validate();
  if (query.dim() != train.dim())
    throw ParamError("query and train samples have different dimensions");
  Eigen::MatrixXd g(query.size(), train.size());
  const Eigen::MatrixXd& q = query.points();
  const Eigen::MatrixXd& x = train.points();
  parallel_chunks(query.size(), 0, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      for (int j = 0; j < train.size(); ++j) g(i, j) = spec.eval(q.row(i), x.row(j));
  });
  return g;
}

PsdDiagnostics validate_psd(const GramMatrix& g, double tol) {
  if (!(tol > 0.0)) throw ParamError("psd tolerance must be > 0");
  if (!g.entries().allFinite())
    throw DataError("gram matrix contains non-finite entries");
  PsdDiagnostics d;
  d.symmetric_defect = symmetric_defect(g.entries());
  d.min_eig = g.min_eigenvalue();
  d.max_eig = g.max_eigenvalue();
  d.pass = d.min_eig >= -tol * std::max(d.max_eig, 1.0) && d.symmetric_defect <= tol;
  return d;
}

double quadratic_form(const GramMatrix& g, const Eigen::VectorXd& v) {
  if (v.size() != g.size())
    throw ParamError("vector length does not match gram size");
  double raw = v.dot(g.entries() * v);
  if (raw >= 0.0) return raw;
  double scale = std::max(g.max_eigenvalue(), 0.0);
  if (raw >= -1e-12 * v.squaredNorm() * scale) return 0.0;
  std::ostringstream msg;
  msg << "quadratic form is negative (" << raw << "); matrix is not PSD";
  throw DataError(msg.str());
}

std::string constraint_name(WeightConstraint c) {
  switch (c) {
    case WeightConstraint::L1Simplex: return "l1-simplex";
    case WeightConstraint::L2Sphere: return "l2-sphere";
    case WeightConstraint::L2SphereSigned: return "l2-sphere-signed";
  }
  return "unknown";
}

double CombinationWeights::feasibility_defect() const {
  if (mu.size() == 0) return std::numeric_limits<double>::infinity();
  double defect = 0.0;
  if (constraint != WeightConstraint::L2SphereSigned)
    defect = std::max(defect, -mu.minCoeff());
  if (constraint == WeightConstraint::L1Simplex)
    defect = std::max(defect, std::abs(mu.sum() - 1.0));
  else
    defect = std::max(defect, std::abs(mu.squaredNorm() - 1.0));
  return defect;
}

bool CombinationWeights::feasible(double tol) const {
  return feasibility_defect() <= tol;
}

void CombinationWeights::require_feasible(double tol) const {
  if (feasible(tol)) return;
  std::ostringstream msg;
  msg << "weights violate " << constraint_name(constraint) << " constraint by "
      << feasibility_defect();
  throw ParamError(msg.str());
}

KernelDictionary build_dictionary(const Sample& sample,
                                  const std::vector<KernelSpec>& specs,
                                  CeilingPolicy policy, double user_r2,
                                  double psd_tol) {
  if (specs.empty()) throw ParamError("dictionary needs at least one kernel");
  KernelDictionary dict;
  dict.m_ = sample.size();
  dict.specs_ = specs;
  std::set<std::string> names;
  for (size_t k = 0; k < dict.specs_.size(); ++k) {
    KernelSpec& s = dict.specs_[k];
    s.validate();
    if (s.name.empty()) {
      std::ostringstream n;
      n << s.kind_name() << k;
      s.name = n.str();
    }
    if (!names.insert(s.name).second)
      throw ParamError("duplicate kernel name: " + s.name);
  }
  double sample_max_diag = 0.0;
  for (const KernelSpec& s : dict.specs_) {
    GramMatrix g = compute_gram(sample, s);
    PsdDiagnostics d = validate_psd(g, psd_tol);
    if (!d.pass) {
      std::ostringstream msg;
      msg << "kernel '" << s.name << "' failed the PSD check (min eigenvalue "
          << d.min_eig << ", symmetry defect " << d.symmetric_defect << ")";
      throw DataError(msg.str());
    }
    sample_max_diag = std::max(sample_max_diag, g.entries().diagonal().maxCoeff());
    dict.grams_.push_back(std::move(g));
  }
  if (policy == CeilingPolicy::FromSample) {
    if (!(sample_max_diag > 0.0))
      throw DataError("all kernel diagonals are zero; diagonal ceiling undefined");
    dict.kernel_ceiling_r2_ = sample_max_diag;
  } else {
    if (user_r2 < sample_max_diag) {
      std::ostringstream msg;
      msg << "user diagonal ceiling " << user_r2 << " is below the sample max "
          << sample_max_diag;
      throw ParamError(msg.str());
    }
    if (!(user_r2 > 0.0)) throw ParamError("diagonal ceiling must be > 0");
    dict.kernel_ceiling_r2_ = user_r2;
  }
  return dict;
}

std::vector<double> KernelDictionary::traces() const {
  std::vector<double> t;
  t.reserve(grams_.size());
  for (const GramMatrix& g : grams_) t.push_back(g.trace());
  return t;
}

GramMatrix combine_raw(const KernelDictionary& dict, const Eigen::VectorXd& mu) {
  if (mu.size() != dict.p())
    throw ParamError("weight count does not match dictionary size");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dict.m(), dict.m());
  double trace = 0.0;
  for (int k = 0; k < dict.p(); ++k) {
    acc.noalias() += mu(k) * dict.gram(k).entries();
    trace += mu(k) * dict.gram(k).trace();
  }
  return GramMatrix(std::move(acc), trace);
}

GramMatrix combine(const KernelDictionary& dict, const CombinationWeights& w) {
  w.require_feasible();
  return combine_raw(dict, w.mu);
}

}  // namespace kernbound
