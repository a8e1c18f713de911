#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kernbound/errors.hpp"

namespace kernbound {

class KernelDictionary;

// Point set with optional ±1 labels; rows of points() are the points.
class Sample {
 public:
  explicit Sample(Eigen::MatrixXd points,
                  std::optional<std::vector<int>> labels = std::nullopt);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }
  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;

 private:
  Eigen::MatrixXd points_;
  std::optional<std::vector<int>> labels_;
};

struct KernelSpec {
  enum class Kind { Linear, Polynomial, Gaussian };

  Kind kind = Kind::Linear;
  std::string name;
  int degree = 2;       // polynomial only, >= 1
  double offset = 0.0;  // polynomial only, >= 0
  double gamma = 1.0;   // gaussian only, > 0

  static KernelSpec linear(std::string name = "");
  static KernelSpec polynomial(int degree, double offset, std::string name = "");
  static KernelSpec gaussian(double gamma, std::string name = "");

  void validate() const;
  std::string kind_name() const;
  double eval(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const;
};

// Symmetric kernel evaluation matrix with a cached trace. The eigenvalue
// range is computed once on first use and shared across copies.
class GramMatrix {
 public:
  // Accepts externally produced entries (cache loads, tests). Requires a
  // square matrix, symmetric to 1e-10 relative when entries are finite.
  static GramMatrix from_entries(Eigen::MatrixXd entries);

  int size() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double trace() const { return trace_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  double min_eigenvalue() const;
  double max_eigenvalue() const;

 private:
  GramMatrix(Eigen::MatrixXd entries, double trace);
  void ensure_eigen_range() const;

  struct EigenRange {
    std::once_flag once;
    double min = 0.0;
    double max = 0.0;
  };

  Eigen::MatrixXd entries_;
  double trace_ = 0.0;
  std::shared_ptr<EigenRange> range_ = std::make_shared<EigenRange>();

  friend GramMatrix compute_gram(const Sample&, const KernelSpec&);
  friend GramMatrix combine_raw(const KernelDictionary&, const Eigen::VectorXd&);
};

struct PsdDiagnostics {
  double min_eig = 0.0;
  double max_eig = 0.0;
  double symmetric_defect = 0.0;
  bool pass = false;
};

// Kernel evaluation between every pair of sample points.
GramMatrix compute_gram(const Sample& sample, const KernelSpec& spec);

// Kernel evaluations between query rows and train rows (query.size() x
// train.size()).
Eigen::MatrixXd compute_cross_gram(const Sample& query, const Sample& train,
                                   const KernelSpec& spec);

// Symmetric-eigensolver screen: pass when min_eig >= -tol * max(max_eig, 1)
// and the symmetry defect is within tol. Non-finite entries raise DataError.
PsdDiagnostics validate_psd(const GramMatrix& g, double tol = 1e-8);

// v' g v with tiny negative results (within -1e-12 * |v|^2 * max_eig of 0)
// clamped to 0; anything more negative raises DataError.
double quadratic_form(const GramMatrix& g, const Eigen::VectorXd& v);

enum class WeightConstraint { L1Simplex, L2Sphere, L2SphereSigned };

std::string constraint_name(WeightConstraint c);

struct CombinationWeights {
  Eigen::VectorXd mu;
  WeightConstraint constraint = WeightConstraint::L1Simplex;

  // Worst violation of the constraint set conditions.
  double feasibility_defect() const;
  bool feasible(double tol = 1e-9) const;
  void require_feasible(double tol = 1e-9) const;
};

enum class CeilingPolicy { FromSample, UserValue };

// Base kernels evaluated on one sample, plus the shared diagonal ceiling
// R^2 used by the closed-form bounds.
class KernelDictionary {
 public:
  int m() const { return m_; }
  int p() const { return static_cast<int>(grams_.size()); }
  const GramMatrix& gram(int k) const { return grams_.at(k); }
  const std::vector<GramMatrix>& grams() const { return grams_; }
  const KernelSpec& spec(int k) const { return specs_.at(k); }
  const std::vector<KernelSpec>& specs() const { return specs_; }
  double kernel_ceiling_r2() const { return kernel_ceiling_r2_; }
  std::vector<double> traces() const;

 private:
  KernelDictionary() = default;

  int m_ = 0;
  std::vector<GramMatrix> grams_;
  std::vector<KernelSpec> specs_;
  double kernel_ceiling_r2_ = 0.0;

  friend KernelDictionary build_dictionary(const Sample&,
                                           const std::vector<KernelSpec>&,
                                           CeilingPolicy, double, double);
};

// Validates every Gram as PSD (naming the offender on failure) and fixes the
// diagonal ceiling: FromSample takes the max diagonal entry, UserValue must
// be at least that max.
KernelDictionary build_dictionary(const Sample& sample,
                                  const std::vector<KernelSpec>& specs,
                                  CeilingPolicy policy = CeilingPolicy::FromSample,
                                  double user_r2 = 0.0, double psd_tol = 1e-8);

// Weighted sum of the base Grams; trace is the weighted sum of the cached
// traces. combine checks feasibility of mu, combine_raw does not.
GramMatrix combine(const KernelDictionary& dict, const CombinationWeights& w);
GramMatrix combine_raw(const KernelDictionary& dict, const Eigen::VectorXd& mu);

}  // namespace kernbound
