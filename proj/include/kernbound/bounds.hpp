#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernbound/kernel.hpp"

namespace kernbound {

enum class BoundFamily { L1, L2 };

std::string family_name(BoundFamily f);

struct MarginConfig {
  double rho = 1.0;
  double delta = 0.05;

  void validate() const;
};

// The inputs the closed-form bounds actually need; lets sweeps run at sizes
// where materializing every Gram would be absurd.
struct DictionarySummary {
  int m = 0;
  std::int64_t p = 0;
  double kernel_ceiling_r2 = 0.0;
  std::vector<double> traces;  // may be empty for synthetic sweeps
};

DictionarySummary summarize(const KernelDictionary& dict);

// (sum_k (r Tr[K_k])^(r/2))^(1/r) / (m rho). r must be even >= 2; the L2
// family additionally requires r in {2, 4}.
double trace_bound(const std::vector<double>& traces, int m, double rho, int r,
                   BoundFamily family);

// Ceiling of ln(p), snapping values within 1e-12 of an integer first.
int ceil_log(std::int64_t p);

// L1: sqrt(2 e ceil(ln p) R^2 / rho^2 / m), defined for p >= 2 (nullopt at
// p = 1; callers fall back to trace_bound with r = 2). L2:
// 2 p^(1/4) sqrt(R^2 / rho^2 / m) for any p >= 1.
std::optional<double> ceiling_bound(std::int64_t p, double r2, double rho, int m,
                                    BoundFamily family);

struct EvenROptimum {
  int r = 2;
  double value = 0.0;
};

// Minimizes p^(1/r) sqrt(r) sqrt(R^2 / rho^2 / m) over even r; the L1 search
// window is [2, 2 ceil(2 ln p) + 4], L2 searches {2, 4}. Ties pick the
// smaller r.
EvenROptimum optimize_even_r(std::int64_t p, double r2, double rho, int m,
                             BoundFamily family);

struct ComparatorResult {
  std::optional<double> value;
  std::string reason;  // set when value is absent
};

// Reference complexity bound for the same function class, grown from a
// covering-number argument. Not applicable when any of its logarithm
// arguments drops to 1 or below.
ComparatorResult comparator_sb(std::int64_t p, double r2, double rho, int m);

enum class BoundForm { Trace, Ceiling, EvenROptimized, ComparatorSB };

std::string form_name(BoundForm f);

struct BoundReport {
  BoundFamily family = BoundFamily::L1;
  BoundForm form = BoundForm::Ceiling;
  std::optional<int> r;
  std::optional<double> value;
  std::string reason;  // set when value is absent
  std::int64_t p = 0;
  int m = 0;
  double rho = 1.0;
  double kernel_ceiling_r2 = 0.0;
};

// One row per (p value, family, form): L1 ceiling (plus an r = 2 trace
// fallback when the p value is 1), L2 ceiling, best even r under L1, and the
// comparator. Rows come back sorted by (p, family, form).
std::vector<BoundReport> sweep_bounds(const DictionarySummary& summary, double rho,
                                      const std::vector<std::int64_t>& p_values);

std::string sweep_to_csv(const std::vector<BoundReport>& rows);

}  // namespace kernbound
