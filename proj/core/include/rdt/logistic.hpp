#pragma once

#include <cstddef>
#include <vector>

namespace rdt {

/// Row-major dense design matrix. Column 0 is expected to be the intercept.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DesignMatrix() = default;
  DesignMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  /// Prepends a column of ones to per-patient covariate rows.
  static DesignMatrix with_intercept(const std::vector<std::vector<double>>& covariate_rows);
};

struct IrlsOptions {
  int max_iter = 50;
  double tol = 1e-8;
  // inverse_logit(15) is numerically one; beyond this the MLE is diverging.
  double separation_bound = 15.0;
};

struct LogisticFit {
  std::vector<double> coefficients;     // log-odds scale, intercept first
  std::vector<double> standard_errors;  // filled only on clean convergence
  bool converged = false;
  int iterations = 0;
  bool separation_detected = false;
};

/// Maximum-likelihood logistic regression via iteratively reweighted least
/// squares with step halving.
///
/// Converges when the largest score component or the step norm drops below
/// tol. A coefficient escaping the separation bound flags separation and
/// stops the fit without standard errors. A rank-deficient design throws
/// SingularDesignError.
LogisticFit fit_logistic(const DesignMatrix& design, const std::vector<int>& labels,
                         const IrlsOptions& options = {});

/// Bernoulli log-likelihood at the given coefficients.
double logistic_log_likelihood(const DesignMatrix& design, const std::vector<int>& labels,
                               const std::vector<double>& coefficients);

/// Fitted response probabilities at the given coefficients.
std::vector<double> logistic_predict(const DesignMatrix& design,
                                     const std::vector<double>& coefficients);

}  // namespace rdt
