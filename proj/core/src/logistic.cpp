#include "rdt/logistic.hpp"

#include <cmath>
#include <limits>

#include "rdt/errors.hpp"
#include "rdt/population.hpp"

namespace rdt {

namespace {

// Cholesky factorization in place; returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) {
      diag -= a[j * n + k] * a[j * n + k];
    }
    if (diag <= 0.0 || !std::isfinite(diag)) {
      return false;
    }
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double value = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) {
        value -= a[i * n + k] * a[j * n + k];
      }
      a[i * n + j] = value / root;
    }
  }
  return true;
}

// Solves L L^T x = b given the Cholesky factor L (lower triangle of a).
std::vector<double> cholesky_solve(const std::vector<double>& a, std::size_t n,
                                   std::vector<double> b) {
  for (std::size_t i = 0; i < n; ++i) {
    double value = b[i];
    for (std::size_t k = 0; k < i; ++k) {
      value -= a[i * n + k] * b[k];
    }
    b[i] = value / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double value = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) {
      value -= a[k * n + ii] * b[k];
    }
    b[ii] = value / a[ii * n + ii];
  }
  return b;
}

// Inverse from the Cholesky factor, column by column.
std::vector<double> cholesky_inverse(const std::vector<double>& a, std::size_t n) {
  std::vector<double> inverse(n * n, 0.0);
  std::vector<double> unit(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    unit.assign(n, 0.0);
    unit[j] = 1.0;
    const auto column = cholesky_solve(a, n, unit);
    for (std::size_t i = 0; i < n; ++i) {
      inverse[i * n + j] = column[i];
    }
  }
  return inverse;
}

}  // namespace

DesignMatrix DesignMatrix::with_intercept(const std::vector<std::vector<double>>& covariate_rows) {
  const std::size_t n = covariate_rows.size();
  const std::size_t k = n == 0 ? 0 : covariate_rows.front().size();
  DesignMatrix design(n, k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    design.at(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      design.at(i, j + 1) = covariate_rows[i][j];
    }
  }
  return design;
}

double logistic_log_likelihood(const DesignMatrix& design, const std::vector<int>& labels,
                               const std::vector<double>& coefficients) {
  double ll = 0.0;
  for (std::size_t i = 0; i < design.rows; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < design.cols; ++j) {
      eta += design.at(i, j) * coefficients[j];
    }
    // log p = -log(1+e^-eta) for y=1, log(1-p) = -log(1+e^eta) for y=0.
    const double sign_eta = labels[i] == 1 ? -eta : eta;
    ll -= sign_eta > 30.0 ? sign_eta : std::log1p(std::exp(sign_eta));
  }
  return ll;
}

std::vector<double> logistic_predict(const DesignMatrix& design,
                                     const std::vector<double>& coefficients) {
  std::vector<double> probabilities(design.rows, 0.0);
  for (std::size_t i = 0; i < design.rows; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < design.cols; ++j) {
      eta += design.at(i, j) * coefficients[j];
    }
    probabilities[i] = inverse_logit(eta);
  }
  return probabilities;
}

LogisticFit fit_logistic(const DesignMatrix& design, const std::vector<int>& labels,
                         const IrlsOptions& options) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols;
  if (labels.size() != n) {
    throw std::invalid_argument("fit_logistic: label count does not match design rows");
  }
  if (n < p + 1) {
    throw InsufficientDataError("fit_logistic: need at least cols+1 observations");
  }

  LogisticFit fit;
  fit.coefficients.assign(p, 0.0);

  std::vector<double> information(p * p, 0.0);
  std::vector<double> score(p, 0.0);
  double log_likelihood = logistic_log_likelihood(design, labels, fit.coefficients);

  for (int iteration = 1; iteration <= options.max_iter; ++iteration) {
    fit.iterations = iteration;

    const auto probabilities = logistic_predict(design, fit.coefficients);
    score.assign(p, 0.0);
    information.assign(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double residual = static_cast<double>(labels[i]) - probabilities[i];
      const double weight = probabilities[i] * (1.0 - probabilities[i]);
      for (std::size_t j = 0; j < p; ++j) {
        const double xij = design.at(i, j);
        score[j] += xij * residual;
        for (std::size_t k = 0; k <= j; ++k) {
          information[j * p + k] += weight * xij * design.at(i, k);
        }
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = j + 1; k < p; ++k) {
        information[j * p + k] = information[k * p + j];
      }
    }

    double max_score = 0.0;
    for (double g : score) {
      max_score = std::max(max_score, std::fabs(g));
    }
    if (max_score < options.tol) {
      fit.converged = true;
      break;
    }

    auto factor = information;
    if (!cholesky(factor, p)) {
      if (iteration == 1) {
        throw SingularDesignError("fit_logistic: design matrix is rank deficient");
      }
      // The weighted information degenerated mid-fit; treat as separation.
      fit.separation_detected = true;
      break;
    }
    const auto step = cholesky_solve(factor, p, score);

    // Step halving keeps the likelihood non-decreasing.
    double scale = 1.0;
    std::vector<double> candidate(p);
    double candidate_ll = -std::numeric_limits<double>::infinity();
    while (scale > 1e-10) {
      for (std::size_t j = 0; j < p; ++j) {
        candidate[j] = fit.coefficients[j] + scale * step[j];
      }
      candidate_ll = logistic_log_likelihood(design, labels, candidate);
      if (candidate_ll >= log_likelihood - 1e-12) {
        break;
      }
      scale *= 0.5;
    }

    double step_norm = 0.0;
    for (double s : step) {
      step_norm += s * s;
    }
    step_norm = std::sqrt(step_norm) * scale;

    fit.coefficients = candidate;
    log_likelihood = candidate_ll;

    for (double beta : fit.coefficients) {
      if (std::fabs(beta) > options.separation_bound) {
        fit.separation_detected = true;
        break;
      }
    }
    if (fit.separation_detected) {
      break;
    }
    if (step_norm < options.tol) {
      fit.converged = true;
      break;
    }
  }

  if (fit.converged && !fit.separation_detected) {
    const auto probabilities = logistic_predict(design, fit.coefficients);
    information.assign(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double weight = probabilities[i] * (1.0 - probabilities[i]);
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
          information[j * p + k] += weight * design.at(i, j) * design.at(i, k);
        }
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = j + 1; k < p; ++k) {
        information[j * p + k] = information[k * p + j];
      }
    }
    auto factor = information;
    if (cholesky(factor, p)) {
      const auto covariance = cholesky_inverse(factor, p);
      fit.standard_errors.resize(p);
      for (std::size_t j = 0; j < p; ++j) {
        fit.standard_errors[j] = std::sqrt(covariance[j * p + j]);
      }
    } else {
      fit.converged = false;
    }
  }
  return fit;
}

}  // namespace rdt
