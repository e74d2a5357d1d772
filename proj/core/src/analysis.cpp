#include "rdt/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "rdt/errors.hpp"
#include "rdt/stats.hpp"

namespace rdt {

namespace {

constexpr double kSeFloor = 1e-12;
constexpr double kVarianceFloor = 1e-12;

double two_sided_p(double estimate, double se, double df) {
  const double floored = std::max(se, kSeFloor);
  return student_t_two_sided_p(estimate / floored, df);
}

}  // namespace

EffectEstimate crossover_estimate(const std::vector<CrossoverObservation>& data) {
  std::vector<double> diff_ab;
  std::vector<double> diff_ba;
  for (const auto& obs : data) {
    const double d = obs.period1_outcome - obs.period2_outcome;
    (obs.sequence == SequenceOrder::ExperimentalFirst ? diff_ab : diff_ba).push_back(d);
  }
  if (diff_ab.size() < 2 || diff_ba.size() < 2) {
    throw InsufficientDataError("crossover_estimate: need >=2 patients per sequence group");
  }
  const auto n_ab = static_cast<double>(diff_ab.size());
  const auto n_ba = static_cast<double>(diff_ba.size());

  const double mean_ab = sample_mean(diff_ab);
  const double mean_ba = sample_mean(diff_ba);
  const double estimate = 0.5 * (mean_ab - mean_ba);

  const double pooled_var = ((n_ab - 1.0) * sample_variance(diff_ab) +
                             (n_ba - 1.0) * sample_variance(diff_ba)) /
                            (n_ab + n_ba - 2.0);
  const double se = 0.5 * std::sqrt(pooled_var * (1.0 / n_ab + 1.0 / n_ba));
  const double df = n_ab + n_ba - 2.0;

  EffectEstimate result;
  result.point = estimate;
  result.standard_error = se;
  result.p_value = two_sided_p(estimate, se, df);
  result.method = "crossover";
  result.n_used = static_cast<int>(data.size());
  return result;
}

PatientEffect nof1_effect(const std::vector<CyclePair>& cycles) {
  if (cycles.size() < 2) {
    throw InsufficientDataError("nof1_effect: need >=2 cycles");
  }
  std::vector<double> differences;
  differences.reserve(cycles.size());
  for (const auto& cycle : cycles) {
    differences.push_back(cycle.experimental - cycle.control);
  }
  PatientEffect effect;
  effect.estimate = sample_mean(differences);
  effect.variance = sample_variance(differences) / static_cast<double>(cycles.size());
  return effect;
}

MetaResult meta_combine(const std::vector<PatientEffect>& per_patient) {
  const std::size_t m = per_patient.size();
  if (m < 2) {
    throw InsufficientDataError("meta_combine: need >=2 patients");
  }

  MetaResult result;
  result.per_patient = per_patient;

  std::vector<double> variances;
  variances.reserve(m);
  for (const auto& pe : per_patient) {
    double v = pe.variance;
    if (v < kVarianceFloor) {
      v = kVarianceFloor;
      ++result.floored_variances;
    }
    variances.push_back(v);
  }

  double sum_w = 0.0;
  double sum_w_sq = 0.0;
  double sum_we = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 1.0 / variances[i];
    sum_w += w;
    sum_w_sq += w * w;
    sum_we += w * per_patient[i].estimate;
  }
  const double fixed_mean = sum_we / sum_w;

  double q = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 1.0 / variances[i];
    const double dev = per_patient[i].estimate - fixed_mean;
    q += w * dev * dev;
  }
  const double denom = sum_w - sum_w_sq / sum_w;
  result.tau_squared =
      denom > 0.0 ? std::max(0.0, (q - static_cast<double>(m - 1)) / denom) : 0.0;

  double sum_w_star = 0.0;
  double sum_we_star = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 1.0 / (variances[i] + result.tau_squared);
    sum_w_star += w;
    sum_we_star += w * per_patient[i].estimate;
  }
  result.pooled_effect = sum_we_star / sum_w_star;
  result.pooled_se = 1.0 / std::sqrt(sum_w_star);
  return result;
}

EffectEstimate nof1_series_estimate(const std::vector<PatientEffect>& per_patient) {
  const auto meta = meta_combine(per_patient);
  const std::size_t m = per_patient.size();

  // Hartung-Knapp variance: weighted spread of the per-patient effects
  // around the pooled effect, on the random-effects weights.
  double sum_w = 0.0;
  double weighted_spread = 0.0;
  for (const auto& pe : per_patient) {
    const double v = std::max(pe.variance, kVarianceFloor) + meta.tau_squared;
    const double w = 1.0 / v;
    const double dev = pe.estimate - meta.pooled_effect;
    sum_w += w;
    weighted_spread += w * dev * dev;
  }
  const double hk_var = weighted_spread / (static_cast<double>(m - 1) * sum_w);
  const double se = std::sqrt(hk_var);

  EffectEstimate result;
  result.point = meta.pooled_effect;
  result.standard_error = std::max(se, kSeFloor);
  result.p_value = two_sided_p(meta.pooled_effect, se, static_cast<double>(m - 1));
  result.method = "nof1-meta";
  result.n_used = static_cast<int>(m);
  return result;
}

namespace {

struct ArmCounts {
  int n_experimental = 0;
  int successes_experimental = 0;
  int n_control = 0;
  int successes_control = 0;

  void add(Arm arm, bool success) {
    if (arm == Arm::Experimental) {
      ++n_experimental;
      successes_experimental += success ? 1 : 0;
    } else {
      ++n_control;
      successes_control += success ? 1 : 0;
    }
  }

  bool degenerate() const { return n_experimental == 0 || n_control == 0; }

  double proportion_difference() const {
    return static_cast<double>(successes_experimental) / n_experimental -
           static_cast<double>(successes_control) / n_control;
  }
};

}  // namespace

EffectEstimate adaptive_randomization_test(const std::vector<AdaptiveObservation>& observations,
                                           const UrnState& initial_urn, int n_resamples,
                                           RngStream& rng) {
  if (n_resamples < 1000) {
    throw std::invalid_argument("adaptive_randomization_test: n_resamples must be >= 1000");
  }
  ArmCounts observed;
  for (const auto& obs : observations) {
    observed.add(obs.arm, obs.success);
  }
  if (observed.n_experimental < 2 || observed.n_control < 2) {
    throw InsufficientDataError("adaptive_randomization_test: need >=2 patients per arm");
  }
  const double observed_stat = observed.proportion_difference();
  const double threshold = std::fabs(observed_stat) - 1e-12;

  int at_least_as_extreme = 0;
  for (int r = 0; r < n_resamples; ++r) {
    RngStream resample_rng = rng.substream(static_cast<std::uint64_t>(r));
    UrnState urn = initial_urn;
    ArmCounts resampled;
    for (const auto& obs : observations) {
      const double p_experimental =
          static_cast<double>(urn.balls_experimental) /
          static_cast<double>(urn.balls_experimental + urn.balls_control);
      const Arm arm = resample_rng.bernoulli(p_experimental) ? Arm::Experimental : Arm::Control;
      resampled.add(arm, obs.success);
      const Arm rewarded = obs.success ? arm
                                       : (arm == Arm::Experimental ? Arm::Control
                                                                   : Arm::Experimental);
      if (rewarded == Arm::Experimental) {
        urn.balls_experimental += urn.add_on_success;
      } else {
        urn.balls_control += urn.add_on_success;
      }
    }
    // A resample that put everyone on one arm has no defined statistic;
    // count it as extreme to keep the p-value valid.
    if (resampled.degenerate() ||
        std::fabs(resampled.proportion_difference()) >= threshold) {
      ++at_least_as_extreme;
    }
  }

  EffectEstimate result;
  result.point = observed_stat;
  result.standard_error = std::nullopt;
  result.p_value = (1.0 + at_least_as_extreme) / (static_cast<double>(n_resamples) + 1.0);
  result.method = "adaptive-randomization";
  result.n_used = static_cast<int>(observations.size());
  return result;
}

EffectEstimate parallel_test(const std::vector<double>& experimental,
                             const std::vector<double>& control) {
  if (experimental.size() < 2 || control.size() < 2) {
    throw InsufficientDataError("parallel_test: need >=2 observations per arm");
  }
  const auto n_e = static_cast<double>(experimental.size());
  const auto n_c = static_cast<double>(control.size());
  const double mean_e = sample_mean(experimental);
  const double mean_c = sample_mean(control);
  const double var_e = sample_variance(experimental);
  const double var_c = sample_variance(control);

  const double estimate = mean_e - mean_c;
  const double se_sq = var_e / n_e + var_c / n_c;
  const double se = std::sqrt(se_sq);

  double df;
  if (se_sq <= 0.0) {
    df = n_e + n_c - 2.0;
  } else {
    const double term_e = var_e / n_e;
    const double term_c = var_c / n_c;
    df = se_sq * se_sq /
         (term_e * term_e / (n_e - 1.0) + term_c * term_c / (n_c - 1.0));
  }

  EffectEstimate result;
  result.point = estimate;
  result.standard_error = std::max(se, kSeFloor);
  result.p_value = two_sided_p(estimate, se, df);
  result.method = "parallel-welch";
  result.n_used = static_cast<int>(experimental.size() + control.size());
  return result;
}

void InterimRule::validate() const {
  if (!(information_fraction > 0.0 && information_fraction < 1.0)) {
    throw ConfigError("interim: information_fraction must be in (0,1)");
  }
  if (!(efficacy_alpha_interim > 0.0 && efficacy_alpha_interim < final_alpha)) {
    throw ConfigError("interim: efficacy_alpha must be in (0, final_alpha)");
  }
  if (!(final_alpha < 1.0)) {
    throw ConfigError("interim: final_alpha must be < 1");
  }
  if (!(futility_p_threshold > 0.0 && futility_p_threshold <= 1.0)) {
    throw ConfigError("interim: futility_p must be in (0,1]");
  }
}

InterimDecision interim_decide(double interim_p, bool direction_favorable,
                               const InterimRule& rule) {
  if (direction_favorable && interim_p < rule.efficacy_alpha_interim) {
    return InterimDecision::StopEfficacy;
  }
  if (interim_p > rule.futility_p_threshold) {
    return InterimDecision::StopFutility;
  }
  return InterimDecision::Continue;
}

const char* to_string(InterimDecision decision) {
  switch (decision) {
    case InterimDecision::Continue: return "continue";
    case InterimDecision::StopEfficacy: return "stop-efficacy";
    case InterimDecision::StopFutility: return "stop-futility";
  }
  return "?";
}

}  // namespace rdt
