#include "rdt/population.hpp"

#include <cmath>
#include <numeric>

#include "rdt/errors.hpp"

namespace rdt {

namespace {

constexpr std::uint64_t kPatientStreamTag = 0x706f70756c617465ULL;

double sample_covariate(const CovariateDistribution& dist, RngStream& rng) {
  struct Sampler {
    RngStream& rng;
    double operator()(const BernoulliDist& d) { return rng.bernoulli(d.p) ? 1.0 : 0.0; }
    double operator()(const NormalDist& d) { return rng.normal(d.mean, d.sd); }
    double operator()(const CategoricalDist& d) {
      return static_cast<double>(rng.categorical(d.level_probabilities));
    }
  };
  return std::visit(Sampler{rng}, dist);
}

}  // namespace

void CovariateSpec::validate() const {
  if (const auto* b = std::get_if<BernoulliDist>(&distribution)) {
    if (!(b->p >= 0.0 && b->p <= 1.0)) {
      throw ConfigError("covariate '" + name + "': bernoulli p must be in [0,1]");
    }
  } else if (const auto* n = std::get_if<NormalDist>(&distribution)) {
    if (!(n->sd > 0.0)) {
      throw ConfigError("covariate '" + name + "': normal sd must be > 0");
    }
  } else if (const auto* c = std::get_if<CategoricalDist>(&distribution)) {
    if (c->level_probabilities.empty()) {
      throw ConfigError("covariate '" + name + "': categorical needs at least one level");
    }
    double total = 0.0;
    for (double p : c->level_probabilities) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("covariate '" + name + "': level probabilities must be in [0,1]");
      }
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
      throw ConfigError("covariate '" + name + "': level probabilities must sum to 1");
    }
  }
}

void OutcomeModel::validate() const {
  if (!(residual_sd > 0.0)) {
    throw ConfigError("outcome model: residual_sd must be > 0");
  }
  if (!(carryover_coef >= 0.0 && carryover_coef <= 1.0)) {
    throw ConfigError("outcome model: carryover_coef must be in [0,1]");
  }
  if (effect_heterogeneity_sd < 0.0) {
    throw ConfigError("outcome model: effect_heterogeneity_sd must be >= 0");
  }
  if (washout_full_days < 0) {
    throw ConfigError("outcome model: washout_full_days must be >= 0");
  }
}

void PopulationModel::validate() const {
  if (n_stage1 < 1) {
    throw ConfigError("population: n_stage1 must be >= 1");
  }
  for (const auto& covariate : covariates) {
    covariate.validate();
  }
  outcome.validate();
}

int TreatmentSchedule::total_days() const {
  int days = 0;
  for (const auto& period : periods) {
    days += period.preceding_washout_days + period.period_length_days;
  }
  return days;
}

double inverse_logit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double response_propensity(const PopulationModel& model, std::span<const double> covariates) {
  double logit = model.response_intercept;
  for (std::size_t j = 0; j < model.covariates.size() && j < covariates.size(); ++j) {
    logit += model.covariates[j].response_logit_coef * covariates[j];
  }
  return inverse_logit(logit);
}

PatientProfile sample_patient(const PopulationModel& model, int id, RngStream& rng) {
  PatientProfile profile;
  profile.id = id;
  profile.covariates.reserve(model.covariates.size());
  double baseline = model.outcome.baseline_mean;
  for (const auto& spec : model.covariates) {
    const double value = sample_covariate(spec.distribution, rng);
    profile.covariates.push_back(value);
    baseline += spec.outcome_coef * value;
  }
  profile.baseline_level = baseline;
  profile.latent_responder = rng.bernoulli(response_propensity(model, profile.covariates));
  if (profile.latent_responder) {
    profile.individual_effect = model.outcome.responder_effect;
    if (model.outcome.effect_heterogeneity_sd > 0.0) {
      profile.individual_effect += rng.normal(0.0, model.outcome.effect_heterogeneity_sd);
    }
  } else {
    profile.individual_effect = model.outcome.nonresponder_effect;
  }
  return profile;
}

std::vector<PatientProfile> generate_population(const PopulationModel& model, std::uint64_t seed) {
  model.validate();
  RngStream stream(mix64(seed, kPatientStreamTag));
  std::vector<PatientProfile> population;
  population.reserve(static_cast<std::size_t>(model.n_stage1));
  for (int i = 0; i < model.n_stage1; ++i) {
    population.push_back(sample_patient(model, i, stream));
  }
  return population;
}

std::vector<double> simulate_outcomes(const PatientProfile& profile,
                                      const TreatmentSchedule& schedule,
                                      const OutcomeModel& model, RngStream& rng) {
  if (schedule.periods.empty()) {
    throw std::invalid_argument("simulate_outcomes: schedule must be non-empty");
  }
  const double sign = direction_sign(model.improvement_direction);
  const double signed_effect = sign * profile.individual_effect;

  std::vector<double> outcomes;
  outcomes.reserve(schedule.periods.size());
  double baseline = profile.baseline_level;
  bool ratcheted = false;
  for (std::size_t t = 0; t < schedule.periods.size(); ++t) {
    const auto& period = schedule.periods[t];
    double mean = baseline + model.period_effect * static_cast<double>(t);
    if (period.arm == Arm::Experimental && (model.reversible || !ratcheted)) {
      mean += signed_effect;
    }
    if (model.reversible && model.carryover_coef > 0.0 && t > 0) {
      const auto& previous = schedule.periods[t - 1];
      const bool washed_out = period.preceding_washout_days >= model.washout_full_days;
      if (previous.arm == Arm::Experimental && !washed_out) {
        mean += model.carryover_coef * signed_effect;
      }
    }
    outcomes.push_back(mean + rng.normal(0.0, model.residual_sd));
    if (!model.reversible && !ratcheted && period.arm == Arm::Experimental) {
      // The improvement becomes the patient's new baseline.
      baseline += signed_effect;
      ratcheted = true;
    }
  }
  return outcomes;
}

}  // namespace rdt
