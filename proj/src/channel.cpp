#include "ppm/channel.hpp"

#include <cmath>

namespace ppm {

namespace {

void require_finite_beta(double beta) {
  if (!std::isfinite(beta)) throw DomainError("displacement must be finite");
}

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

ChannelParams ChannelParams::from_photons(double n, double n_b, double delta, int m) {
  if (!std::isfinite(n) || n < 0.0) throw DomainError("photon number must be finite and non-negative");
  ChannelParams params{std::sqrt(n), n_b, delta, m};
  params.validate();
  return params;
}

double ChannelParams::visibility() const { return std::sqrt(1.0 - delta); }

void ChannelParams::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw DomainError("alpha must be finite and non-negative");
  if (!std::isfinite(n_b) || n_b < 0.0) throw DomainError("nb must be finite and non-negative");
  if (!std::isfinite(delta) || delta < 0.0 || delta > 1.0) throw DomainError("delta must lie in [0, 1]");
  if (m < 1) throw DomainError("PPM order must be at least 1");
}

PoissonClickModel::PoissonClickModel(const ChannelParams& params) : params_(params) {
  params_.validate();
  visibility_ = params_.visibility();
}

double PoissonClickModel::q(double beta) const {
  require_finite_beta(beta);
  return std::exp(-beta * beta - params_.n_b);
}

double PoissonClickModel::p(double beta) const {
  require_finite_beta(beta);
  const double residual = params_.alpha - visibility_ * beta;
  return std::exp(-residual * residual - params_.delta * beta * beta - params_.n_b);
}

std::vector<double> PoissonClickModel::special_points() const {
  // alpha * V minimises the pulse-slot mean photon number; alpha is plain nulling.
  return {0.0, params_.alpha, params_.alpha * visibility_};
}

SlotStats SlotStats::from_model(const ClickModel& model, double beta) {
  return {model.q(0.0), model.p(0.0), model.q(beta), model.p(beta)};
}

void SlotStats::validate() const {
  if (!is_probability(q0) || !is_probability(p0) || !is_probability(qb) || !is_probability(pb))
    throw DomainError("slot statistics must be probabilities in [0, 1]");
}

double q_prob(const ClickModel& model, double beta) { return model.q(beta); }
double p_prob(const ClickModel& model, double beta) { return model.p(beta); }

}  // namespace ppm
