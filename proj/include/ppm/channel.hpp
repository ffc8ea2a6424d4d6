#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ppm {

/// Bad argument to a numerical routine (negative order, non-finite displacement, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Physical scenario: pulse amplitude, background noise, mode mismatch and PPM order.
struct ChannelParams {
  double alpha = 0.0;  // coherent amplitude, sqrt(photons)
  double n_b = 0.0;    // mean noise photons per slot
  double delta = 0.0;  // mode mismatch in [0, 1]
  int m = 1;           // PPM order

  /// Builds parameters from the mean signal photon number n = alpha^2.
  static ChannelParams from_photons(double n, double n_b, double delta, int m);

  double photons() const { return alpha * alpha; }
  double visibility() const;

  /// Throws DomainError if any invariant is violated.
  void validate() const;
};

/// No-click statistics of a displaced slot.
///
/// q(beta) is the no-click probability of an empty slot displaced by beta,
/// p(beta) that of the pulse slot. Receivers only ever see these two
/// functions, so any on/off photodetection model can be plugged in.
class ClickModel {
 public:
  virtual ~ClickModel() = default;

  virtual double q(double beta) const = 0;
  virtual double p(double beta) const = 0;

  /// Displacements worth evaluating exactly in every search (e.g. the nulling point).
  virtual std::vector<double> special_points() const { return {}; }

  /// Upper end of the default displacement search interval.
  virtual double search_upper() const { return 5.0; }
};

/// Poissonian photon statistics for signal, displacement and additive noise.
class PoissonClickModel final : public ClickModel {
 public:
  explicit PoissonClickModel(const ChannelParams& params);

  double q(double beta) const override;
  double p(double beta) const override;
  std::vector<double> special_points() const override;
  double search_upper() const override { return params_.alpha + 5.0; }

  const ChannelParams& params() const { return params_; }

 private:
  ChannelParams params_;
  double visibility_;
};

/// Four raw probabilities used by the closed-form receivers.
struct SlotStats {
  double q0 = 1.0;     // empty slot, no displacement
  double p0 = 1.0;     // pulse slot, no displacement
  double qb = 1.0;     // empty slot, displaced by beta
  double pb = 1.0;     // pulse slot, displaced by beta

  static SlotStats from_model(const ClickModel& model, double beta);
  void validate() const;
};

double q_prob(const ClickModel& model, double beta);
double p_prob(const ClickModel& model, double beta);

}  // namespace ppm
