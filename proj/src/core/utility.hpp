#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace execsim {

// One branch of a discrete outcome distribution.
struct Outcome {
  double value = 0.0;
  double prob = 0.0;
};

using OutcomeDist = std::vector<Outcome>;

inline void validate_dist(const OutcomeDist& dist) {
  if (dist.empty()) throw std::invalid_argument("outcome distribution is empty");
  // compensated summation: a million equal weights must still pass the
  // 1e-12 gate, which naive accumulation misses
  double total = 0.0, comp = 0.0;
  for (const Outcome& o : dist) {
    if (!(o.prob > 0.0))
      throw std::invalid_argument("outcome probabilities must be > 0");
    const double y = o.prob - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("outcome probabilities must sum to 1");
}

enum class UtilityKind { Identity, Exponential, Power };

// Utility function family: Identity U(x) = x, Exponential (CARA)
// U(x) = -exp(-lambda x) on all reals, Power U(x) = x^eta on x >= 0.
// Exponential certainty equivalents are evaluated through a shifted
// log-sum-exp, so inputs are safe whenever |lambda * x| <= 700.
class UtilityFn {
 public:
  UtilityFn() = default;  // identity

  static UtilityFn identity() { return UtilityFn(); }

  static UtilityFn exponential(double lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("exponential utility requires lambda > 0");
    return UtilityFn(UtilityKind::Exponential, lambda);
  }

  static UtilityFn power(double eta) {
    if (!(eta > 0.0) || eta > 1.0)
      throw std::invalid_argument("power utility requires eta in (0, 1]");
    return UtilityFn(UtilityKind::Power, eta);
  }

  UtilityKind kind() const { return kind_; }
  double param() const { return param_; }

  double u(double x) const {
    switch (kind_) {
      case UtilityKind::Identity: return x;
      case UtilityKind::Exponential: return -std::exp(-param_ * x);
      case UtilityKind::Power:
        if (x < 0.0)
          throw std::domain_error("power utility is defined only for x >= 0");
        return std::pow(x, param_);
    }
    return x;
  }

  double u_inv(double y) const {
    switch (kind_) {
      case UtilityKind::Identity: return y;
      case UtilityKind::Exponential:
        if (!(y < 0.0))
          throw std::domain_error("exponential utility values are negative");
        return -std::log(-y) / param_;
      case UtilityKind::Power:
        if (y < 0.0)
          throw std::domain_error("power utility values are non-negative");
        return std::pow(y, 1.0 / param_);
    }
    return y;
  }

  // Certainty equivalent U⁻¹(Σ pᵢ U(vᵢ)) of an already-validated list of
  // weighted outcomes. Weights must be positive and sum to 1.
  double ce_terms(const OutcomeDist& terms) const {
    switch (kind_) {
      case UtilityKind::Identity: {
        double mean = 0.0;
        for (const Outcome& o : terms) mean += o.prob * o.value;
        return mean;
      }
      case UtilityKind::Exponential: {
        // CE = -(1/λ) ln Σ pᵢ e^(-λ vᵢ), shifted by the largest exponent
        double shift = -std::numeric_limits<double>::infinity();
        for (const Outcome& o : terms)
          shift = std::max(shift, -param_ * o.value);
        double sum = 0.0;
        for (const Outcome& o : terms)
          sum += o.prob * std::exp(-param_ * o.value - shift);
        return -(shift + std::log(sum)) / param_;
      }
      case UtilityKind::Power: {
        double sum = 0.0;
        for (const Outcome& o : terms) sum += o.prob * u(o.value);
        return std::pow(sum, 1.0 / param_);
      }
    }
    return 0.0;
  }

 private:
  UtilityFn(UtilityKind kind, double param) : kind_(kind), param_(param) {}

  UtilityKind kind_ = UtilityKind::Identity;
  double param_ = 0.0;
};

// Certainty equivalent of a discrete outcome distribution.
inline double ce(const OutcomeDist& dist, const UtilityFn& u) {
  validate_dist(dist);
  return u.ce_terms(dist);
}

}  // namespace execsim
