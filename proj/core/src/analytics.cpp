#include <cmat/analytics.hpp>

#include <stdexcept>

namespace cmat {

double capacity_alpha(double alpha, const FlowParameters& flow) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("capacity_alpha: alpha must be in [0, 1]");
  }
  return 1.0 / flow.mixed_headway(alpha);
}

double capacity_platoon(double n, const FlowParameters& flow) {
  if (n < 1.0) {
    throw std::invalid_argument("capacity_platoon: n must be >= 1");
  }
  return capacity_alpha(1.0 / n, flow);
}

double expected_platoon_delay(double n, double mu) {
  if (n < 1.0) {
    throw std::invalid_argument("expected_platoon_delay: n must be >= 1");
  }
  if (mu <= 0.0) {
    throw std::invalid_argument("expected_platoon_delay: mu must be positive");
  }
  return (n - 1.0) * mu / 2.0;
}

}  // namespace cmat
