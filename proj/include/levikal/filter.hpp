#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "levikal/fixed_point.hpp"
#include "levikal/lqg.hpp"
#include "levikal/statespace.hpp"

namespace levikal {

struct FilterState {
    Eigen::VectorXd z_hat;
    std::int64_t step_index = 0;
    std::shared_ptr<const GainSet> gains;
    std::shared_ptr<const DiscreteModel> model;
    std::optional<FixedPointConfig> fixed_point_cfg;
};

FilterState make_filter_state(std::shared_ptr<const DiscreteModel> model,
                              std::shared_ptr<const GainSet> gains,
                              std::optional<FixedPointConfig> fixed_point_cfg = std::nullopt);

struct KalmanStep {
    FilterState state;
    double innovation = 0.0;
};

// Predictor-form update: eps = zeta - c z_hat; z_hat' = A z_hat + b u + k eps.
KalmanStep kalman_step(const FilterState& state, double zeta_k, double u_k);
// In-place variant returning the innovation.
double kalman_step_inplace(FilterState& state, double zeta_k, double u_k);

// u = -k z_hat, clamped to the output full scale when a fixed-point config is set.
double lqr_control(const FilterState& state);

// Fixed-point filter for a state's gains and model.
FixedPointLqg make_fixed_point_filter(const FilterState& state);

// Fixed-point realization step on a quantized ADC sample.
FixedPointStep fixed_point_filter_step(FixedPointLqg& filter, std::int64_t zeta_quantized);

}  // namespace levikal
