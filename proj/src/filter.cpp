#include "levikal/filter.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "levikal/error.hpp"

namespace levikal {

namespace {

void check_state(const FilterState& state) {
    if (!state.gains || !state.model) throw ContractError("filter state lacks gains or model");
    const Eigen::Index n = state.model->states();
    if (state.z_hat.size() != n || state.gains->k_kal.size() != n ||
        state.gains->k_lqr.size() != n) {
        throw ContractError("filter state dimension mismatch");
    }
}

}  // namespace

FilterState make_filter_state(std::shared_ptr<const DiscreteModel> model,
                              std::shared_ptr<const GainSet> gains,
                              std::optional<FixedPointConfig> fixed_point_cfg) {
    FilterState s;
    s.z_hat = Eigen::VectorXd::Zero(model->states());
    s.model = std::move(model);
    s.gains = std::move(gains);
    s.fixed_point_cfg = std::move(fixed_point_cfg);
    check_state(s);
    return s;
}

double kalman_step_inplace(FilterState& state, double zeta_k, double u_k) {
    check_state(state);
    const DiscreteModel& m = *state.model;
    const double innovation = zeta_k - m.c.dot(state.z_hat);
    state.z_hat = m.a_d * state.z_hat + m.b_d * u_k + state.gains->k_kal * innovation;
    ++state.step_index;
    assert(state.z_hat.allFinite());
    return innovation;
}

KalmanStep kalman_step(const FilterState& state, double zeta_k, double u_k) {
    KalmanStep out{state, 0.0};
    out.innovation = kalman_step_inplace(out.state, zeta_k, u_k);
    return out;
}

double lqr_control(const FilterState& state) {
    check_state(state);
    double u = -state.gains->k_lqr.dot(state.z_hat);
    if (state.fixed_point_cfg) {
        const double fs = state.fixed_point_cfg->output_full_scale;
        u = std::clamp(u, -fs, fs);
    }
    return u;
}

FixedPointLqg make_fixed_point_filter(const FilterState& state) {
    check_state(state);
    if (!state.fixed_point_cfg) throw ContractError("fixed_point_cfg not set");
    return FixedPointLqg(lqg_transfer_function(*state.model, *state.gains),
                         *state.fixed_point_cfg);
}

FixedPointStep fixed_point_filter_step(FixedPointLqg& filter, std::int64_t zeta_quantized) {
    return filter.step(zeta_quantized);
}

}  // namespace levikal
