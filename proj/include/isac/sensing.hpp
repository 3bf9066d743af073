// Sensing-only precoder designs: deterministic water-filling, the
// per-realization closed form, stochastic gradient projection (plain and
// momentum-based), and the high-SNR power allocation with its SCA solver.

#pragma once

#include <vector>

#include "isac/model.hpp"

namespace isac {

// Decaying step size a/(b+r) at iteration r (r starts at 1).
struct StepSchedule {
    double a = 10.0;
    double b = 10.0;

    double at(int r) const { return a / (b + static_cast<double>(r)); }
};

struct StopRule {
    double eps = 1e-5;  // stop when the held-out objective moves less than this
    int r_max = 1000;
};

// First/second-moment smoothing for the momentum variant; the second moment
// is the scalar squared Frobenius norm of the gradient.
struct MomentParams {
    double beta1 = 0.6;
    double beta2 = 0.999;
    double eps0 = 1e-8;
};

struct OptResult {
    cmat w;
    std::vector<double> trace;  // held-out ergodic cost; trace[0] is the init
    int iterations = 0;
    double max_iterate_sq_norm = 0.0;  // for feasibility auditing
};

// Classical water-filling on the eigenvalues of the prior correlation;
// the water level comes from a 200-step bisection with |power residual|
// <= 1e-9 * power.
cmat waterfill_lmmse(const SensingScene& scene);

// Per-realization optimal precoder: water-filling over the joint spectrum
// of the prior and the realized signal Gram. Directions outside the signal
// rank get zero power. Throws std::invalid_argument when s_n is zero.
cmat ddp_solve(const cmat& s_n, const SensingScene& scene);

// Gradient of f(W; S) with the convention that a small step along the
// negative gradient decreases the cost; the directional derivative along E
// is 2 Re tr(E^H grad).
cmat grad_f(const cmat& w, const cmat& s, const SensingScene& scene);

// Projected stochastic gradient descent over fresh mini-batches, raw steps.
OptResult sgp(const SensingScene& scene, int batch_size, StepSchedule schedule,
              const cmat& init, std::uint64_t seed, StopRule stop,
              const SignalBatch& validation);

// Momentum variant with bias-corrected moments; beta1 = beta2 = 0 reduces it
// to normalized gradient steps.
OptResult mb_sgp(const SensingScene& scene, int batch_size,
                 StepSchedule schedule, MomentParams betas, const cmat& init,
                 std::uint64_t seed, StopRule stop,
                 const SignalBatch& validation);

struct Kappas {
    double k1;
    double k2;
    double k3;
};

// Constants of the high-SNR expansion; defined only for frame_len > n_t.
Kappas hsnr_kappas(const SensingScene& scene);

// Closed-form high-SNR approximation of the ergodic cost at covariance
// omega (Hermitian PD).
double hsnr_cost(const cmat& omega, const SensingScene& scene);

// Exact gradient of hsnr_cost on the Hermitian space:
// hsnr_cost(omega + t E) = hsnr_cost(omega) + t Re tr(grad E) + O(t^2).
cmat hsnr_grad(const cmat& omega, const SensingScene& scene);

struct ScaStop {
    double tau = -1e-5;  // stop when the linearized improvement exceeds this
    int j_max = 30;
};

struct PowerAllocation {
    rvec p;  // inverse covariance eigenvalues, ascending with the prior's
    Kappas kappa;
    std::vector<double> trace;  // objective per iteration, trace[0] is init
    cmat omega;                 // assembled covariance; diagonal in the
                                // prior basis for the sensing-only solver
};

// Exact minimizer of <grad, p> over {sum 1/p <= power, 0 < p <= p_cap},
// by KKT + bisection on the budget multiplier; the spent budget sum 1/p
// never exceeds `power`. An all-zero gradient returns p_current unchanged.
rvec linearized_subproblem(const rvec& grad, const rvec& p_current,
                           double power, double p_cap);

// Frank-Wolfe style descent on the high-SNR cost in inverse-eigenvalue
// coordinates: equal-power start, linearized subproblem, golden-section
// line search on [0,1]. The objective trace is non-increasing.
PowerAllocation hsnr_sca(const SensingScene& scene, ScaStop stop);

}  // namespace isac
