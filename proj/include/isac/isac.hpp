// Rate-constrained precoder designs: the Frobenius projection onto the
// rate-feasible covariance set, penalty-based alternating optimization for
// per-realization and data-independent precoders, the high-SNR variant,
// and the deterministic baseline.

#pragma once

#include <cstdint>
#include <vector>

#include "isac/sensing.hpp"

namespace isac {

struct PenaltyConfig {
    double rho0 = 1.0;      // initial penalty weight
    double growth = 2.0;    // multiplicative growth/shrink factor for rho
    double xi0 = 0.1;       // tolerated |rate - rate_min| at termination
    double tau0 = 1e-3;     // objective-change stopping threshold
    int t_max = 30;         // outer-iteration cap
    double feas_tol = 1e-3; // declared relative penalty-residual threshold
    double pg_tol = 0.0;    // stationarity tolerance; <= 0 picks the solver
                            // default (1e-3 deterministic, 5e-2 stochastic)
    int inner_steps = 40;   // stochastic W-step budget per outer round
};

struct IsacTraceRow {
    double objective;
    double residual;  // |omega - W W^H|_F
    double rate;
};

struct IsacSolution {
    cmat w;
    cmat omega;
    double achieved_rate = 0.0;
    double elmmse = 0.0;  // solver's own objective estimate at w
    std::vector<IsacTraceRow> trace;
};

// Frobenius projection of `target` onto {omega psd, tr <= power,
// rate_from_cov(omega) >= comm.rate_min}. Solved by bisection on the rate
// multiplier with an inner projected-gradient minimization of the strongly
// convex dual objective. Throws when rate_min exceeds the water-filling
// capacity at `power`.
cmat rate_projection(const cmat& target, const CommScene& comm, double power);

// Rate-optimal precoder and its rate for this scene's channel.
CapacityPoint capacity_waterfill(const CommScene& comm, double power);

// Penalty-based alternating optimization for one signal realization:
// covariance step = rate_projection of W W^H, precoder step = inner
// projected gradient descent on f(W;s) + (rho/2)|omega - W W^H|_F^2 with
// Armijo backtracking. rho adapts to the infeasibility measured at round
// start: grown while the residual stalls above feas_tol, relaxed once the
// iterate is well inside the feasible set. Stops when the objective,
// stationarity, residual and rate conditions all hold; an endpoint that
// still misses the rate floor or residual threshold adopts its projected
// Gram (polar frame kept), so achieved_rate >= rate_min - xi0 always.
IsacSolution ddp_isac(const cmat& s_n, const SensingScene& scene,
                      const CommScene& comm, PenaltyConfig cfg,
                      StepSchedule step);

// Same alternating skeleton for the data-independent precoder: the W step
// takes schedule-sized stochastic gradient steps over fresh mini-batches,
// with the penalty term's step capped by its own curvature so a stiff rho
// cannot destabilize the update. Progress is measured on `validation`, and
// the endpoint is swapped for the deterministic baseline whenever the
// held-out batch prefers it. Deterministic for a fixed seed.
IsacSolution dip_isac_sgp_ao(const SensingScene& scene, const CommScene& comm,
                             PenaltyConfig cfg, StepSchedule step,
                             int batch_size, std::uint64_t seed,
                             const SignalBatch& validation);

// Minimizes the high-SNR cost over the rate-feasible covariance set by
// prox-linearized steps (project the gradient step, then line-search the
// blend). Initial point minimizes tr(omega^-1) over the same set.
PowerAllocation hsnr_isac_sca(const SensingScene& scene, const CommScene& comm,
                              ScaStop stop);

// Deterministic baseline: minimizes the mean-Gram cost
// tr[(R_H^-1 + (L/(sigma_s^2 N_R)) omega)^-1] over the rate-feasible set
// and returns the Hermitian square root as the precoder. When the
// unconstrained water-filling covariance already meets the rate floor it
// is returned as is; otherwise projected gradient runs to stationarity.
cmat detopt_baseline(const SensingScene& scene, const CommScene& comm);

struct RateGap {
    double avg_rate;
    double capacity;
};

// Ensemble-average achieved rate against the water-filling capacity under
// the same power budget.
RateGap prop2_gap(const std::vector<IsacSolution>& solutions,
                  const CommScene& comm, double power);

}  // namespace isac
