#include "isac/isac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e8;

// Gradient of the rate (bits) with respect to the transmit covariance.
cmat rate_grad(const cmat& omega, const CommScene& comm) {
    Eigen::Index n_u = comm.hc.rows();
    double inv_n = 1.0 / comm.sigma_c2;
    cmat inner = cmat::Identity(n_u, n_u) +
                 inv_n * comm.hc * omega * comm.hc.adjoint();
    cmat sol = hpd_inverse(0.5 * (inner + inner.adjoint()));
    cmat g = (inv_n / kLn2) * comm.hc.adjoint() * sol * comm.hc;
    return 0.5 * (g + g.adjoint());
}

// Minimizes |omega - t|_F^2 - nu * rate(omega) over {psd, tr <= power}.
// Strongly convex, so projected gradient with backtracking converges; the
// warm start keeps the outer bisection deterministic.
cmat penalized_projection(const cmat& t, const CommScene& comm, double power,
                          double nu, cmat omega) {
    auto value = [&](const cmat& o) {
        return (o - t).squaredNorm() - nu * rate_from_cov(o, comm);
    };
    double f = value(omega);
    double step = 0.25;
    for (int it = 0; it < 400; ++it) {
        cmat grad = 2.0 * (omega - t) - nu * rate_grad(omega, comm);
        cmat cand;
        double f_cand = 0.0;
        bool accepted = false;
        double s = step;
        for (int bt = 0; bt < 40; ++bt) {
            cand = project_trace_ball(omega - s * grad, power);
            f_cand = value(cand);
            if (f_cand <= f) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) break;
        double moved = (cand - omega).norm();
        omega = cand;
        f = f_cand;
        step = std::min(0.25, s * 2.0);
        if (moved <= 1e-11 * std::max(1.0, t.norm())) break;
    }
    return omega;
}

cmat hermitian_sqrt(const cmat& omega) {
    HermitianEig eig = eig_hermitian(omega);
    return eig.basis * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           eig.basis.adjoint();
}

}  // namespace

cmat rate_projection(const cmat& target, const CommScene& comm, double power) {
    if (target.rows() != target.cols())
        throw std::invalid_argument("rate_projection: target must be square");
    cmat t = 0.5 * (target + target.adjoint());
    double r0 = comm.rate_min;
    cmat omega = project_trace_ball(t, power);
    if (r0 <= 0.0 || rate_from_cov(omega, comm) >= r0) return omega;

    double cap = capacity_waterfill(comm.hc, comm.sigma_c2, power).rate;
    if (r0 > cap)
        throw std::invalid_argument("rate_projection: rate_min not attainable");

    // rate(omega*(nu)) is nondecreasing in nu; bracket then bisect.
    double nu_lo = 0.0, nu_hi = 1.0;
    cmat om_hi = omega;
    for (int k = 0; k < 200; ++k) {
        om_hi = penalized_projection(t, comm, power, nu_hi, om_hi);
        if (rate_from_cov(om_hi, comm) >= r0) break;
        nu_hi *= 4.0;
        if (nu_hi > 1e15)
            throw std::runtime_error("rate_projection: multiplier bracket failed");
    }
    cmat best = om_hi;
    cmat warm = omega;
    for (int it = 0; it < 80; ++it) {
        double nu = 0.5 * (nu_lo + nu_hi);
        warm = penalized_projection(t, comm, power, nu, warm);
        double r = rate_from_cov(warm, comm);
        if (r >= r0) {
            nu_hi = nu;
            best = warm;
            if (r - r0 <= 1e-10 * std::max(1.0, r0)) break;
        } else {
            nu_lo = nu;
        }
        if (nu_hi - nu_lo <= 1e-12 * std::max(1.0, nu_hi)) break;
    }
    return best;
}

CapacityPoint capacity_waterfill(const CommScene& comm, double power) {
    return capacity_waterfill(comm.hc, comm.sigma_c2, power);
}

namespace {

// Inner precoder step of the penalty AO: projected gradient descent with
// Armijo backtracking on h(W) = f(W;s) + (rho/2)|omega - W W^H|_F^2.
cmat penalty_w_step(const cmat& w0, const cmat& s, const SensingScene& scene,
                    const cmat& omega, double rho) {
    auto value = [&](const cmat& w) {
        double pen = (omega - w * w.adjoint()).squaredNorm();
        return lmmse_cost_given_s(w, s, scene) + 0.5 * rho * pen;
    };
    cmat w = w0;
    double f = value(w);
    double eta = 1.0;
    for (int it = 0; it < 50; ++it) {
        cmat grad = grad_f(w, s, scene) + rho * (w * w.adjoint() - omega) * w;
        cmat cand;
        double f_cand = 0.0;
        double moved = 0.0;
        double t = eta;
        for (int bt = 0; bt < 60; ++bt) {
            cand = project_power(w - t * grad, scene.power);
            f_cand = value(cand);
            moved = (cand - w).norm();
            if (f_cand <= f - 1e-4 / std::max(t, 1e-30) * moved * moved ||
                moved < 1e-16)
                break;
            t *= 0.5;
        }
        w = cand;
        f = f_cand;
        if (moved < 1e-12 * (1.0 + w.norm())) break;
        eta = std::min(2.0 * t, 4.0);
    }
    return w;
}

void check_rate_feasible(const CommScene& comm, const SensingScene& scene) {
    double cap = capacity_waterfill(comm.hc, comm.sigma_c2, scene.power).rate;
    if (comm.rate_min > 0.999 * cap)
        throw std::invalid_argument(
            "isac solver: rate_min is too close to channel capacity");
}

// Outer-loop state measured at round start, before the W step, so the
// infeasibility reflects the iterate rather than the step just taken.
struct RoundState {
    cmat omega;
    double obj;
    double infeas;  // |omega - W W^H|_F / |W W^H|_F
    double rate;
    double pg;      // projected-gradient displacement per unit step
    double resid;   // |omega - W W^H|_F
};

RoundState measure_round(const cmat& w, double objective,
                         const cmat& smooth_grad, double rho,
                         const CommScene& comm, const SensingScene& scene) {
    RoundState st;
    cmat gram = w * w.adjoint();
    st.omega = rate_projection(gram, comm, scene.power);
    st.resid = (st.omega - gram).norm();
    st.infeas = st.resid / std::max(gram.norm(), 1e-30);
    st.rate = rate_from_cov(gram, comm);
    st.obj = objective;
    cmat grad = smooth_grad + rho * (gram - st.omega) * w;
    const double s0 = 1e-3;
    st.pg = (w - project_power(w - s0 * grad, scene.power)).norm() / s0;
    return st;
}

bool stop_met(const RoundState& st, double prev_obj, const PenaltyConfig& cfg,
              double pg_tol, double rate_min, int t) {
    double xi = std::abs(st.rate - rate_min);
    return t > 0 && std::abs(st.obj - prev_obj) < cfg.tau0 &&
           st.infeas <= cfg.feas_tol && st.pg <= pg_tol &&
           (xi <= cfg.xi0 || st.rate >= rate_min);
}

double update_rho(double rho, double infeas, double prev_infeas,
                  const PenaltyConfig& cfg) {
    if (infeas > std::max(cfg.feas_tol, 0.25 * prev_infeas))
        return std::min(rho * cfg.growth, kRhoMax);
    if (infeas < 0.01 * cfg.feas_tol) return std::max(rho / cfg.growth, kRhoMin);
    return rho;
}

// Exact feasibility restoration: project the Gram onto the rate-feasible
// set and keep the precoder's polar frame, so the new Gram equals the
// projection bit for bit. Applied only when the endpoint misses the rate
// floor or the declared residual threshold.
void adopt_projection_if_needed(IsacSolution& sol, const CommScene& comm,
                                const SensingScene& scene, double feas_tol) {
    cmat gram = sol.w * sol.w.adjoint();
    sol.omega = rate_projection(gram, comm, scene.power);
    double resid = (sol.omega - gram).norm();
    double r = rate_from_cov(gram, comm);
    if (r >= comm.rate_min - 1e-12 &&
        resid <= feas_tol * std::max(gram.norm(), 1e-30))
        return;
    Svd dec = svd(sol.w);
    sol.w = hermitian_sqrt(sol.omega) * dec.left * dec.right.adjoint();
}

cmat detopt_cov(const SensingScene& scene, const CommScene& comm) {
    cmat wf = waterfill_lmmse(scene);
    cmat om_wf = wf * wf.adjoint();
    om_wf = 0.5 * (om_wf + om_wf.adjoint());
    if (rate_from_cov(om_wf, comm) >= comm.rate_min - 1e-12) return om_wf;

    double c = static_cast<double>(scene.frame_len) /
               (scene.sigma_s2 * static_cast<double>(scene.n_r));
    auto value = [&](const cmat& o) {
        return hpd_inverse(scene.rh_inv + c * o).real().trace();
    };
    cmat cap_w = capacity_waterfill(comm.hc, comm.sigma_c2, scene.power).w;
    cmat omega = cap_w * cap_w.adjoint();
    double f = value(omega);
    double eta = 1.0;
    for (int it = 0; it < 800; ++it) {
        cmat mi = hpd_inverse(scene.rh_inv + c * omega);
        cmat grad = -c * mi * mi;
        cmat cand;
        double fc = 0.0;
        double moved = 0.0;
        double s = eta;
        for (int bt = 0; bt < 40; ++bt) {
            cand = rate_projection(omega - s * grad, comm, scene.power);
            fc = value(cand);
            moved = (cand - omega).norm();
            if (fc <= f - 1e-4 / std::max(s, 1e-30) * moved * moved ||
                moved < 1e-16)
                break;
            s *= 0.5;
        }
        omega = cand;
        f = fc;
        if (moved < 1e-10 * (1.0 + omega.norm())) break;
        eta = std::min(2.0 * s, 8.0);
    }
    return 0.5 * (omega + omega.adjoint());
}

}  // namespace

IsacSolution ddp_isac(const cmat& s_n, const SensingScene& scene,
                      const CommScene& comm, PenaltyConfig cfg,
                      StepSchedule step) {
    (void)step;  // the deterministic W step backtracks its own size
    check_rate_feasible(comm, scene);
    double pg_tol = cfg.pg_tol > 0.0 ? cfg.pg_tol : 1e-3;
    IsacSolution sol;
    sol.w = capacity_waterfill(comm.hc, comm.sigma_c2, scene.power).w;
    double rho = cfg.rho0;
    double prev_obj = std::numeric_limits<double>::infinity();
    double prev_infeas = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.t_max; ++t) {
        double obj = lmmse_cost_given_s(sol.w, s_n, scene);
        RoundState st = measure_round(sol.w, obj, grad_f(sol.w, s_n, scene),
                                      rho, comm, scene);
        sol.omega = st.omega;
        sol.trace.push_back({st.obj, st.resid, st.rate});
        if (stop_met(st, prev_obj, cfg, pg_tol, comm.rate_min, t)) break;
        rho = update_rho(rho, st.infeas, prev_infeas, cfg);
        prev_infeas = st.infeas;
        prev_obj = st.obj;
        sol.w = penalty_w_step(sol.w, s_n, scene, sol.omega, rho);
    }
    adopt_projection_if_needed(sol, comm, scene, cfg.feas_tol);
    sol.achieved_rate = achievable_rate(sol.w, comm);
    sol.elmmse = lmmse_cost_given_s(sol.w, s_n, scene);
    sol.trace.push_back(
        {sol.elmmse, (sol.omega - sol.w * sol.w.adjoint()).norm(),
         sol.achieved_rate});
    if (sol.achieved_rate < comm.rate_min - cfg.xi0)
        throw std::runtime_error("ddp_isac: rate restoration failed");
    return sol;
}

IsacSolution dip_isac_sgp_ao(const SensingScene& scene, const CommScene& comm,
                             PenaltyConfig cfg, StepSchedule step,
                             int batch_size, std::uint64_t seed,
                             const SignalBatch& validation) {
    if (batch_size < 1)
        throw std::invalid_argument("dip_isac_sgp_ao: batch_size must be >= 1");
    check_rate_feasible(comm, scene);
    double pg_tol = cfg.pg_tol > 0.0 ? cfg.pg_tol : 5e-2;
    auto val_grad = [&](const cmat& w) {
        cmat g = cmat::Zero(w.rows(), w.cols());
        for (const cmat& s : validation.realizations) g += grad_f(w, s, scene);
        return cmat(g / static_cast<double>(validation.realizations.size()));
    };
    IsacSolution sol;
    sol.w = capacity_waterfill(comm.hc, comm.sigma_c2, scene.power).w;
    Philox rng(seed);
    double rho = cfg.rho0;
    double prev_obj = std::numeric_limits<double>::infinity();
    double prev_infeas = std::numeric_limits<double>::infinity();
    int k = 0;
    const double d_max = 0.5 * std::sqrt(scene.power);
    for (int t = 0; t < cfg.t_max; ++t) {
        double obj = elmmse_mc(sol.w, scene, validation);
        RoundState st =
            measure_round(sol.w, obj, val_grad(sol.w), rho, comm, scene);
        sol.omega = st.omega;
        sol.trace.push_back({st.obj, st.resid, st.rate});
        if (stop_met(st, prev_obj, cfg, pg_tol, comm.rate_min, t)) break;
        rho = update_rho(rho, st.infeas, prev_infeas, cfg);
        prev_infeas = st.infeas;
        prev_obj = st.obj;
        for (int inner = 0; inner < cfg.inner_steps; ++inner) {
            ++k;
            cmat g = cmat::Zero(sol.w.rows(), sol.w.cols());
            for (int b = 0; b < batch_size; ++b) {
                cmat s = sample_cscg(scene.n_t(), scene.frame_len, rng);
                g += grad_f(sol.w, s, scene);
            }
            g /= static_cast<double>(batch_size);
            double eta = step.at(k);
            cmat aw = sol.w * sol.w.adjoint();
            // The quartic penalty is much stiffer than the smooth cost once
            // rho has grown; capping its own step keeps the update stable
            // without shrinking the stochastic part.
            double eta_pen = std::min(
                eta, 1.0 / (2.0 * rho * std::max(aw.real().trace(), 1e-12)));
            cmat move = eta * g + eta_pen * rho * (aw - sol.omega) * sol.w;
            double mn = move.norm();
            if (mn > d_max) move *= d_max / mn;
            sol.w = project_power(sol.w - move, scene.power);
        }
    }
    adopt_projection_if_needed(sol, comm, scene, cfg.feas_tol);
    // A stationary point of the deterministic baseline is always available;
    // near capacity the stochastic iterates cannot settle inside the thin
    // feasible shell, so keep whichever the held-out batch prefers.
    cmat w_safe = hermitian_sqrt(detopt_cov(scene, comm));
    if (elmmse_mc(w_safe, scene, validation) <
        elmmse_mc(sol.w, scene, validation)) {
        sol.w = w_safe;
        sol.omega = sol.w * sol.w.adjoint();
    }
    sol.achieved_rate = achievable_rate(sol.w, comm);
    sol.elmmse = elmmse_mc(sol.w, scene, validation);
    sol.trace.push_back(
        {sol.elmmse, (sol.omega - sol.w * sol.w.adjoint()).norm(),
         sol.achieved_rate});
    if (sol.achieved_rate < comm.rate_min - cfg.xi0)
        throw std::runtime_error("dip_isac_sgp_ao: rate restoration failed");
    return sol;
}

PowerAllocation hsnr_isac_sca(const SensingScene& scene, const CommScene& comm,
                              ScaStop stop) {
    Kappas kap = hsnr_kappas(scene);
    check_rate_feasible(comm, scene);
    Eigen::Index n = scene.n_t();
    double power = scene.power;

    // Feasible start: minimize tr(omega^-1) over the rate-feasible set by
    // projected gradient from the equal-power covariance.
    cmat omega = rate_projection(
        (power / static_cast<double>(n)) * cmat::Identity(n, n), comm, power);
    auto inv_trace = [&](const cmat& o) { return hpd_inverse(o).real().trace(); };
    double f0 = inv_trace(omega);
    double step = power / static_cast<double>(n);
    for (int it = 0; it < 200; ++it) {
        cmat oi = hpd_inverse(omega);
        cmat grad = -oi * oi;
        bool accepted = false;
        cmat cand;
        double fc = 0.0;
        double s = step;
        for (int bt = 0; bt < 40; ++bt) {
            cand = rate_projection(omega - s * grad, comm, power);
            HermitianEig ce = eig_hermitian(cand);
            if (ce.values.minCoeff() > 1e-12) {
                fc = inv_trace(cand);
                if (fc <= f0) {
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if (!accepted) break;
        double rel = (f0 - fc) / std::max(1.0, std::abs(f0));
        omega = cand;
        f0 = fc;
        step = s * 2.0;
        if (rel < 1e-8) break;
    }

    PowerAllocation out;
    out.kappa = kap;
    out.trace.push_back(hsnr_cost(omega, scene));
    double grad_scale = 0.0;
    for (int j = 0; j < stop.j_max; ++j) {
        cmat grad = hsnr_grad(omega, scene);
        if (j == 0) grad_scale = std::max(1.0, grad.norm());
        cmat cand = rate_projection(omega - (power / grad_scale) * grad, comm,
                                    power);
        cmat dir = cand - omega;
        auto value = [&](double d) {
            cmat o = omega + d * dir;
            Eigen::LLT<cmat> llt(o);
            if (llt.info() != Eigen::Success) return 1e300;
            return hsnr_cost(o, scene);
        };
        double a = 0.0, b = 1.0;
        const double inv_phi = 0.61803398874989484820;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = value(x1);
        double f2 = value(x2);
        for (int it = 0; it < 40; ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = value(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = value(x2);
            }
        }
        double delta = 0.5 * (a + b);
        double f_next = value(delta);
        if (f_next >= out.trace.back() - 1e-12 * std::abs(out.trace.back()))
            break;
        omega += delta * dir;
        out.trace.push_back(f_next);
    }
    HermitianEig oe = eig_hermitian(omega);
    out.omega = omega;
    out.p = oe.values.cwiseMax(1e-300).cwiseInverse();
    return out;
}

cmat detopt_baseline(const SensingScene& scene, const CommScene& comm) {
    check_rate_feasible(comm, scene);
    return hermitian_sqrt(detopt_cov(scene, comm));
}

RateGap prop2_gap(const std::vector<IsacSolution>& solutions,
                  const CommScene& comm, double power) {
    if (solutions.empty())
        throw std::invalid_argument("prop2_gap: empty ensemble");
    std::vector<double> rates;
    rates.reserve(solutions.size());
    for (const IsacSolution& s : solutions)
        rates.push_back(achievable_rate(s.w, comm));
    double avg = pairwise_sum(rates) / static_cast<double>(rates.size());
    return {avg, capacity_waterfill(comm.hc, comm.sigma_c2, power).rate};
}

}  // namespace isac
