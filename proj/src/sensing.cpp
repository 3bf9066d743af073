#include "isac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isac {

cmat waterfill_lmmse(const SensingScene& scene) {
    const rvec& lam = scene.rh_eig.values;
    Eigen::Index n = lam.size();
    double budget = scene.power * static_cast<double>(scene.frame_len) /
                    (scene.sigma_s2 * static_cast<double>(scene.n_r));
    rvec inv_lam = lam.cwiseInverse();
    auto alloc_sum = [&](double mu) {
        return (mu - inv_lam.array()).max(0.0).sum();
    };
    double lo = inv_lam.minCoeff();
    double hi = inv_lam.maxCoeff() + budget;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (alloc_sum(mid) > budget ? hi : lo) = mid;
    }
    double mu = 0.5 * (lo + hi);
    rvec p = (mu - inv_lam.array()).max(0.0).matrix();
    double scale = scene.sigma_s2 * static_cast<double>(scene.n_r) /
                   static_cast<double>(scene.frame_len);
    return scene.rh_eig.basis * (scale * p.array()).sqrt().matrix().asDiagonal() *
           cmat::Identity(n, n);
}

cmat ddp_solve(const cmat& s_n, const SensingScene& scene) {
    if (s_n.rows() != scene.n_t())
        throw std::invalid_argument("ddp_solve: signal has wrong row count");
    if (s_n.squaredNorm() == 0.0)
        throw std::invalid_argument("ddp_solve: zero signal has no informative direction");
    Eigen::Index n = scene.n_t();
    const rvec& lam = scene.rh_eig.values;

    // Eigenvalues of the signal Gram ascending pair up with the prior
    // eigenvalues ascending: the strongest signal direction meets the
    // weakest prior precision.
    HermitianEig gram = eig_hermitian(s_n * s_n.adjoint());
    double noise = scene.sigma_s2 * static_cast<double>(scene.n_r);
    rvec theta = gram.values.cwiseMax(0.0) / noise;
    double floor = 1e-12 * theta.maxCoeff();

    rvec inv_sqrt_theta = rvec::Zero(n);
    rvec base = rvec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (theta(i) > floor) {
            inv_sqrt_theta(i) = 1.0 / std::sqrt(theta(i));
            base(i) = 1.0 / (lam(i) * theta(i));
        }
    }
    auto alloc = [&](double mu) {
        rvec p = rvec::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (theta(i) > floor)
                p(i) = std::max(mu * inv_sqrt_theta(i) - base(i), 0.0);
        return p;
    };
    double lo = 0.0, hi = 1.0;
    while (alloc(hi).sum() < scene.power) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (alloc(mid).sum() > scene.power ? hi : lo) = mid;
    }
    rvec p = alloc(0.5 * (lo + hi));
    return scene.rh_eig.basis * p.cwiseSqrt().asDiagonal() * gram.basis.adjoint();
}

cmat grad_f(const cmat& w, const cmat& s, const SensingScene& scene) {
    double c = 1.0 / (scene.sigma_s2 * static_cast<double>(scene.n_r));
    cmat k = s * s.adjoint();
    cmat delta = scene.rh_inv + c * w * k * w.adjoint();
    cmat di = hpd_inverse(delta);
    return -c * di * di * w * k;
}

namespace {

OptResult run_projected_sgd(const SensingScene& scene, int batch_size,
                            StepSchedule schedule, bool momentum,
                            MomentParams betas, const cmat& init,
                            std::uint64_t seed, StopRule stop,
                            const SignalBatch& validation) {
    if (batch_size < 1)
        throw std::invalid_argument("sgp: batch_size must be >= 1");
    OptResult out;
    cmat w = project_power(init, scene.power);
    cmat m = cmat::Zero(w.rows(), w.cols());
    double v = 0.0;
    Philox rng(seed);
    out.max_iterate_sq_norm = w.squaredNorm();
    out.trace.push_back(elmmse_mc(w, scene, validation));
    for (int r = 1; r <= stop.r_max; ++r) {
        cmat g = cmat::Zero(w.rows(), w.cols());
        for (int b = 0; b < batch_size; ++b) {
            cmat s = sample_cscg(scene.n_t(), scene.frame_len, rng);
            g += grad_f(w, s, scene);
        }
        g /= static_cast<double>(batch_size);
        double eta = schedule.at(r);
        if (momentum) {
            m = betas.beta1 * m + (1.0 - betas.beta1) * g;
            v = betas.beta2 * v + (1.0 - betas.beta2) * g.squaredNorm();
            double bc1 = 1.0 - std::pow(betas.beta1, r);
            double bc2 = 1.0 - std::pow(betas.beta2, r);
            cmat m_hat = (bc1 > 0.0) ? cmat(m / bc1) : m;
            double v_hat = (bc2 > 0.0) ? v / bc2 : v;
            w = project_power(w - (eta / (std::sqrt(v_hat) + betas.eps0)) * m_hat,
                              scene.power);
        } else {
            w = project_power(w - eta * g, scene.power);
        }
        out.max_iterate_sq_norm = std::max(out.max_iterate_sq_norm, w.squaredNorm());
        out.trace.push_back(elmmse_mc(w, scene, validation));
        out.iterations = r;
        std::size_t t = out.trace.size();
        if (std::abs(out.trace[t - 1] - out.trace[t - 2]) < stop.eps) break;
    }
    out.w = w;
    return out;
}

}  // namespace

OptResult sgp(const SensingScene& scene, int batch_size, StepSchedule schedule,
              const cmat& init, std::uint64_t seed, StopRule stop,
              const SignalBatch& validation) {
    return run_projected_sgd(scene, batch_size, schedule, false, MomentParams{},
                             init, seed, stop, validation);
}

OptResult mb_sgp(const SensingScene& scene, int batch_size,
                 StepSchedule schedule, MomentParams betas, const cmat& init,
                 std::uint64_t seed, StopRule stop,
                 const SignalBatch& validation) {
    return run_projected_sgd(scene, batch_size, schedule, true, betas, init,
                             seed, stop, validation);
}

Kappas hsnr_kappas(const SensingScene& scene) {
    double excess = static_cast<double>(scene.frame_len) -
                    static_cast<double>(scene.n_t());
    if (excess <= 0.0)
        throw std::domain_error("hsnr_kappas: requires frame_len > n_t");
    double k1 = scene.sigma_s2 * static_cast<double>(scene.n_r) / excess;
    return {k1, k1 * k1, k1 * k1 / excess};
}

double hsnr_cost(const cmat& omega, const SensingScene& scene) {
    Kappas k = hsnr_kappas(scene);
    const cmat& q = scene.rh_eig.basis;
    rvec inv_lam = scene.rh_eig.values.cwiseInverse();
    cmat omega_inv = hpd_inverse(0.5 * (omega + omega.adjoint()));
    cmat pi_inv = q.adjoint() * omega_inv * q;  // inverse of Q^H omega Q
    double tr_oi = omega_inv.real().trace();
    double tr_li_pi2 = (inv_lam.asDiagonal() * pi_inv * pi_inv).real().trace();
    double tr_li_pi = (inv_lam.asDiagonal() * pi_inv).real().trace();
    return k.k1 * tr_oi - k.k2 * tr_li_pi2 - k.k3 * tr_oi * tr_li_pi;
}

cmat hsnr_grad(const cmat& omega, const SensingScene& scene) {
    Kappas k = hsnr_kappas(scene);
    const cmat& q = scene.rh_eig.basis;
    cmat li = scene.rh_eig.values.cwiseInverse().asDiagonal();
    cmat omega_inv = hpd_inverse(0.5 * (omega + omega.adjoint()));
    cmat oi2 = omega_inv * omega_inv;
    cmat pi_inv = q.adjoint() * omega_inv * q;
    cmat pi2 = pi_inv * pi_inv;
    double tr_oi = omega_inv.real().trace();
    double tr_li_pi = (li * pi_inv).real().trace();
    cmat g = -k.k1 * oi2;
    g += k.k2 * q * (pi2 * li * pi_inv + pi_inv * li * pi2) * q.adjoint();
    g += k.k3 * tr_li_pi * oi2;
    g += k.k3 * tr_oi * q * (pi_inv * li * pi_inv) * q.adjoint();
    return 0.5 * (g + g.adjoint());
}

namespace {

double gvalue(const rvec& p, const rvec& inv_lam, const Kappas& k) {
    double sp = p.sum();
    double swp = inv_lam.dot(p);
    double swp2 = (inv_lam.array() * p.array().square()).sum();
    return k.k1 * sp - k.k2 * swp2 - k.k3 * sp * swp;
}

rvec ggrad(const rvec& p, const rvec& inv_lam, const Kappas& k) {
    double sp = p.sum();
    double swp = inv_lam.dot(p);
    return (k.k1 - 2.0 * k.k2 * inv_lam.array() * p.array() -
            k.k3 * (swp + inv_lam.array() * sp))
        .matrix();
}

}  // namespace

rvec linearized_subproblem(const rvec& grad, const rvec& p_current,
                           double power, double p_cap) {
    if (!grad.allFinite())
        throw std::invalid_argument("linearized_subproblem: non-finite gradient");
    if (grad.isZero(0.0)) return p_current;
    Eigen::Index n = grad.size();
    double cap = std::max(p_cap, 2.0 * static_cast<double>(n) / power);
    auto inv_p_sum = [&](double nu) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (grad(i) > 0.0)
                total += std::max(std::sqrt(grad(i) / nu), 1.0 / cap);
            else
                total += 1.0 / cap;
        }
        return total;
    };
    double g_max = grad.maxCoeff();
    rvec p(n);
    if (g_max <= 0.0) {
        p.setConstant(cap);
        return p;
    }
    double lo = g_max * 1e-30;
    double hi = g_max * cap * cap;
    while (inv_p_sum(lo) < power) lo *= 0.5;  // guard pathological caps
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (inv_p_sum(mid) > power ? lo : hi) = mid;
        if (std::abs(inv_p_sum(mid) - power) <= 1e-12 * std::max(1.0, power))
            break;
    }
    double nu = 0.5 * (lo + hi);
    for (Eigen::Index i = 0; i < n; ++i)
        p(i) = (grad(i) > 0.0) ? std::min(std::sqrt(nu / grad(i)), cap) : cap;
    // Bisection can leave the budget marginally oversubscribed; inflate the
    // coordinates uniformly so the spent budget lands exactly on the limit.
    double spent = p.cwiseInverse().sum();
    if (spent > power) p *= spent / power;
    return p;
}

PowerAllocation hsnr_sca(const SensingScene& scene, ScaStop stop) {
    Kappas kap = hsnr_kappas(scene);
    Eigen::Index n = scene.n_t();
    rvec inv_lam = scene.rh_eig.values.cwiseInverse();
    double power = scene.power;
    double cap = 1e6 * static_cast<double>(n) / power;

    rvec p = rvec::Constant(n, static_cast<double>(n) / power);  // equal power
    PowerAllocation out;
    out.kappa = kap;
    out.trace.push_back(gvalue(p, inv_lam, kap));
    for (int j = 0; j < stop.j_max; ++j) {
        rvec grad = ggrad(p, inv_lam, kap);
        rvec p_new = linearized_subproblem(grad, p, power, cap);
        rvec dir = p_new - p;
        if (grad.dot(dir) >= stop.tau) break;
        // Golden-section search for the step on the true objective.
        double a = 0.0, b = 1.0;
        const double inv_phi = 0.61803398874989484820;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = gvalue(p + x1 * dir, inv_lam, kap);
        double f2 = gvalue(p + x2 * dir, inv_lam, kap);
        for (int it = 0; it < 40; ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = gvalue(p + x1 * dir, inv_lam, kap);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = gvalue(p + x2 * dir, inv_lam, kap);
            }
        }
        double delta = 0.5 * (a + b);
        rvec p_next = p + delta * dir;
        double g_next = gvalue(p_next, inv_lam, kap);
        if (g_next >= out.trace.back()) break;
        p = p_next;
        out.trace.push_back(g_next);
    }
    out.p = p;
    out.omega = scene.rh_eig.basis * p.cwiseInverse().asDiagonal() *
                scene.rh_eig.basis.adjoint();
    return out;
}

}  // namespace isac
