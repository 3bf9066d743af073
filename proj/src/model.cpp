#include "isac/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isac {

SensingScene::SensingScene(cmat rh_in, double sigma_s2_in, int n_r_in,
                           int frame_len_in, double power_in)
    : rh(std::move(rh_in)),
      sigma_s2(sigma_s2_in),
      n_r(n_r_in),
      frame_len(frame_len_in),
      power(power_in) {
    if (rh.rows() != rh.cols())
        throw std::invalid_argument("SensingScene: rh must be square");
    if (sigma_s2 <= 0.0) throw std::invalid_argument("SensingScene: sigma_s2 <= 0");
    if (n_r < 1) throw std::invalid_argument("SensingScene: n_r < 1");
    if (frame_len < 1) throw std::invalid_argument("SensingScene: frame_len < 1");
    if (power <= 0.0) throw std::invalid_argument("SensingScene: power <= 0");
    rh_eig = eig_hermitian(rh);
    if (rh_eig.values.minCoeff() < 1e-9)
        throw std::invalid_argument("SensingScene: rh not positive definite");
    rh_inv = rh_eig.basis * rh_eig.values.cwiseInverse().asDiagonal() *
             rh_eig.basis.adjoint();
}

CapacityPoint capacity_waterfill(const cmat& hc, double sigma_c2, double power) {
    if (power <= 0.0)
        throw std::invalid_argument("capacity_waterfill: power <= 0");
    Svd dec = svd(hc);
    Eigen::Index m = dec.singulars.size();
    std::vector<double> gain;  // s_i^2 / sigma_c2 for the active modes
    for (Eigen::Index i = 0; i < m; ++i) {
        double s2 = dec.singulars(i) * dec.singulars(i);
        if (s2 > 1e-15 * dec.singulars(0) * dec.singulars(0) && s2 > 0.0)
            gain.push_back(s2 / sigma_c2);
    }
    Eigen::Index n_t = hc.cols();
    cmat w = cmat::Zero(n_t, n_t);
    double rate = 0.0;
    if (!gain.empty()) {
        double lo = 0.0, hi = 1.0 / gain.back() + power;
        auto alloc = [&](double mu) {
            double total = 0.0;
            for (double g : gain) total += std::max(mu - 1.0 / g, 0.0);
            return total;
        };
        while (alloc(hi) < power) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (alloc(mid) > power ? hi : lo) = mid;
        }
        double mu = 0.5 * (lo + hi);
        rvec q = rvec::Zero(n_t);
        for (std::size_t i = 0; i < gain.size(); ++i)
            q(static_cast<Eigen::Index>(i)) = std::max(mu - 1.0 / gain[i], 0.0);
        w = dec.right * q.cwiseSqrt().asDiagonal() * dec.right.adjoint();
        for (std::size_t i = 0; i < gain.size(); ++i)
            rate += std::log2(1.0 + q(static_cast<Eigen::Index>(i)) * gain[i]);
    }
    return {w, rate};
}

CommScene::CommScene(cmat hc_in, double sigma_c2_in, double rate_min_in,
                     double power_budget)
    : hc(std::move(hc_in)), sigma_c2(sigma_c2_in), rate_min(rate_min_in) {
    if (sigma_c2 <= 0.0) throw std::invalid_argument("CommScene: sigma_c2 <= 0");
    if (rate_min < 0.0) throw std::invalid_argument("CommScene: rate_min < 0");
    double cap = capacity_waterfill(hc, sigma_c2, power_budget).rate;
    if (rate_min > cap + 1e-12)
        throw std::invalid_argument("CommScene: rate_min above channel capacity");
}

SignalBatch SignalBatch::generate(std::uint64_t seed, int n, Eigen::Index n_t,
                                  Eigen::Index frame_len) {
    if (n < 1) throw std::invalid_argument("SignalBatch: need n >= 1");
    SignalBatch batch;
    batch.seed = seed;
    batch.realizations.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        Philox rng(sub_seed(seed, static_cast<std::uint64_t>(k)));
        batch.realizations.push_back(sample_cscg(n_t, frame_len, rng));
    }
    return batch;
}

cmat gen_rh(Eigen::Index n_t, double eig_low, double eig_high, Philox& rng) {
    if (!(0.0 < eig_low && eig_low <= eig_high))
        throw std::invalid_argument("gen_rh: need 0 < eig_low <= eig_high");
    rvec lam(n_t);
    for (Eigen::Index i = 0; i < n_t; ++i)
        lam(i) = rng.next_uniform(eig_low, eig_high);
    cmat g = sample_cscg(n_t, n_t, rng);
    Eigen::HouseholderQR<cmat> qr(g);
    cmat q = qr.householderQ();
    cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n_t; ++i) {
        cplx d = r(i, i);
        double mag = std::abs(d);
        q.col(i) *= (mag > 0.0) ? d / mag : cplx(1.0, 0.0);
    }
    return q * lam.asDiagonal() * q.adjoint();
}

cmat lmmse_estimate(const cmat& ys, const cmat& x, const SensingScene& scene) {
    if (x.rows() != scene.n_t() || ys.cols() != x.cols() ||
        ys.rows() != scene.n_r)
        throw std::invalid_argument("lmmse_estimate: dimension mismatch");
    Eigen::Index l = x.cols();
    cmat gram = x.adjoint() * scene.rh * x +
                scene.sigma_s2 * static_cast<double>(scene.n_r) *
                    cmat::Identity(l, l);
    Eigen::LLT<cmat> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("lmmse_estimate: gram matrix not PD");
    return ys * llt.solve(x.adjoint() * scene.rh);
}

double lmmse_cost(const cmat& w, const SensingScene& scene) {
    double c = static_cast<double>(scene.frame_len) /
               (scene.sigma_s2 * static_cast<double>(scene.n_r));
    cmat m = scene.rh_inv + c * w * w.adjoint();
    return hpd_inverse(m).real().trace();
}

double lmmse_cost_given_s(const cmat& w, const cmat& s,
                          const SensingScene& scene) {
    double c = 1.0 / (scene.sigma_s2 * static_cast<double>(scene.n_r));
    cmat ws = w * s;
    cmat m = scene.rh_inv + c * ws * ws.adjoint();
    return hpd_inverse(m).real().trace();
}

double elmmse_mc(const cmat& w, const SensingScene& scene,
                 const SignalBatch& batch) {
    return elmmse_mc_stats(w, scene, batch).mean;
}

MeanSe elmmse_mc_stats(const cmat& w, const SensingScene& scene,
                       const SignalBatch& batch) {
    if (batch.realizations.empty())
        throw std::invalid_argument("elmmse_mc: empty batch");
    std::vector<double> costs;
    costs.reserve(batch.realizations.size());
    for (const cmat& s : batch.realizations)
        costs.push_back(lmmse_cost_given_s(w, s, scene));
    return mean_se(costs);
}

namespace {

double log2_det_capacity(const cmat& hc, double sigma_c2, const cmat& gram) {
    Eigen::Index n_u = hc.rows();
    cmat m = cmat::Identity(n_u, n_u) + (1.0 / sigma_c2) * hc * gram * hc.adjoint();
    HermitianEig eig = eig_hermitian(m);
    double bits = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        bits += std::log2(std::max(eig.values(i), 1.0));
    return bits;
}

}  // namespace

double achievable_rate(const cmat& w, const CommScene& comm) {
    return log2_det_capacity(comm.hc, comm.sigma_c2, w * w.adjoint());
}

double rate_from_cov(const cmat& omega, const CommScene& comm) {
    cmat sym = 0.5 * (omega + omega.adjoint());
    return log2_det_capacity(comm.hc, comm.sigma_c2, sym);
}

}  // namespace isac
