// Scene model: correlation/channel generation, the LMMSE estimator and its
// costs, Monte Carlo ergodic-cost evaluation, and achievable rate.
//
// Everything here works in linear units (watts); dB/dBm conversion belongs
// to the benchmark harness.

#pragma once

#include <cstdint>
#include <vector>

#include "isac/linalg.hpp"

namespace isac {

// Sensing side: target-response correlation, noise power, receiver size,
// frame length and transmit power budget.
struct SensingScene {
    cmat rh;               // N_T x N_T Hermitian positive definite
    HermitianEig rh_eig;   // cached, values ascending
    cmat rh_inv;
    double sigma_s2;
    int n_r;
    int frame_len;
    double power;

    SensingScene(cmat rh_in, double sigma_s2_in, int n_r_in, int frame_len_in,
                 double power_in);

    Eigen::Index n_t() const { return rh.rows(); }
};

struct CapacityPoint {
    cmat w;
    double rate;
};

// Rate-optimal precoder: power water-filled over the singular values of hc.
CapacityPoint capacity_waterfill(const cmat& hc, double sigma_c2, double power);

// Communication side; construction verifies the rate floor is attainable
// under the given power budget.
struct CommScene {
    cmat hc;          // N_u x N_T
    double sigma_c2;
    double rate_min;  // R0

    CommScene(cmat hc_in, double sigma_c2_in, double rate_min_in,
              double power_budget);
};

// Seeded i.i.d. CN(0,1) signal frames; realization k is regenerated from
// sub_seed(seed, k), independent of batch size or traversal order.
struct SignalBatch {
    std::uint64_t seed = 0;
    std::vector<cmat> realizations;

    static SignalBatch generate(std::uint64_t seed, int n, Eigen::Index n_t,
                                Eigen::Index frame_len);
};

// Hermitian PD matrix with eigenvalues i.i.d. uniform on [eig_low, eig_high]
// and a Haar-random eigenbasis (QR of a Gaussian matrix, phases normalized).
cmat gen_rh(Eigen::Index n_t, double eig_low, double eig_high, Philox& rng);

// Linear MMSE estimate of the target response from the sensing snapshot:
// Y_s (X^H R_H X + sigma_s^2 N_R I)^-1 X^H R_H.
cmat lmmse_estimate(const cmat& ys, const cmat& x, const SensingScene& scene);

// Deterministic cost tr[(R_H^-1 + (L/(sigma_s^2 N_R)) W W^H)^-1], i.e. the
// estimation error when the signal Gram equals its expectation L*I.
double lmmse_cost(const cmat& w, const SensingScene& scene);

// Per-realization cost f(W; S) = tr[(R_H^-1 + (1/(sigma_s^2 N_R)) W S S^H W^H)^-1].
double lmmse_cost_given_s(const cmat& w, const cmat& s,
                          const SensingScene& scene);

// Monte Carlo ergodic cost: mean of f(W; S_n) over the batch.
double elmmse_mc(const cmat& w, const SensingScene& scene,
                 const SignalBatch& batch);

// Same estimate with its Monte Carlo standard error.
MeanSe elmmse_mc_stats(const cmat& w, const SensingScene& scene,
                       const SignalBatch& batch);

// log2 det(I + sigma_c^-2 H_c W W^H H_c^H), in bits/s/Hz.
double achievable_rate(const cmat& w, const CommScene& comm);

// Rate through a transmit covariance instead of a precoder; tiny negative
// eigenvalues of omega are treated as zero.
double rate_from_cov(const cmat& omega, const CommScene& comm);

}  // namespace isac
