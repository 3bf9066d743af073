#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "isac/sensing.hpp"
#include "support/nelder_mead.hpp"

using namespace isac;

namespace {

SensingScene make_scene(std::uint64_t seed, Eigen::Index n_t, int n_r,
                        int frame_len, double power, double sigma_s2 = 1.0) {
    Philox rng(seed, 0);
    return SensingScene(gen_rh(n_t, 1.0, 10.0, rng), sigma_s2, n_r, frame_len,
                        power);
}

cmat to_cmat(const std::vector<double>& x, Eigen::Index rows,
             Eigen::Index cols) {
    cmat w(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            w(i, j) = cplx(x[k], x[k + 1]);
            k += 2;
        }
    return w;
}

// Best precoder found by multi-restart simplex search over the power ball.
double simplex_best_cost(const cmat& s, const SensingScene& scene,
                         int restarts, std::uint64_t seed) {
    const Eigen::Index n = scene.n_t();
    auto objective = [&](const std::vector<double>& x) {
        return lmmse_cost_given_s(project_power(to_cmat(x, n, n), scene.power),
                                  s, scene);
    };
    Philox rng(seed, 0);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        cmat w0 = sample_cscg(n, n, rng);
        w0 *= std::sqrt(scene.power) / w0.norm();
        std::vector<double> x0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                x0.push_back(w0(i, j).real());
                x0.push_back(w0(i, j).imag());
            }
        testsupport::SimplexResult res =
            testsupport::nelder_mead(objective, x0, 0.25, 4000);
        best = std::min(best, res.value);
    }
    return best;
}

double elmmse_of_ddp(const SensingScene& scene, const SignalBatch& batch) {
    std::vector<double> costs;
    costs.reserve(batch.realizations.size());
    for (const cmat& s : batch.realizations)
        costs.push_back(lmmse_cost_given_s(ddp_solve(s, scene), s, scene));
    return mean_se(costs).mean;
}

int iters_to_band(const std::vector<double>& trace) {
    if (trace.empty()) return 0;
    double final = trace.back();
    double band = 0.01 * std::abs(final);
    int idx = static_cast<int>(trace.size()) - 1;
    while (idx > 0 && std::abs(trace[static_cast<std::size_t>(idx - 1)] - final) <= band)
        --idx;
    return idx;
}

}  // namespace

TEST_CASE("waterfill_lmmse: equal prior eigenvalues spread power evenly") {
    const Eigen::Index n_t = 4;
    const double power = 3.0;
    SensingScene scene(cmat::Identity(n_t, n_t), 0.8, 3, 16, power);
    cmat w = waterfill_lmmse(scene);
    CHECK(w.squaredNorm() == doctest::Approx(power).epsilon(1e-9));
    double expect =
        static_cast<double>(n_t) /
        (1.0 + 16.0 * power / (0.8 * 3.0 * static_cast<double>(n_t)));
    CHECK(lmmse_cost(w, scene) == doctest::Approx(expect).epsilon(1e-9));
    cmat gram = w * w.adjoint();
    CHECK((gram - (power / static_cast<double>(n_t)) *
                      cmat::Identity(n_t, n_t)).norm() <= 1e-9);
}

TEST_CASE("waterfill_lmmse: power budget is met exactly on random scenes") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SensingScene scene = make_scene(seed, 6, 4, 12, 2.5);
        cmat w = waterfill_lmmse(scene);
        CHECK(w.squaredNorm() == doctest::Approx(scene.power).epsilon(1e-9));
        // Water-filling can never do worse than equal power.
        cmat iso = std::sqrt(scene.power / 6.0) * cmat::Identity(6, 6);
        CHECK(lmmse_cost(w, scene) <= lmmse_cost(iso, scene) + 1e-12);
    }
}

TEST_CASE("waterfill_lmmse: tiny budget concentrates on the weakest-prior direction") {
    cmat rh = cmat::Zero(2, 2);
    rh(0, 0) = 1.0;
    rh(1, 1) = 5.0;
    const double power = 1e-3;
    const double sigma_s2 = 1.0;
    const int n_r = 2;
    const int frame_len = 8;
    SensingScene scene(rh, sigma_s2, n_r, frame_len, power);
    cmat w = waterfill_lmmse(scene);
    cmat gram = w * w.adjoint();
    // All power rides the large-variance prior direction (index 1).
    CHECK(std::abs(gram(1, 1)) == doctest::Approx(power).epsilon(1e-6));
    CHECK(std::abs(gram(0, 0)) <= 1e-9);
    // Exact two-direction allocation oracle, with the whole budget on one mode:
    double c = static_cast<double>(frame_len) /
               (sigma_s2 * static_cast<double>(n_r));
    double expect = 1.0 + 1.0 / (1.0 / 5.0 + c * power);
    CHECK(lmmse_cost(w, scene) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ddp_solve: matches a multi-restart simplex oracle at n_t=2") {
    SensingScene scene = make_scene(100, 2, 2, 4, 2.0);
    Philox rng(101, 0);
    for (int trial = 0; trial < 4; ++trial) {
        cmat s = sample_cscg(2, 4, rng);
        cmat w = ddp_solve(s, scene);
        CHECK(w.squaredNorm() == doctest::Approx(scene.power).epsilon(1e-9));
        double f_closed = lmmse_cost_given_s(w, s, scene);
        double f_search = simplex_best_cost(s, scene, 20, 5000 + trial);
        CHECK(f_search >= f_closed - 1e-9);
        CHECK(std::abs(f_search - f_closed) <= 1e-6 * f_closed);
    }
}

TEST_CASE("ddp_solve: never loses to water-filling on the realized frame") {
    SensingScene scene = make_scene(102, 4, 4, 8, 2.0);
    cmat wf = waterfill_lmmse(scene);
    Philox rng(103, 0);
    for (int trial = 0; trial < 100; ++trial) {
        cmat s = sample_cscg(4, 8, rng);
        cmat w = ddp_solve(s, scene);
        CHECK(lmmse_cost_given_s(w, s, scene) <=
              lmmse_cost_given_s(wf, s, scene) + 1e-9);
    }
}

TEST_CASE("ddp_solve: scalar case puts the budget on the single mode") {
    const double lambda = 3.0;
    const double power = 2.0;
    const double sigma_s2 = 0.5;
    const int n_r = 4;
    cmat rh = lambda * cmat::Identity(1, 1);
    SensingScene scene(rh, sigma_s2, n_r, 8, power);
    Philox rng(104, 0);
    cmat s = sample_cscg(1, 8, rng);
    cmat w = ddp_solve(s, scene);
    CHECK(w.squaredNorm() == doctest::Approx(power).epsilon(1e-9));
    double expect = 1.0 / (1.0 / lambda +
                           power * s.squaredNorm() /
                               (sigma_s2 * static_cast<double>(n_r)));
    CHECK(lmmse_cost_given_s(w, s, scene) ==
          doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ddp_solve: zero frame and wrong shape are rejected") {
    SensingScene scene = make_scene(105, 3, 3, 6, 1.0);
    CHECK_THROWS_AS(ddp_solve(cmat::Zero(3, 6), scene), std::invalid_argument);
    CHECK_THROWS_AS(ddp_solve(cmat::Zero(2, 6), scene), std::invalid_argument);
}

TEST_CASE("ddp_solve: dominates waterfill, random precoders, and the stochastic solver") {
    SensingScene scene = make_scene(106, 4, 4, 8, 2.0);
    SignalBatch validation = SignalBatch::generate(77, 50, 4, 8);
    cmat wf = waterfill_lmmse(scene);
    OptResult sg = sgp(scene, 10, StepSchedule{}, wf, 42, StopRule{}, validation);
    Philox rng(107, 0);
    for (int trial = 0; trial < 5; ++trial) {
        cmat s = sample_cscg(4, 8, rng);
        double f_star = lmmse_cost_given_s(ddp_solve(s, scene), s, scene);
        CHECK(f_star <= lmmse_cost_given_s(wf, s, scene) + 1e-9);
        CHECK(f_star <= lmmse_cost_given_s(sg.w, s, scene) + 1e-9);
        for (int k = 0; k < 20; ++k) {
            cmat w_rand = project_power(sample_cscg(4, 4, rng), scene.power);
            CHECK(f_star <= lmmse_cost_given_s(w_rand, s, scene) + 1e-9);
        }
    }
}

TEST_CASE("ddp_solve: short frames leave waterfill with an error floor above the adaptive scheme") {
    SensingScene scene = make_scene(108, 6, 4, 3, 10.0);
    SignalBatch batch = SignalBatch::generate(9, 50, 6, 3);
    double ddp_mean = elmmse_of_ddp(scene, batch);
    MeanSe wf = elmmse_mc_stats(waterfill_lmmse(scene), scene, batch);
    CHECK(std::isfinite(ddp_mean));
    CHECK(std::isfinite(wf.mean));
    CHECK(wf.mean > ddp_mean);
    OptResult mb = mb_sgp(scene, 10, StepSchedule{}, MomentParams{},
                          waterfill_lmmse(scene), 3, StopRule{1e-5, 200}, batch);
    CHECK(std::isfinite(mb.trace.back()));
    CHECK(mb.trace.back() < wf.mean);
}

TEST_CASE("grad_f: matches central finite differences along random directions") {
    SensingScene scene = make_scene(109, 4, 4, 8, 2.0);
    Philox rng(110, 0);
    cmat w = project_power(sample_cscg(4, 4, rng), scene.power);
    cmat s = sample_cscg(4, 8, rng);
    cmat g = grad_f(w, s, scene);
    const double h = 1e-6;
    for (int d = 0; d < 10; ++d) {
        cmat dir = sample_cscg(4, 4, rng);
        dir /= dir.norm();
        double up = lmmse_cost_given_s(w + h * dir, s, scene);
        double dn = lmmse_cost_given_s(w - h * dir, s, scene);
        double fd = (up - dn) / (2.0 * h);
        double analytic = 2.0 * (dir.adjoint() * g).real().trace();
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("grad_f: zero frame gives a zero gradient; saturation shrinks it") {
    SensingScene scene = make_scene(111, 4, 4, 8, 2.0);
    Philox rng(112, 0);
    cmat w = project_power(sample_cscg(4, 4, rng), scene.power);
    CHECK(grad_f(w, cmat::Zero(4, 8), scene).norm() == 0.0);
    cmat s = sample_cscg(4, 8, rng);
    CHECK(grad_f(1e3 * w, s, scene).norm() < grad_f(w, s, scene).norm());
}

TEST_CASE("sgp: identical seeds and configs give identical outputs") {
    SensingScene scene = make_scene(113, 4, 4, 8, 2.0);
    SignalBatch validation = SignalBatch::generate(11, 100, 4, 8);
    cmat init = waterfill_lmmse(scene);
    OptResult a = sgp(scene, 5, StepSchedule{}, init, 21, StopRule{}, validation);
    OptResult b = sgp(scene, 5, StepSchedule{}, init, 21, StopRule{}, validation);
    CHECK((a.w - b.w).norm() == 0.0);
    CHECK(a.iterations == b.iterations);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        CHECK(a.trace[i] == b.trace[i]);
    // Different seed, different path.
    OptResult c = sgp(scene, 5, StepSchedule{}, init, 22, StopRule{}, validation);
    CHECK((a.w - c.w).norm() > 0.0);
}

TEST_CASE("sgp: never ends above its water-filling start on the held-out batch") {
    const double snr_db = 10.0;
    const double power = std::pow(10.0, snr_db / 10.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SensingScene scene = make_scene(seed, 8, 8, 8, power);
        SignalBatch validation =
            SignalBatch::generate(seed ^ 0xA5A5, 100, 8, 8);
        cmat init = waterfill_lmmse(scene);
        OptResult res =
            sgp(scene, 10, StepSchedule{}, init, seed * 7 + 1, StopRule{}, validation);
        CHECK(res.trace.back() <= res.trace.front());
        CHECK(res.max_iterate_sq_norm <= scene.power + 1e-9);
    }
}

TEST_CASE("sgp: mid-size mini-batches settle faster than single-sample batches") {
    const double power = 10.0;
    std::vector<double> it1, it10, it100;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        SensingScene scene = make_scene(seed + 30, 8, 8, 8, power);
        SignalBatch validation =
            SignalBatch::generate(seed ^ 0xC3C3, 100, 8, 8);
        cmat init = waterfill_lmmse(scene);
        StopRule stop{};
        it1.push_back(static_cast<double>(iters_to_band(
            sgp(scene, 1, StepSchedule{}, init, seed, stop, validation).trace)));
        it10.push_back(static_cast<double>(iters_to_band(
            sgp(scene, 10, StepSchedule{}, init, seed, stop, validation).trace)));
        it100.push_back(static_cast<double>(iters_to_band(
            sgp(scene, 100, StepSchedule{}, init, seed, stop, validation).trace)));
    }
    double m1 = mean_se(it1).mean;
    double m10 = mean_se(it10).mean;
    double m100 = mean_se(it100).mean;
    CHECK(m10 < m1);
    // Comparable to the large batch: same order of magnitude.
    CHECK(m10 <= 3.0 * m100 + 10.0);
}

TEST_CASE("sgp: infeasible starts are projected and iterates stay feasible") {
    SensingScene scene = make_scene(114, 4, 4, 8, 2.0);
    SignalBatch validation = SignalBatch::generate(13, 100, 4, 8);
    cmat big = 10.0 * cmat::Identity(4, 4);
    OptResult res = sgp(scene, 5, StepSchedule{}, big, 31,
                        StopRule{1e-5, 50}, validation);
    CHECK(res.max_iterate_sq_norm <= scene.power + 1e-9);
    CHECK(res.trace.front() ==
          doctest::Approx(elmmse_mc(project_power(big, scene.power), scene,
                                    validation)).epsilon(1e-12));
}

TEST_CASE("mb_sgp: zero momentum reduces to a normalized gradient step") {
    SensingScene scene = make_scene(115, 4, 4, 8, 2.0);
    SignalBatch validation = SignalBatch::generate(17, 20, 4, 8);
    cmat init = waterfill_lmmse(scene);
    StepSchedule sched{};
    StopRule one_step{1e-12, 1};

    // Recover the first mini-batch gradient from an unclipped plain step.
    SensingScene loose(scene.rh, scene.sigma_s2, scene.n_r, scene.frame_len,
                       1e12);
    OptResult plain = sgp(loose, 5, sched, init, 99, one_step, validation);
    double eta = sched.at(1);
    cmat g = (init - plain.w) / eta;

    MomentParams off{0.0, 0.0, 1e-8};
    OptResult mb = mb_sgp(scene, 5, sched, off, init, 99, one_step, validation);
    cmat expect =
        project_power(init - (eta / (g.norm() + off.eps0)) * g, scene.power);
    CHECK((mb.w - expect).norm() <= 1e-9 * expect.norm());
}

TEST_CASE("mb_sgp: determinism and feasibility of every iterate") {
    SensingScene scene = make_scene(116, 4, 4, 8, 2.0);
    SignalBatch validation = SignalBatch::generate(19, 100, 4, 8);
    cmat init = waterfill_lmmse(scene);
    OptResult a = mb_sgp(scene, 10, StepSchedule{}, MomentParams{}, init, 5,
                         StopRule{}, validation);
    OptResult b = mb_sgp(scene, 10, StepSchedule{}, MomentParams{}, init, 5,
                         StopRule{}, validation);
    CHECK((a.w - b.w).norm() == 0.0);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        CHECK(a.trace[i] == b.trace[i]);
    CHECK(a.max_iterate_sq_norm <= scene.power + 1e-9);
}

TEST_CASE("mb_sgp: settles at least as fast as the plain solver with matching finals") {
    const double sigma_s2 = 0.25;
    const double power = sigma_s2 * std::pow(10.0, 1.0);  // 10 dB
    std::vector<double> plain_iters, mom_iters, plain_final, mom_final;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SensingScene scene = make_scene(seed + 60, 8, 8, 8, power, sigma_s2);
        SignalBatch validation =
            SignalBatch::generate(seed ^ 0x5A5A, 100, 8, 8);
        cmat init = waterfill_lmmse(scene);
        OptResult p =
            sgp(scene, 10, StepSchedule{}, init, seed, StopRule{}, validation);
        OptResult m = mb_sgp(scene, 10, StepSchedule{}, MomentParams{}, init,
                             seed, StopRule{}, validation);
        plain_iters.push_back(static_cast<double>(iters_to_band(p.trace)));
        mom_iters.push_back(static_cast<double>(iters_to_band(m.trace)));
        plain_final.push_back(p.trace.back());
        mom_final.push_back(m.trace.back());
    }
    CHECK(mean_se(mom_iters).mean <= mean_se(plain_iters).mean);
    double pf = mean_se(plain_final).mean;
    double mf = mean_se(mom_final).mean;
    CHECK(std::abs(pf - mf) <= 0.01 * std::max(pf, mf));
}

TEST_CASE("stochastic solvers improve on water-filling in the ergodic metric") {
    const double power = 10.0;  // SNR 10 dB at unit noise
    std::vector<double> diff_mb_ddp, diff_wf_mb;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SensingScene scene = make_scene(seed + 90, 8, 8, 8, power);
        SignalBatch batch = SignalBatch::generate(seed ^ 0x77, 100, 8, 8);
        cmat wf = waterfill_lmmse(scene);
        OptResult mb = mb_sgp(scene, 10, StepSchedule{}, MomentParams{}, wf,
                              seed, StopRule{}, batch);
        for (const cmat& s : batch.realizations) {
            double f_ddp = lmmse_cost_given_s(ddp_solve(s, scene), s, scene);
            double f_mb = lmmse_cost_given_s(mb.w, s, scene);
            double f_wf = lmmse_cost_given_s(wf, s, scene);
            diff_mb_ddp.push_back(f_mb - f_ddp);
            diff_wf_mb.push_back(f_wf - f_mb);
        }
    }
    MeanSe a = mean_se(diff_mb_ddp);
    MeanSe b = mean_se(diff_wf_mb);
    CHECK(a.mean >= -a.se);
    CHECK(b.mean >= -b.se);
}

TEST_CASE("hsnr_kappas: closed-form constants and the short-frame guard") {
    SensingScene scene(cmat::Identity(32, 32), 1.0, 32, 40, 1.0);
    Kappas k = hsnr_kappas(scene);
    CHECK(k.k1 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(k.k2 == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(k.k3 == doctest::Approx(2.0).epsilon(1e-12));
    SensingScene tight(cmat::Identity(8, 8), 1.0, 8, 8, 1.0);
    CHECK_THROWS_AS(hsnr_kappas(tight), std::domain_error);
    CHECK_THROWS_AS(hsnr_cost(cmat::Identity(8, 8), tight), std::domain_error);
}

TEST_CASE("hsnr_cost: isotropic closed form") {
    const Eigen::Index n_t = 6;
    SensingScene scene(cmat::Identity(n_t, n_t), 1.0, 8, 20, 1.0);
    Kappas k = hsnr_kappas(scene);
    const double c = 3.0;
    double n = static_cast<double>(n_t);
    double expect = k.k1 * n / c - k.k2 * n / (c * c) - k.k3 * n * n / (c * c);
    CHECK(hsnr_cost(c * cmat::Identity(n_t, n_t), scene) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("hsnr_cost: approximates the ergodic cost at high SNR, improving with SNR") {
    Philox rng(200, 0);
    cmat rh = gen_rh(8, 1.0, 10.0, rng);
    std::vector<double> snrs = {16.0, 24.0, 32.0};
    std::vector<double> rel_err;
    for (double snr : snrs) {
        double power = std::pow(10.0, snr / 10.0);
        SensingScene scene(rh, 1.0, 8, 10, power);
        cmat w = waterfill_lmmse(scene);
        SignalBatch batch = SignalBatch::generate(201, 2000, 8, 10);
        double mc = elmmse_mc(w, scene, batch);
        double fit = hsnr_cost(w * w.adjoint(), scene);
        rel_err.push_back(std::abs(fit - mc) / mc);
    }
    CHECK(rel_err.back() <= 0.05);
    CHECK(rel_err[0] > rel_err[1]);
    CHECK(rel_err[1] > rel_err[2]);
}

TEST_CASE("hsnr_grad: matches central finite differences on Hermitian directions") {
    Philox rng(202, 0);
    cmat rh = gen_rh(5, 1.0, 10.0, rng);
    SensingScene scene(rh, 1.0, 8, 12, 4.0);
    cmat base = sample_cscg(5, 5, rng);
    cmat omega = base * base.adjoint() + cmat::Identity(5, 5);
    cmat g = hsnr_grad(omega, scene);
    const double h = 1e-6;
    for (int d = 0; d < 10; ++d) {
        cmat e = sample_cscg(5, 5, rng);
        e = 0.5 * (e + e.adjoint());
        e /= e.norm();
        double up = hsnr_cost(omega + h * e, scene);
        double dn = hsnr_cost(omega - h * e, scene);
        double fd = (up - dn) / (2.0 * h);
        double analytic = (g * e).real().trace();
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("hsnr_sca: trace is non-increasing and converges inside the cap") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SensingScene scene = make_scene(seed + 300, 8, 8, 16, 50.0);
        PowerAllocation res = hsnr_sca(scene, ScaStop{});
        REQUIRE(!res.trace.empty());
        for (std::size_t i = 0; i + 1 < res.trace.size(); ++i)
            CHECK(res.trace[i + 1] <= res.trace[i]);
        CHECK(res.trace.size() <= 31);
        CHECK((res.p.array() > 0.0).all());
        CHECK(res.p.cwiseInverse().sum() <= scene.power + 1e-9);
    }
}

TEST_CASE("hsnr_sca: at high SNR it converges fast and stays near equal power") {
    Philox rng(303, 0);
    cmat rh = gen_rh(32, 1.0, 10.0, rng);
    double power = std::pow(10.0, 3.2);  // 32 dB at unit noise
    SensingScene scene(rh, 1.0, 32, 40, power);
    PowerAllocation res = hsnr_sca(scene, ScaStop{});
    CHECK(res.trace.size() <= 16);
    double init = res.trace.front();
    double final = res.trace.back();
    CHECK(std::abs(final - init) <= 0.01 * std::abs(init));
    CHECK(res.omega.real().trace() <= scene.power + 1e-9);
    double comm = (res.omega * scene.rh - scene.rh * res.omega).norm();
    CHECK(comm <= 1e-8 * res.omega.norm() * scene.rh.norm());
}

TEST_CASE("linearized_subproblem: one-dimensional boundary cases") {
    const double power = 2.0;
    const double cap = 10.0;
    rvec current = rvec::Constant(1, 1.0);
    rvec gpos = rvec::Constant(1, 3.0);
    rvec sol = linearized_subproblem(gpos, current, power, cap);
    CHECK(sol(0) == doctest::Approx(1.0 / power).epsilon(1e-9));
    rvec gneg = rvec::Constant(1, -3.0);
    sol = linearized_subproblem(gneg, current, power, cap);
    CHECK(sol(0) == doctest::Approx(cap).epsilon(1e-12));
    rvec gzero = rvec::Zero(1);
    sol = linearized_subproblem(gzero, current, power, cap);
    CHECK(sol(0) == current(0));
}

TEST_CASE("linearized_subproblem: matches a dense grid search in two dimensions") {
    const double power = 2.0;
    const double cap = 10.0;
    rvec current = rvec::Constant(2, 2.0 / power);
    Philox rng(304, 0);
    for (int trial = 0; trial < 5; ++trial) {
        rvec g(2);
        g(0) = rng.next_uniform(-2.0, 2.0);
        g(1) = rng.next_uniform(-2.0, 2.0);
        if (g.isZero(0.0)) continue;
        rvec sol = linearized_subproblem(g, current, power, cap);
        CHECK(sol.cwiseInverse().sum() <= power + 1e-6);
        CHECK(sol.minCoeff() > 0.0);
        CHECK(sol.maxCoeff() <= cap + 1e-9);
        double best = std::numeric_limits<double>::infinity();
        const int grid = 400;
        for (int i = 1; i <= grid; ++i)
            for (int j = 1; j <= grid; ++j) {
                double p1 = cap * static_cast<double>(i) / grid;
                double p2 = cap * static_cast<double>(j) / grid;
                if (1.0 / p1 + 1.0 / p2 > power) continue;
                best = std::min(best, g(0) * p1 + g(1) * p2);
            }
        double got = g.dot(sol);
        CHECK(got <= best + 1e-3 * (std::abs(best) + 1.0));
    }
}

TEST_CASE("linearized_subproblem: the scaled-identity starting point is always feasible") {
    const double power = 3.0;
    const Eigen::Index n = 4;
    rvec slater = rvec::Constant(n, 2.0 * static_cast<double>(n) / power);
    CHECK(slater.cwiseInverse().sum() <= power + 1e-12);
    Philox rng(305, 0);
    rvec g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = rng.next_normal();
    rvec sol = linearized_subproblem(g, slater, power, 100.0);
    CHECK(sol.cwiseInverse().sum() <= power + 1e-6);
    CHECK(sol.minCoeff() > 0.0);
}
