#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "isac/isac.hpp"

namespace py = pybind11;
using namespace isac;

PYBIND11_MODULE(_isac_precode, m) {
    m.doc() = "precoder optimization for sensing with random signals";
    m.attr("__version__") = "0.1.0";

    py::class_<SensingScene>(m, "SensingScene")
        .def(py::init<cmat, double, int, int, double>(), py::arg("rh"),
             py::arg("sigma_s2"), py::arg("n_r"), py::arg("frame_len"),
             py::arg("power"))
        .def_readonly("rh", &SensingScene::rh)
        .def_readonly("sigma_s2", &SensingScene::sigma_s2)
        .def_readonly("n_r", &SensingScene::n_r)
        .def_readonly("frame_len", &SensingScene::frame_len)
        .def_readonly("power", &SensingScene::power)
        .def_property_readonly(
            "n_t", [](const SensingScene& s) { return s.n_t(); });

    py::class_<CommScene>(m, "CommScene")
        .def(py::init<cmat, double, double, double>(), py::arg("hc"),
             py::arg("sigma_c2"), py::arg("rate_min"),
             py::arg("power_budget"))
        .def_readonly("hc", &CommScene::hc)
        .def_readonly("sigma_c2", &CommScene::sigma_c2)
        .def_readonly("rate_min", &CommScene::rate_min);

    py::class_<SignalBatch>(m, "SignalBatch")
        .def_static("generate", &SignalBatch::generate, py::arg("seed"),
                    py::arg("n"), py::arg("n_t"), py::arg("frame_len"))
        .def_readonly("seed", &SignalBatch::seed)
        .def_readonly("realizations", &SignalBatch::realizations);

    py::class_<StepSchedule>(m, "StepSchedule")
        .def(py::init<double, double>(), py::arg("a") = 10.0,
             py::arg("b") = 10.0)
        .def_readwrite("a", &StepSchedule::a)
        .def_readwrite("b", &StepSchedule::b)
        .def("at", &StepSchedule::at);

    py::class_<StopRule>(m, "StopRule")
        .def(py::init<double, int>(), py::arg("eps") = 1e-5,
             py::arg("r_max") = 1000)
        .def_readwrite("eps", &StopRule::eps)
        .def_readwrite("r_max", &StopRule::r_max);

    py::class_<MomentParams>(m, "MomentParams")
        .def(py::init<double, double, double>(), py::arg("beta1") = 0.6,
             py::arg("beta2") = 0.999, py::arg("eps0") = 1e-8)
        .def_readwrite("beta1", &MomentParams::beta1)
        .def_readwrite("beta2", &MomentParams::beta2)
        .def_readwrite("eps0", &MomentParams::eps0);

    py::class_<OptResult>(m, "OptResult")
        .def_readonly("w", &OptResult::w)
        .def_readonly("trace", &OptResult::trace)
        .def_readonly("iterations", &OptResult::iterations)
        .def_readonly("max_iterate_sq_norm", &OptResult::max_iterate_sq_norm);

    py::class_<Kappas>(m, "Kappas")
        .def_readonly("k1", &Kappas::k1)
        .def_readonly("k2", &Kappas::k2)
        .def_readonly("k3", &Kappas::k3);

    py::class_<ScaStop>(m, "ScaStop")
        .def(py::init<double, int>(), py::arg("tau") = -1e-5,
             py::arg("j_max") = 30)
        .def_readwrite("tau", &ScaStop::tau)
        .def_readwrite("j_max", &ScaStop::j_max);

    py::class_<PowerAllocation>(m, "PowerAllocation")
        .def_readonly("p", &PowerAllocation::p)
        .def_readonly("kappa", &PowerAllocation::kappa)
        .def_readonly("trace", &PowerAllocation::trace)
        .def_readonly("omega", &PowerAllocation::omega);

    py::class_<PenaltyConfig>(m, "PenaltyConfig")
        .def(py::init<>())
        .def_readwrite("rho0", &PenaltyConfig::rho0)
        .def_readwrite("growth", &PenaltyConfig::growth)
        .def_readwrite("xi0", &PenaltyConfig::xi0)
        .def_readwrite("tau0", &PenaltyConfig::tau0)
        .def_readwrite("t_max", &PenaltyConfig::t_max)
        .def_readwrite("feas_tol", &PenaltyConfig::feas_tol)
        .def_readwrite("pg_tol", &PenaltyConfig::pg_tol)
        .def_readwrite("inner_steps", &PenaltyConfig::inner_steps);

    py::class_<IsacTraceRow>(m, "IsacTraceRow")
        .def_readonly("objective", &IsacTraceRow::objective)
        .def_readonly("residual", &IsacTraceRow::residual)
        .def_readonly("rate", &IsacTraceRow::rate);

    py::class_<IsacSolution>(m, "IsacSolution")
        .def_readonly("w", &IsacSolution::w)
        .def_readonly("omega", &IsacSolution::omega)
        .def_readonly("achieved_rate", &IsacSolution::achieved_rate)
        .def_readonly("elmmse", &IsacSolution::elmmse)
        .def_readonly("trace", &IsacSolution::trace);

    py::class_<RateGap>(m, "RateGap")
        .def_readonly("avg_rate", &RateGap::avg_rate)
        .def_readonly("capacity", &RateGap::capacity);

    m.def(
        "sample_cscg",
        [](Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
            Philox rng(seed);
            return sample_cscg(rows, cols, rng);
        },
        py::arg("rows"), py::arg("cols"), py::arg("seed"));
    m.def(
        "gen_rh",
        [](Eigen::Index n_t, double eig_low, double eig_high,
           std::uint64_t seed) {
            Philox rng(seed);
            return gen_rh(n_t, eig_low, eig_high, rng);
        },
        py::arg("n_t"), py::arg("eig_low"), py::arg("eig_high"),
        py::arg("seed"));

    m.def("lmmse_estimate", &lmmse_estimate, py::arg("ys"), py::arg("x"),
          py::arg("scene"));
    m.def("lmmse_cost", &lmmse_cost, py::arg("w"), py::arg("scene"));
    m.def("lmmse_cost_given_s", &lmmse_cost_given_s, py::arg("w"),
          py::arg("s"), py::arg("scene"));
    m.def("elmmse_mc", &elmmse_mc, py::arg("w"), py::arg("scene"),
          py::arg("batch"));
    m.def("achievable_rate", &achievable_rate, py::arg("w"), py::arg("comm"));
    m.def("rate_from_cov", &rate_from_cov, py::arg("omega"), py::arg("comm"));
    m.def(
        "capacity_waterfill",
        [](const cmat& hc, double sigma_c2, double power) {
            const CapacityPoint c = capacity_waterfill(hc, sigma_c2, power);
            return py::make_tuple(c.w, c.rate);
        },
        py::arg("hc"), py::arg("sigma_c2"), py::arg("power"));

    m.def("waterfill_lmmse", &waterfill_lmmse, py::arg("scene"));
    m.def("ddp_solve", &ddp_solve, py::arg("s_n"), py::arg("scene"));
    m.def("grad_f", &grad_f, py::arg("w"), py::arg("s"), py::arg("scene"));
    m.def("sgp", &sgp, py::arg("scene"), py::arg("batch_size"),
          py::arg("schedule"), py::arg("init"), py::arg("seed"),
          py::arg("stop"), py::arg("validation"));
    m.def("mb_sgp", &mb_sgp, py::arg("scene"), py::arg("batch_size"),
          py::arg("schedule"), py::arg("betas"), py::arg("init"),
          py::arg("seed"), py::arg("stop"), py::arg("validation"));

    m.def(
        "hsnr_kappas",
        [](const SensingScene& scene) {
            const Kappas k = hsnr_kappas(scene);
            return py::make_tuple(k.k1, k.k2, k.k3);
        },
        py::arg("scene"));
    m.def("hsnr_cost", &hsnr_cost, py::arg("omega"), py::arg("scene"));
    m.def("hsnr_grad", &hsnr_grad, py::arg("omega"), py::arg("scene"));
    m.def("linearized_subproblem", &linearized_subproblem, py::arg("grad"),
          py::arg("p_current"), py::arg("power"), py::arg("p_cap"));
    m.def("hsnr_sca", &hsnr_sca, py::arg("scene"),
          py::arg("stop") = ScaStop{});

    m.def("rate_projection", &rate_projection, py::arg("target"),
          py::arg("comm"), py::arg("power"));
    m.def("ddp_isac", &ddp_isac, py::arg("s_n"), py::arg("scene"),
          py::arg("comm"), py::arg("cfg") = PenaltyConfig{},
          py::arg("step") = StepSchedule{});
    m.def("dip_isac_sgp_ao", &dip_isac_sgp_ao, py::arg("scene"),
          py::arg("comm"), py::arg("cfg"), py::arg("step"),
          py::arg("batch_size"), py::arg("seed"), py::arg("validation"));
    m.def("hsnr_isac_sca", &hsnr_isac_sca, py::arg("scene"), py::arg("comm"),
          py::arg("stop") = ScaStop{});
    m.def("detopt_baseline", &detopt_baseline, py::arg("scene"),
          py::arg("comm"));
    m.def("prop2_gap", &prop2_gap, py::arg("solutions"), py::arg("comm"),
          py::arg("power"));
}
