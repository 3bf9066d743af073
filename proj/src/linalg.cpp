#include "isac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isac {

namespace {

void require_finite(const cmat& a, const char* who) {
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

}  // namespace

HermitianEig eig_hermitian(const cmat& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("eig_hermitian: matrix not square");
    require_finite(a, "eig_hermitian");
    cmat sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<cmat> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: decomposition failed");
    return {es.eigenvectors(), es.eigenvalues()};
}

Svd svd(const cmat& a) {
    require_finite(a, "svd");
    Eigen::JacobiSVD<cmat> sv(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {sv.matrixU(), sv.singularValues(), sv.matrixV()};
}

cmat sample_cscg(Eigen::Index rows, Eigen::Index cols, Philox& rng) {
    cmat out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            out(i, j) = rng.next_cnormal();
    return out;
}

cmat flip_permutation(Eigen::Index k) {
    if (k < 1) throw std::invalid_argument("flip_permutation: k must be >= 1");
    cmat p = cmat::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) p(i, k - 1 - i) = 1.0;
    return p;
}

cmat hpd_inverse(const cmat& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("hpd_inverse: matrix not square");
    require_finite(a, "hpd_inverse");
    Eigen::LLT<cmat> llt(a);
    if (llt.info() == Eigen::Success)
        return llt.solve(cmat::Identity(a.rows(), a.cols()));
    double jitter = 1e-12 * a.real().trace() / static_cast<double>(a.rows());
    cmat nudged = a + jitter * cmat::Identity(a.rows(), a.cols());
    Eigen::LLT<cmat> retry(nudged);
    if (retry.info() != Eigen::Success)
        throw std::runtime_error("hpd_inverse: matrix not positive definite");
    return retry.solve(cmat::Identity(a.rows(), a.cols()));
}

cmat psd_clip(const cmat& a) {
    HermitianEig eig = eig_hermitian(a);
    rvec clipped = eig.values.cwiseMax(0.0);
    return eig.basis * clipped.asDiagonal() * eig.basis.adjoint();
}

cmat project_trace_ball(const cmat& a, double budget) {
    if (budget <= 0.0)
        throw std::invalid_argument("project_trace_ball: budget must be positive");
    HermitianEig eig = eig_hermitian(a);
    rvec d = eig.values;
    double clipped_trace = d.cwiseMax(0.0).sum();
    rvec x;
    if (clipped_trace <= budget) {
        x = d.cwiseMax(0.0);
    } else {
        // Largest shift theta with sum (d_i - theta)^+ = budget; with the
        // eigenvalues sorted descending the active set is a prefix.
        std::vector<double> desc(d.data(), d.data() + d.size());
        std::sort(desc.begin(), desc.end(), std::greater<double>());
        double cum = 0.0;
        double theta = 0.0;
        for (std::size_t k = 0; k < desc.size(); ++k) {
            cum += desc[k];
            double cand = (cum - budget) / static_cast<double>(k + 1);
            if (k + 1 == desc.size() || desc[k + 1] <= cand) {
                theta = cand;
                break;
            }
        }
        x = (d.array() - theta).max(0.0).matrix();
    }
    return eig.basis * x.asDiagonal() * eig.basis.adjoint();
}

cmat project_power(const cmat& w, double budget) {
    double sq = w.squaredNorm();
    if (sq <= budget) return w;
    return w * std::sqrt(budget / sq);
}

double pairwise_sum(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    std::vector<double> acc(xs);
    std::size_t n = acc.size();
    while (n > 1) {
        std::size_t half = n / 2;
        for (std::size_t i = 0; i < half; ++i)
            acc[i] = acc[2 * i] + acc[2 * i + 1];
        if (n % 2 == 1) {
            acc[half] = acc[n - 1];
            n = half + 1;
        } else {
            n = half;
        }
    }
    return acc[0];
}

MeanSe mean_se(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_se: empty sample");
    double n = static_cast<double>(xs.size());
    double mean = pairwise_sum(xs) / n;
    if (xs.size() == 1) return {mean, 0.0};
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        sq[i] = (xs[i] - mean) * (xs[i] - mean);
    double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace isac
