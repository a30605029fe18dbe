#pragma once

#include "rislab/model.hpp"
#include "rislab/spectral.hpp"

#include <functional>

namespace rislab {

// Normalised family s ↦ F(s) with peripheral projectors P^m(s) and eigenvalues λ^m(s).
struct AdmissibleFamily {
    Eigen::Index dim = 0;  // superoperator size d²
    std::function<cmat(double)> F;
    std::function<std::vector<cmat>(double)> P;
    std::function<std::vector<cd>(double)> eig;
    double ell = 0;        // sup_s spr(F(s)Q(s)), sampled

    double ell_prime() const { return (ell + 1) / 2; }
};

AdmissibleFamily make_family(Eigen::Index dim, std::function<cmat(double)> F,
                             std::function<std::vector<cmat>(double)> P,
                             std::function<std::vector<cd>(double)> eig, int samples = 51);

// F(s) = L^(α)(s)/λ^(α)(s) for a model; requires constant cycle length on the grid
AdmissibleFamily ris_family(const RISModel& m, double alpha, int samples = 51);

struct IntertwinerPath {
    std::vector<double> grid;
    std::vector<cmat> W, Winv;
    double defect = 0;     // max_s,m ‖W P^m(0) − P^m(s) W‖
    double max_cond = 1;
};

IntertwinerPath intertwiner(const AdmissibleFamily& fam, int n_steps, double h = 1e-5);

struct ProductComparison {
    cmat product, approx;
    double distance = 0;
};

// P^m(k/T)···P^m(0) against W(k/T)P^m(0)W^{-1}(0); k defaults to T
ProductComparison projector_product(const AdmissibleFamily& fam, int m, int T, int k = -1);

// rank-one families: e^{−∫ψ*(φ')} φ(k/T) ψ*(0) from the peripheral decomposition
ProductComparison rank_one_product(const RISModel& model, double alpha, int T, int k = -1);

struct AdiabaticResult {
    cmat exact, approx;
    double residual = 0;  // trace norm of exact − approx
};

AdiabaticResult adiabatic_product(const AdmissibleFamily& fam, int T, const cmat& initial, int k = -1);

// ‖F^Q(k/T)···F^Q(1/T)Q(0)‖ for k = 1..T
std::vector<double> qchain_norms(const AdmissibleFamily& fam, int T);

struct DeformedAdiabaticState {
    cmat approx;
    cmat exact;        // (Π λ^{-1}) L^(α)-chain applied to ρ^i
    double theta = 0;
    double residual = 0;
    int z = 1;
};

DeformedAdiabaticState deformed_adiabatic_state(const RISModel& m, double alpha, int k, int T, const cmat& rho_i);

// ∫_0^{s1} Tr(I^(α) ∂_s ρ^(α)) ds on an n-node Simpson grid
double theta_exponent(const RISModel& m, double alpha, double s1, int nodes, double h = 1e-5);
// m-resolved version: ∫ Tr(I u^{-m} p... ) used to check m-independence
double theta_exponent_m(const RISModel& m, double alpha, int mm, double s1, int nodes, double h = 1e-5);

cmat rho_adiab(const RISModel& m, int k, int T, const cmat& rho_i);

}  // namespace rislab
