#pragma once

#include "rislab/linalg.hpp"

#include <string>

namespace rislab {

struct RISModel;

struct spectral_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IrreducibilityResult {
    bool irreducible = false;
    cmat witness;          // orthonormal basis of a proper invariant subspace (empty if irreducible)
    Eigen::Index algebra_dim = 0;
};

// Kraus-word reachability: irreducible iff the unital algebra generated by the Kraus
// operators is all of M_d (Burnside); the witness is the orbit of an eigenvector of a
// generic algebra element that fails to span.
IrreducibilityResult is_irreducible(const SuperOperator<double>& phi);

// simple peripheral eigenvalue at 1 with a faithful eigenvector
bool spectral_irreducibility(const SuperOperator<double>& phi);

cmat invariant_state(const SuperOperator<double>& phi);

struct PeripheralDecomposition {
    double lambda = 0;
    int z = 1;
    cmat u;
    std::vector<cmat> p;
    cmat rho;
    cmat I;
    double residual = 0;   // max over m of the spectral-projector mismatch
};

int cycle_length(const SuperOperator<double>& phi0);
PeripheralDecomposition peripheral_decomposition(const SuperOperator<double>& phi_alpha,
                                                 const SuperOperator<double>& phi0);
bool primitivity_check(const SuperOperator<double>& phi);

// η ↦ Tr(I u^{-m} η) ρ u^m as a d²×d² matrix
cmat peripheral_projector(const PeripheralDecomposition& dec, int m);

SuperOperator<double> conditioned_map(const SuperOperator<double>& phi_alpha, const PeripheralDecomposition& dec);
// T^{(α)} applied to an irreducible Kraus family with weights v_i (α-independent)
std::vector<cmat> deform_kraus(const std::vector<cmat>& V, const std::vector<double>& v, double alpha);

struct GrowthRates {
    double nu_minus = 0, nu_plus = 0;
};
GrowthRates growth_rates(const RISModel& m, double s);
GrowthRates growth_rates(const RISModel& m, const std::vector<double>& s_nodes);

double simpson(const std::vector<double>& f, double h);

}  // namespace rislab
