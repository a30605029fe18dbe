#pragma once

#include "rislab/model.hpp"

#include <cstdint>
#include <iosfwd>

namespace rislab {

struct fullstats_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// grouped spectral data; values ascending, projectors orthogonal
struct SpectralObservable {
    std::vector<double> values;
    std::vector<cmat> projectors;
    cmat matrix() const;
};
SpectralObservable spectral_observable(const cmat& A, double tol = 1e-9);

struct MeasurementSetup {
    cmat rho_i;
    cmat Ai;                     // observable measured first
    std::optional<cmat> Af;      // empty: A^f = −log ρ^f_T
    static MeasurementSetup entropic(const cmat& rho_i);  // A^i = −log ρ^i, A^f = −log ρ^f_T
};

// one probe step: outcome groups of Y_k and grouped forward/backward Kraus lists
struct StepOps {
    double s = 0, beta = 0;
    std::vector<double> y;           // group values of Y_k
    std::vector<double> energy;      // group energies of h_E
    std::vector<double> weight;      // Σ_{i∈I} ξ_i
    std::vector<int> dim;            // group sizes
    std::vector<std::vector<std::vector<cmat>>> fwd;  // fwd[I][J]
    std::vector<std::vector<std::vector<cmat>>> bwd;  // bwd[I][J]: Kraus of the reversed step
};

struct Protocol {
    RISModel model;
    int T = 0;
    cmat rho_i, rho_f;
    SpectralObservable Ai, Af;
    std::vector<StepOps> steps;      // k = 1..T
};

Protocol make_protocol(const MeasurementSetup& setup, const RISModel& m, int T);
StepOps step_ops(const RISModel& m, double s);

struct Trajectory {
    int a_i = 0, a_f = 0;
    std::vector<int> i_vec, j_vec;
    double pF = 0, pB = 0;
    double log_pF = 0, log_pB = 0;
    double delta_a = 0, delta_y = 0, varsigma = 0;
};

double forward_prob(const Protocol& p, const Trajectory& t);
double backward_prob(const Protocol& p, const Trajectory& t);
double log_forward_prob(const Protocol& p, const Trajectory& t);
double log_backward_prob(const Protocol& p, const Trajectory& t);
void fill_observables(const Protocol& p, Trajectory& t);
double entropy_production_rv(const Protocol& p, const Trajectory& t);

// hypotheses of the trajectory balance lemma
bool balance_applicable(const Protocol& p);
// log(Tr(π^i ρ^i) dim π^f / (Tr(π^f ρ^f) dim π^i)) + Σ β_k (E_{j_k} − E_{i_k})
double balance_rhs(const Protocol& p, const Trajectory& t);

struct ScalarBalance {
    std::vector<double> dS, dQ, sigma, beta;
    double sigma_tot = 0;
    double max_identity_defect = 0;  // max_k |ΔS_k + σ_k − β_k ΔQ_k|
};
ScalarBalance scalar_balance(const RISModel& m, int T, const cmat& rho_i);

std::vector<Trajectory> enumerate_measure(const Protocol& p);

struct SampleTable {
    std::vector<Trajectory> rows;
    std::uint64_t seed = 0;
};
SampleTable sample_trajectories(const Protocol& p, int n, std::uint64_t seed, bool with_backward = true);

void write_samples_csv(std::ostream& os, const std::vector<Trajectory>& rows, bool exact);

double renyi_relative_entropy(const cmat& eta, const cmat& zeta, double alpha);
double relative_entropy(const cmat& eta, const cmat& zeta);
double von_neumann_entropy(const cmat& rho);

}  // namespace rislab
