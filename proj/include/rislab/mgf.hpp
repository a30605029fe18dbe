#pragma once

#include "rislab/fullstats.hpp"
#include "rislab/spectral.hpp"

#include <limits>

namespace rislab {

struct ldp_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double mgf_delta_y(const Protocol& p, double alpha);
// E(e^{α1 Δy + α2 Δa}) = Tr(e^{−α2 A^f} L^{(α1)}-chain (e^{α2 A^i} ρ^i))
double mgf_pair(const Protocol& p, double alpha1, double alpha2);

// requires primitivity and X ≡ 0 (‖X(s)‖₁ ≤ 1e-8 on a sample grid)
double limiting_mgf_X0(const RISModel& m, const cmat& rho_i, double alpha1, double alpha2);
bool obstruction_vanishes(const RISModel& m, int samples = 21, double tol = 1e-8);

// α ↦ Λ(α) = ∫ log λ^(α)(s) ds with Simpson on fixed s-nodes
class LambdaFunction {
public:
    LambdaFunction() = default;
    LambdaFunction(RISModel m, int quad_nodes);

    double value(double alpha) const;
    double derivative(double alpha) const;
    double log_lambda(double s, double alpha) const;
    // ∂_α log λ^(α)(s) from left/right eigenvectors
    double dlog_lambda(double s, double alpha) const;

    const RISModel& model() const { return m_; }
    const std::vector<double>& nodes() const { return s_; }

private:
    RISModel m_;
    std::vector<double> s_;
};

struct LambdaCurve {
    std::vector<double> alpha, Lambda, Lambda_prime;
    std::vector<std::vector<double>> log_lambda;  // [alpha][s]
    double nu_minus = 0, nu_plus = 0;
    LambdaFunction fn;
};

std::vector<double> default_alpha_grid();  // 101 nodes on [−3, 2]
LambdaCurve lambda_curve(const RISModel& m, const std::vector<double>& alpha_grid, int quad_nodes = 201);

struct LambdaDerivatives {
    double lambda_prime = 0, lambda_doubleprime = 0;  // perturbative
    double fd_prime = 0, fd_doubleprime = 0;          // Richardson finite differences
    double max_solve_residual = 0;
};
LambdaDerivatives lambda_derivatives_at_zero(const RISModel& m, int quad_nodes = 201);

// solution η with Tr η = 0 of (Id − L)η = rhs; rhs must be traceless
cmat traceless_solve(const SuperOperator<double>& L, const cmat& rhs, double* residual = nullptr);

inline constexpr double kInf = std::numeric_limits<double>::infinity();
double legendre_transform(const LambdaCurve& c, double x);

struct GCDefect {
    double lambda_defect = 0;     // max |Λ(α) − Λ(−1−α)|
    double rate_defect = 0;       // max |Λ*(x) − x − Λ*(−x)|
    double rate_defect_mirror = 0;  // max |Λ*(−x) − x − Λ*(x)|
};
std::vector<double> interior_x_grid(const LambdaCurve& c, int n = 41, double frac = 0.9);
GCDefect gc_symmetry_defect(const LambdaCurve& c, const std::vector<double>& x_grid);

struct LLNReport {
    double mean_rate = 0, standard_error = 0, deviation_in_se = 0;
    bool flagged = false;
};
LLNReport lln_check(const std::vector<double>& delta_y, int T, double lambda_prime0);

struct HistogramBin {
    double left, right, density, normal_pdf;
};
struct CLTReport {
    double ks = 0;
    std::vector<double> standardized;
    std::vector<HistogramBin> histogram;
};
double ks_distance_normal(std::vector<double> x, double variance);
CLTReport clt_check(const std::vector<double>& delta_y, int T, double lambda_prime0, double lambda_doubleprime0,
                    int bins = 40);

struct Atom {
    double value, weight;
};
// limiting law of Δs_E when X ≡ 0 and ρ^i = ρ^inv(0)
std::vector<Atom> x0_support_and_weights(const RISModel& m, const cmat& rho_i);

}  // namespace rislab
