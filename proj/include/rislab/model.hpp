#pragma once

#include "rislab/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace rislab {

struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scalar schedule s -> R on [0,1].
class ScalarFn {
public:
    enum class Kind { Preset, Constant, Coeff, Table };

    static ScalarFn constant(double c);
    // c0 + c1 s + c2 s^2 + c3 s^3 + Σ a_i tanh(b_i s)
    static ScalarFn coeff(std::array<double, 4> poly, std::vector<double> a, std::vector<double> b);
    // natural cubic spline through (s_i, v_i)
    static ScalarFn table(std::vector<double> s, std::vector<double> v);
    static ScalarFn preset(const std::string& name);

    double operator()(double s) const;

    Kind kind() const { return kind_; }
    const std::string& preset_name() const { return name_; }
    const std::array<double, 4>& poly() const { return poly_; }
    const std::vector<double>& tanh_a() const { return ta_; }
    const std::vector<double>& tanh_b() const { return tb_; }
    const std::vector<double>& nodes() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }

private:
    Kind kind_ = Kind::Constant;
    std::string name_;
    std::array<double, 4> poly_{};
    std::vector<double> ta_, tb_;
    std::vector<double> xs_, ys_, m_;  // m_: spline second derivatives
};

double beta1(double s);
double beta2(double s);

struct Schedule {
    ScalarFn beta = ScalarFn::constant(1.0);
    cmat hE;
    cmat v;                                      // on H_S ⊗ H_E
    ScalarFn v_profile = ScalarFn::constant(1.0);
    std::optional<cmat> Y;                       // empty: Y(s) = beta(s) hE
};

struct RISModel {
    std::string name;
    Eigen::Index dS = 0, dE = 0;
    cmat hS;
    double tau = 1.0;
    double coupling = 1.0;
    Schedule schedule;

    cmat hE(double) const { return schedule.hE; }
    cmat v(double s) const { return coupling * schedule.v_profile(s) * schedule.v; }
    double beta(double s) const { return schedule.beta(s); }
    cmat Y(double s) const { return schedule.Y ? *schedule.Y : cmat(beta(s) * schedule.hE); }
    bool y_is_beta_hE() const { return !schedule.Y.has_value(); }
};

// Presets: "rwa" / "fd", beta "beta1" / "beta2"; λ=2, τ=0.5, E0=0.8, E=0.9, μ1=1.
RISModel preset_model(const std::string& interaction, const std::string& beta);
cmat ladder_lowering();

void validate(const RISModel& m, int samples = 21);

cmat gibbs_state(const cmat& hE, double beta);
cmat joint_unitary(const RISModel& m, double s);
cmat joint_unitary(const RISModel& m, double s, double tau);

// Joint eigenbasis of h_E and Y; columns are the probe basis vectors ψ_i.
struct ProbeBasis {
    cmat W;
    rvec y;     // eigenvalues of Y
    rvec xi;    // Gibbs weights
    rvec energy;
};
ProbeBasis probe_basis(const RISModel& m, double s);

struct KrausTerm {
    int i, j;
    cmat K;
    double yi, yj;
};
std::vector<KrausTerm> kraus_family(const RISModel& m, double s, double alpha, double tau);
inline std::vector<KrausTerm> kraus_family(const RISModel& m, double s, double alpha)
{
    return kraus_family(m, s, alpha, m.tau);
}

SuperOperator<double> reduced_map(const RISModel& m, double s);
SuperOperator<double> deformed_map(const RISModel& m, double s, double alpha);
// tau override, used for the adjoint identity
SuperOperator<double> deformed_map(const RISModel& m, double s, double alpha, double tau);
// bare definition η ↦ Tr_E(e^{αY} U (η⊗ξ) e^{−αY} U†), assembled column by column
SuperOperator<double> deformed_map_direct(const RISModel& m, double s, double alpha);
// exact α-derivative of the deformed map matrix from the Kraus weight law
cmat deformed_map_alpha_derivative(const RISModel& m, double s, double alpha);

cmat obstruction_X(const RISModel& m, double s);
double tri_symmetry_defect(const RISModel& m, const std::vector<double>& alphas,
                           const std::vector<double>& s_nodes);

std::vector<double> linspace(double a, double b, int n);

}  // namespace rislab
