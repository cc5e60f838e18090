#include "oracles.hpp"

namespace drchain::test {

namespace {

using Complex = std::complex<double>;

// Chain rows: A x + B_a f_a = B_d f_d (the link force on the absorber acts
// on the chain with reversed sign, so it appears on the left).
void fill_chain_rows(Eigen::MatrixXcd& S, Eigen::VectorXcd& rhs,
                     const ChainModel& model, const HarmonicExcitation& excitation,
                     int col_xa, int col_fa) {
    (void)col_xa;
    const StructuralMatrices mats = assemble_matrices(model);
    const Eigen::MatrixXcd A = dynamic_stiffness(mats, excitation.omega);
    const int d = model.d;
    S.block(0, 0, d, d) = A;
    S.block(0, col_fa, d, 1) = mats.B_a.cast<Complex>();
    rhs.head(d) = mats.B_d.cast<Complex>() * excitation.amplitude;
}

}  // namespace

FullPhasorSolution closed_loop_oracle(const ChainModel& model,
                                      const AbsorberModel& absorber,
                                      const HarmonicExcitation& excitation,
                                      const DrFeedback& feedback) {
    const int d = model.d;
    const int n = d + 2;
    const int col_xa = d;
    const int col_fa = d + 1;
    const double w = excitation.omega;
    const Complex coupling(absorber.stiffness, w * absorber.damping);
    const Complex shift = std::exp(Complex(0.0, -w * feedback.delay));

    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    fill_chain_rows(S, rhs, model, excitation, col_xa, col_fa);
    // Absorber inertia: m_a w^2 x_a + f_a = 0.
    S(d, col_xa) = absorber.mass * w * w;
    S(d, col_fa) = 1.0;
    // Link-force closure with the feedback law folded in:
    // f_a - g e^{-j w tau} x_a - (k_a + j w c_a)(x_p - x_a) = 0.
    S(d + 1, col_fa) = 1.0;
    S(d + 1, col_xa) = -feedback.gain * shift + coupling;
    S(d + 1, model.p - 1) = -coupling;

    const Eigen::VectorXcd z = S.fullPivLu().solve(rhs);
    FullPhasorSolution sol;
    sol.x = z.head(d);
    sol.x_a = z(col_xa);
    sol.f_a = z(col_fa);
    sol.u = feedback.gain * shift * sol.x_a;
    return sol;
}

FullPhasorSolution pinned_target_oracle(const ChainModel& model,
                                        const AbsorberModel& absorber,
                                        const HarmonicExcitation& excitation) {
    const int d = model.d;
    const int n = d + 2;
    const int col_xa = d;
    const int col_fa = d + 1;
    const double w = excitation.omega;

    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    fill_chain_rows(S, rhs, model, excitation, col_xa, col_fa);
    S(d, col_xa) = absorber.mass * w * w;
    S(d, col_fa) = 1.0;
    S(d + 1, model.s - 1) = 1.0;  // pin the target

    const Eigen::VectorXcd z = S.fullPivLu().solve(rhs);
    FullPhasorSolution sol;
    sol.x = z.head(d);
    sol.x_a = z(col_xa);
    sol.f_a = z(col_fa);
    const Complex coupling(absorber.stiffness, w * absorber.damping);
    sol.u = sol.f_a - coupling * (sol.x(model.p - 1) - sol.x_a);
    return sol;
}

FullPhasorSolution passive_oracle(const ChainModel& model,
                                  const AbsorberModel& absorber,
                                  const HarmonicExcitation& excitation) {
    const int d = model.d;
    const int n = d + 2;
    const int col_xa = d;
    const int col_fa = d + 1;
    const double w = excitation.omega;
    const Complex coupling(absorber.stiffness, w * absorber.damping);

    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    fill_chain_rows(S, rhs, model, excitation, col_xa, col_fa);
    S(d, col_xa) = absorber.mass * w * w;
    S(d, col_fa) = 1.0;
    // u = 0: f_a - (k_a + j w c_a)(x_p - x_a) = 0.
    S(d + 1, col_fa) = 1.0;
    S(d + 1, col_xa) = coupling;
    S(d + 1, model.p - 1) = -coupling;

    const Eigen::VectorXcd z = S.fullPivLu().solve(rhs);
    FullPhasorSolution sol;
    sol.x = z.head(d);
    sol.x_a = z(col_xa);
    sol.f_a = z(col_fa);
    sol.u = 0.0;
    return sol;
}

}  // namespace drchain::test
