#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "drchain/chain_model.hpp"
#include "drchain/dr_tuning.hpp"

namespace drchain {

// Closed-loop descriptor delay model
//   E x~'(t) = A0 x~(t) + A1 x~(t - tau) + B f_d(t)
// over the extended state x~ = [x; x'; x_a; x_a'; f_a; u] (dimension 2d+4).
// The last two rows are algebraic: the link-force balance and the feedback
// law; A1 carries the single delayed entry g.
struct DdaeSystem {
    Eigen::MatrixXd E;
    Eigen::MatrixXd A0;
    Eigen::MatrixXd A1;
    Eigen::VectorXd B;
    double tau = 0.0;
    int d = 0;  // chain length; dim() == 2d+4
    int dim() const { return 2 * d + 4; }
};

DdaeSystem build_ddae(const ChainModel& model, const AbsorberModel& absorber,
                      const DrFeedback& feedback);

// Explicit retarded form z'(t) = A0 z(t) + A1 z(t - tau) + B f_d(t) over
// z = [x; x'; x_a; x_a'] obtained by eliminating the two algebraic rows.
// Its eigenvalues coincide with the finite roots of the descriptor pencil.
struct RetardedSystem {
    Eigen::MatrixXd A0;
    Eigen::MatrixXd A1;
    Eigen::VectorXd B;
    double tau = 0.0;
};

RetardedSystem reduce_to_retarded(const DdaeSystem& sys);

// Scale-robust characteristic residual of the original descriptor pencil:
// sigma_min / sigma_max of (E lambda - A0 - A1 e^{-lambda tau}).
double char_residual(const DdaeSystem& sys, std::complex<double> lambda);

struct SpectrumOptions {
    double rhp_bound = -1.2;     // report roots with Re >= this [1/s]
    int grid_size = 30;          // Chebyshev collocation points on [-tau, 0]
    double newton_tol = 1e-10;
    int newton_max_iter = 20;
    bool adaptive = true;        // double grid_size until abscissa moves < 1e-6
    double residual_tol = 1e-8;  // gate against the original descriptor pencil
};

struct Spectrum {
    std::vector<std::complex<double>> roots;  // sorted by descending Re, ascending Im
    std::vector<double> residuals;            // aligned with roots
    double abscissa = 0.0;                    // max Re over reported roots [1/s]
    int grid_size_used = 0;
    int dropped = 0;  // candidates that failed refinement or the residual gate
};

// Characteristic roots right of rhp_bound: Chebyshev collocation of the
// solution-operator generator seeds a dense eigenproblem, candidates are
// Newton-refined on the analytic characteristic function of the reduced
// system, and every reported root must pass the residual gate on the
// original descriptor pencil. Delay-free cases (tau = 0 or g = 0) are a
// plain eigensolve.
Spectrum compute_spectrum(const DdaeSystem& sys, const SpectrumOptions& options = {});

double spectral_abscissa(const DdaeSystem& sys, const SpectrumOptions& options = {});

}  // namespace drchain
