#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drchain/chain_model.hpp"
#include "drchain/ddae_stability.hpp"
#include "drchain/dr_tuning.hpp"

namespace drchain {

// One free structural parameter. Ids: "m_a", "c_a", "k_a" for the absorber;
// "m<i>" (1..d), "c<i>"/"k<i>" (1..d+1) for the chain. `step` is only used
// by the grid mode.
struct ParameterBound {
    std::string id;
    double lower = 0.0;
    double upper = 0.0;
    double step = 0.0;
};

// sum_i coefficients[id_i] * theta_i <= bound, on top of the box bounds.
struct LinearConstraintSpec {
    std::map<std::string, double> coefficients;
    double bound = 0.0;
};

// Minimize gamma * max_i W_i,max / w_nom + (1-gamma) * P_max / p_nom over
// the free parameters, subject to box bounds, extra linear constraints, a
// spectral-abscissa margin and an absorber-link energy cap. The feedback
// pair is retuned at every evaluated point, so it never appears as a
// decision variable.
struct DesignProblem {
    ChainModel chain;
    AbsorberModel absorber;
    HarmonicExcitation excitation;
    std::vector<ParameterBound> parameters;
    double gamma = 0.5;
    double w_nom = 0.0;  // [J]; 0 = evaluate at the nominal point
    double p_nom = 0.0;  // [W]; 0 = evaluate at the nominal point
    double xi_alpha = -0.2;  // [1/s], < 0
    double xi_a = 0.01;      // [J], > 0
    std::vector<LinearConstraintSpec> linear_constraints;
    SpectrumOptions spectrum_options;  // full-fidelity options for reporting

    void validate() const;
};

// Problem with w_nom/p_nom resolved at the nominal parameter point.
DesignProblem resolve_normalization(const DesignProblem& problem);

// Current values of the free parameters (the nominal theta).
Eigen::VectorXd nominal_theta(const DesignProblem& problem);

// Model copies with theta applied.
void apply_theta(const DesignProblem& problem, const Eigen::VectorXd& theta,
                 ChainModel& chain, AbsorberModel& absorber);

struct ObjectiveValue {
    double j = 0.0;
    double w_max = 0.0;  // max over links [J]
    double p_max = 0.0;  // [W]
    bool tunable = false;
};

// Tunes the feedback at theta and evaluates the balanced objective. An
// untunable point reports tunable=false with an infinite objective.
ObjectiveValue objective(const DesignProblem& problem, const Eigen::VectorXd& theta);

struct ConstraintValues {
    Eigen::VectorXd linear;     // residuals: [theta-ub; lb-theta; extra], <= 0 feasible
    double alpha = 0.0;         // [1/s]
    double wa_max = 0.0;        // [J]
    double alpha_slack = 0.0;   // alpha - xi_alpha
    double wa_slack = 0.0;      // wa_max - xi_a
};

ConstraintValues constraints(const DesignProblem& problem, const Eigen::VectorXd& theta);

struct SolverOptions {
    int max_iter = 120;
    double mu0 = 5.5;        // initial objective weight in the exact penalty
    double opt_tol = 1e-8;
    double step_tol = 1e-12;
    double feas_tol = 1e-8;
    double fd_step = 1e-8;   // forward-difference spacing scale
    int threads = 0;         // 0 = hardware concurrency
    // Cheaper spectrum settings for the inner iterations; winners are
    // re-evaluated with the problem's full-fidelity options.
    SpectrumOptions inner_spectrum{-1.2, 20, 1e-10, 20, /*adaptive=*/false, 1e-8};
    // When non-empty these replace the seeded random starting points.
    std::vector<Eigen::VectorXd> explicit_starts;
};

struct StartLog {
    int start = 0;
    int iterations = 0;
    double objective = 0.0;
    double violation = 0.0;
    bool feasible = false;
    bool tunable = true;
    Eigen::VectorXd theta;
};

struct DesignResult {
    bool feasible = false;
    Eigen::VectorXd theta;
    double objective = 0.0;
    double w_max = 0.0;
    double p_max = 0.0;
    DrFeedback feedback;
    double alpha = 0.0;
    double wa_max = 0.0;
    Eigen::VectorXd linear_residuals;
    double alpha_slack = 0.0;
    double wa_slack = 0.0;
    int start_index = -1;
    std::vector<StartLog> starts;
};

// Multi-start local descent on the exact penalty mu*J + violation with BFGS
// curvature, projected box steps and a steering rule that shrinks mu while
// iterates stay infeasible. Starting points are seeded uniformly inside the
// bounds; identical seeds give identical results.
DesignResult solve(const DesignProblem& problem, int starts, std::uint64_t seed,
                   const SolverOptions& options = {});

struct GridPoint {
    Eigen::VectorXd theta;
    double objective = 0.0;
    double w_max = 0.0;
    double p_max = 0.0;
    double alpha = 0.0;
    double wa_max = 0.0;
    bool feasible = false;
};

struct GridResult {
    DesignResult best;
    std::vector<GridPoint> map;  // full value map in grid enumeration order
};

// Exhaustive evaluation on the Cartesian grid lower + i*step (at most three
// free parameters). Returns the feasible minimizer plus the full map.
GridResult grid_search(const DesignProblem& problem, const SolverOptions& options = {});

}  // namespace drchain
