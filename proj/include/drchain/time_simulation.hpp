#pragma once

#include <vector>

#include <Eigen/Dense>

#include "drchain/chain_model.hpp"
#include "drchain/dr_tuning.hpp"

namespace drchain {

struct SimulationConfig {
    double t_end = 30.0;        // [s]
    double dt = 0.0;            // [s]; 0 picks min(tau/40, T/200)
    double switch_time = 15.0;  // [s]; feedback is off before this instant
    Eigen::VectorXd initial_state;  // [x; x'; x_a; x_a'], empty = zeros
    HarmonicExcitation excitation;
};

// Fixed-step closed-loop run. Row i holds the state and derived signals at
// time(i); matrices have one column per mass or link.
struct Trajectory {
    double dt = 0.0;
    double omega = 0.0;
    double switch_time = 0.0;
    std::vector<double> time;        // [s]
    Eigen::MatrixXd x;               // steps x d        [m]
    Eigen::MatrixXd v;               // steps x d        [m/s]
    Eigen::VectorXd x_a, v_a;        // [m], [m/s]
    Eigen::VectorXd f_a, u;          // [N]
    Eigen::MatrixXd link_energy;     // steps x (d+1)    [J]
    Eigen::VectorXd absorber_energy; // [J]
    Eigen::VectorXd power;           // [W]
};

// Integrates the reduced retarded model with a classical 4th-order scheme;
// the delayed absorber position is read from the stored history by cubic
// interpolation. Before switch_time the gain is forced to zero, and history
// for t < 0 is the initial state held constant.
Trajectory simulate(const ChainModel& model, const AbsorberModel& absorber,
                    const DrFeedback& feedback, const SimulationConfig& config);

struct SteadyMetrics {
    double amplitude = 0.0;  // (max - min) / 2 over the window
    double mean = 0.0;
    double max = 0.0;
};

// Window statistics of one trajectory column; the window must span at least
// three excitation periods.
SteadyMetrics steady_metrics(const Trajectory& traj, const Eigen::VectorXd& signal,
                             double t0, double t1);

}  // namespace drchain
