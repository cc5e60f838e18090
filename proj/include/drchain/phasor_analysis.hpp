#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "drchain/chain_model.hpp"

namespace drchain {

// Complex amplitude; the time signal is Re{value * e^{j omega t}}.
using Phasor = std::complex<double>;

// Steady state with the target mass at rest. x_R covers masses 1..s-1,
// x_V masses s+1..d. f_a is the total link force on the absorber
// (feedback force plus spring/damper coupling to mass p).
struct TargetStageState {
    Phasor f_a;            // [N]
    Eigen::VectorXcd x_R;  // [m]
    Eigen::VectorXcd x_V;  // [m]
    Phasor x_a;            // [m]
    Phasor u;              // [N]
};

// Elastic energy of one link over a steady period: W(t) oscillates at 2w
// around `mean` with phasor magnitude `phasor_mag`; max = mean + phasor_mag.
struct EnergyTriple {
    double mean = 0.0;        // [J]
    double phasor_mag = 0.0;  // [J]
    double max = 0.0;         // [J]
};

enum class Regime { kActive, kPassive };

struct EnergyReport {
    std::vector<EnergyTriple> links;  // link i joins mass i-1 and i; size d+1
    EnergyTriple absorber;
    Regime regime = Regime::kActive;
};

// Feedback actuation power over a steady period: p(t) = mean + (2w)-harmonic
// of amplitude `oscillation`; max = max{|osc+mean|, |osc-mean|}.
struct PowerReport {
    double mean = 0.0;         // [W]
    double oscillation = 0.0;  // [W]
    double max = 0.0;          // [W]
};

// Link force required from the absorber so that mass s stands still under
// the given excitation. Independent of the absorber parameters.
// Throws SingularSubsystemError / ZeroDivisorError.
Phasor required_force(const ChainModel& model, const HarmonicExcitation& excitation);

// Displacements of both subsystems at the target stage: the resonating side
// is driven only by f_a through mass p, the vibrating side only by f_d.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> subsystem_displacements(
    const ChainModel& model, Phasor f_a, const HarmonicExcitation& excitation);

// Peak/mean elastic energies for all d+1 links at the target stage. The
// stopped target acts as a motion-less barrier for links s and s+1.
// Contains no absorber quantity by construction.
EnergyReport link_energy_maxima(const ChainModel& model,
                                const Eigen::VectorXcd& x_R,
                                const Eigen::VectorXcd& x_V);

// Elastic energy in the absorber link at the target stage.
EnergyTriple absorber_energy_max(const ChainModel& model,
                                 const AbsorberModel& absorber, Phasor f_a,
                                 const HarmonicExcitation& excitation);

// Feedback force phasor at the target stage, from the absorber force
// balance. Must coincide with -(g/(m_a w^2)) e^{-j w tau} f_a once the
// feedback is tuned.
Phasor control_phasor(const ChainModel& model, const AbsorberModel& absorber,
                      Phasor f_a, const HarmonicExcitation& excitation);

PowerReport actuation_power(Phasor u, Phasor x_p, Phasor x_a, double omega);

// Convenience: full target-stage state (f_a, displacements, x_a, u).
TargetStageState target_stage_state(const ChainModel& model,
                                    const AbsorberModel& absorber,
                                    const HarmonicExcitation& excitation);

// Target-stage energy report including the absorber link.
EnergyReport target_stage_energy_report(const ChainModel& model,
                                        const AbsorberModel& absorber,
                                        const HarmonicExcitation& excitation);

// Steady state with the feedback off (u = 0): the absorber acts as a passive
// attachment at mass p.
struct PassiveSteadyState {
    Eigen::VectorXcd x;  // masses 1..d  [m]
    Phasor x_a;          // [m]
    EnergyReport energies;
};

PassiveSteadyState passive_steady_state(const ChainModel& model,
                                        const AbsorberModel& absorber,
                                        const HarmonicExcitation& excitation);

}  // namespace drchain
