#include "drchain/phasor_analysis.hpp"

#include <cmath>
#include <string>

namespace drchain {

namespace {

constexpr double kRcondTol = 1e-12;  // block counts as singular below this

// LU solve with a reciprocal-condition gate; the case-study matrices are
// tiny and well conditioned, so tripping this means a genuine resonance.
Eigen::VectorXcd solve_checked(const Eigen::MatrixXcd& A,
                               const Eigen::VectorXcd& rhs, const char* what) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    if (lu.rcond() < kRcondTol) {
        throw SingularSubsystemError(std::string(what) +
                                     " is singular at the excitation frequency");
    }
    return lu.solve(rhs);
}

// Unconjugated dot product (Eigen's dot() conjugates the left factor).
std::complex<double> dotu(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a.transpose() * b)(0, 0);
}

// Receptance of mass p within the resonating block under a unit force at p:
// H = e_rp^T A_R^{-1} D_a.
std::complex<double> attachment_receptance(const ChainModel& model,
                                           const PartitionedStiffness& part) {
    const Eigen::VectorXcd y =
        solve_checked(part.A_R, part.D_a.cast<std::complex<double>>(), "resonating block A_R");
    return y(model.p - 1);
}

EnergyTriple energy_from_displacement_difference(double stiffness, Phasor dx) {
    EnergyTriple e;
    e.mean = 0.25 * stiffness * std::norm(dx);
    e.phasor_mag = 0.25 * stiffness * std::abs(dx * dx);
    e.max = e.mean + e.phasor_mag;
    return e;
}

}  // namespace

Phasor required_force(const ChainModel& model, const HarmonicExcitation& excitation) {
    excitation.validate();
    const StructuralMatrices mats = assemble_matrices(model);
    const PartitionedStiffness part = partition(model, mats, excitation.omega);

    const Eigen::VectorXcd y_R =
        solve_checked(part.A_R, part.D_a.cast<std::complex<double>>(), "resonating block A_R");
    const std::complex<double> den = dotu(part.a_R, y_R);
    const double den_scale = part.a_R.norm() * y_R.norm();
    if (std::abs(den) < 1e-12 * (den_scale + 1.0)) {
        throw ZeroDivisorError(
            "required_force: the resonating-path scalar a_R^T A_R^{-1} D_a vanishes; "
            "no finite absorber force can stop the target at this frequency");
    }
    if (model.s < model.d) {
        const Eigen::VectorXcd y_V =
            solve_checked(part.A_V, part.D_d.cast<std::complex<double>>(), "vibrating block A_V");
        return dotu(part.a_V, y_V) / den * excitation.amplitude;
    }
    // Disturbance acts directly on the target: its force is balanced through
    // the resonating side alone.
    return -excitation.amplitude / den;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> subsystem_displacements(
    const ChainModel& model, Phasor f_a, const HarmonicExcitation& excitation) {
    excitation.validate();
    const StructuralMatrices mats = assemble_matrices(model);
    const PartitionedStiffness part = partition(model, mats, excitation.omega);

    // The chain feels the reaction of the absorber-link force, hence the sign.
    Eigen::VectorXcd x_R =
        -solve_checked(part.A_R, part.D_a.cast<std::complex<double>>(), "resonating block A_R") *
        f_a;
    Eigen::VectorXcd x_V(0);
    if (model.s < model.d) {
        x_V = solve_checked(part.A_V, part.D_d.cast<std::complex<double>>(),
                            "vibrating block A_V") *
              excitation.amplitude;
    }
    return {std::move(x_R), std::move(x_V)};
}

EnergyReport link_energy_maxima(const ChainModel& model,
                                const Eigen::VectorXcd& x_R,
                                const Eigen::VectorXcd& x_V) {
    model.validate();
    const int d = model.d;
    const int s = model.s;
    EnergyReport report;
    report.regime = Regime::kActive;
    report.links.resize(static_cast<std::size_t>(d) + 1);

    // Displacement of mass i as seen from link formulas: base and the stopped
    // target contribute zero motion.
    auto xr = [&](int i) -> Phasor {
        return (i >= 1 && i <= s - 1) ? x_R(i - 1) : Phasor(0.0, 0.0);
    };
    auto xv = [&](int j) -> Phasor {
        return (j >= s + 1 && j <= d) ? x_V(j - s - 1) : Phasor(0.0, 0.0);
    };

    for (int link = 1; link <= d + 1; ++link) {
        const double k = model.stiffnesses[static_cast<std::size_t>(link) - 1];
        const Phasor dx =
            link <= s ? xr(link) - xr(link - 1) : xv(link) - xv(link - 1);
        report.links[static_cast<std::size_t>(link) - 1] =
            energy_from_displacement_difference(k, dx);
    }
    return report;
}

EnergyTriple absorber_energy_max(const ChainModel& model,
                                 const AbsorberModel& absorber, Phasor f_a,
                                 const HarmonicExcitation& excitation) {
    const StructuralMatrices mats = assemble_matrices(model);
    const PartitionedStiffness part = partition(model, mats, excitation.omega);
    const std::complex<double> H = attachment_receptance(model, part);
    const double ma_w2 = absorber.mass * excitation.omega * excitation.omega;
    // x_a - x_p = (H - 1/(m_a w^2)) f_a at the target stage.
    const Phasor dx_ap = (H - 1.0 / ma_w2) * f_a;
    return energy_from_displacement_difference(absorber.stiffness, dx_ap);
}

Phasor control_phasor(const ChainModel& model, const AbsorberModel& absorber,
                      Phasor f_a, const HarmonicExcitation& excitation) {
    const StructuralMatrices mats = assemble_matrices(model);
    const PartitionedStiffness part = partition(model, mats, excitation.omega);
    const std::complex<double> H = attachment_receptance(model, part);
    const double w = excitation.omega;
    const double ma_w2 = absorber.mass * w * w;
    const std::complex<double> coupling(absorber.stiffness, w * absorber.damping);
    return (1.0 - coupling * (1.0 / ma_w2 - H)) * f_a;
}

PowerReport actuation_power(Phasor u, Phasor x_p, Phasor x_a, double omega) {
    const std::complex<double> jw(0.0, omega);
    PowerReport report;
    report.mean = 0.5 * std::real(jw * std::conj(u) * (x_p - x_a));
    report.oscillation = 0.5 * omega * std::abs(u * (x_p - x_a));
    report.max = std::max(std::abs(report.oscillation + report.mean),
                          std::abs(report.oscillation - report.mean));
    return report;
}

TargetStageState target_stage_state(const ChainModel& model,
                                    const AbsorberModel& absorber,
                                    const HarmonicExcitation& excitation) {
    absorber.validate();
    TargetStageState state;
    state.f_a = required_force(model, excitation);
    auto [x_R, x_V] = subsystem_displacements(model, state.f_a, excitation);
    state.x_R = std::move(x_R);
    state.x_V = std::move(x_V);
    state.x_a = -state.f_a / (absorber.mass * excitation.omega * excitation.omega);
    state.u = control_phasor(model, absorber, state.f_a, excitation);
    return state;
}

EnergyReport target_stage_energy_report(const ChainModel& model,
                                        const AbsorberModel& absorber,
                                        const HarmonicExcitation& excitation) {
    const TargetStageState state = target_stage_state(model, absorber, excitation);
    EnergyReport report = link_energy_maxima(model, state.x_R, state.x_V);
    report.absorber = absorber_energy_max(model, absorber, state.f_a, excitation);
    return report;
}

PassiveSteadyState passive_steady_state(const ChainModel& model,
                                        const AbsorberModel& absorber,
                                        const HarmonicExcitation& excitation) {
    model.validate();
    absorber.validate();
    excitation.validate();
    const double w = excitation.omega;
    const double ma_w2 = absorber.mass * w * w;
    const std::complex<double> coupling(absorber.stiffness, w * absorber.damping);
    const std::complex<double> den = coupling - ma_w2;

    const StructuralMatrices mats = assemble_matrices(model);
    Eigen::MatrixXcd P = dynamic_stiffness(mats, w);
    // Passive absorber condensed onto mass p. At low frequency the factor
    // tends to m_a w^2: the absorber simply rides along as extra inertia.
    const std::complex<double> factor = ma_w2 * coupling / den;
    P -= factor * (mats.B_a * mats.B_a.transpose()).cast<std::complex<double>>();

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(P);
    if (lu.rcond() < kRcondTol) {
        throw SingularSubsystemError(
            "passive steady state: P(omega) is singular (passive resonance at the "
            "excitation frequency)");
    }
    PassiveSteadyState out;
    out.x = lu.solve(mats.B_d.cast<std::complex<double>>() * excitation.amplitude);
    const Phasor x_p = out.x(model.p - 1);
    out.x_a = coupling / den * x_p;

    out.energies.regime = Regime::kPassive;
    out.energies.links.resize(static_cast<std::size_t>(model.d) + 1);
    auto x_of = [&](int i) -> Phasor {
        return (i >= 1 && i <= model.d) ? out.x(i - 1) : Phasor(0.0, 0.0);
    };
    for (int link = 1; link <= model.d + 1; ++link) {
        const double k = model.stiffnesses[static_cast<std::size_t>(link) - 1];
        out.energies.links[static_cast<std::size_t>(link) - 1] =
            energy_from_displacement_difference(k, x_of(link) - x_of(link - 1));
    }
    out.energies.absorber =
        energy_from_displacement_difference(absorber.stiffness, out.x_a - x_p);
    return out;
}

}  // namespace drchain
