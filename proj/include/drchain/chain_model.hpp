#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "drchain/errors.hpp"

namespace drchain {

// Serial chain of d masses, each linked to its neighbours by a spring and a
// damper; masses 1 and d are additionally tied to the base through links 1
// and d+1. A harmonic disturbance acts on mass d, an active absorber sits on
// mass p, and the design goal is to stop mass s.
//
// Indices p and s are 1-based throughout configs, reports and this API,
// matching the usual structural numbering; the shift to 0-based Eigen
// storage happens only inside this module.
struct ChainModel {
    int d = 0;
    std::vector<double> masses;       // m_1..m_d       [kg]
    std::vector<double> stiffnesses;  // k_1..k_{d+1}   [N/m]
    std::vector<double> dampings;     // c_1..c_{d+1}   [N s/m]
    int p = 0;                        // absorber attachment mass (1-based)
    int s = 0;                        // target mass (1-based)

    // Throws ValidationError. Requires d >= 2, strictly positive parameters
    // and the non-collocated arrangement 1 <= p < s <= d.
    void validate() const;

    double total_mass() const;
};

// Active absorber riding on mass p.
struct AbsorberModel {
    double mass = 0.0;       // m_a [kg]
    double damping = 0.0;    // c_a [N s/m]
    double stiffness = 0.0;  // k_a [N/m]

    void validate() const;
};

// f_d(t) = amplitude * cos(omega t), acting on mass d.
struct HarmonicExcitation {
    double amplitude = 0.0;  // [N]
    double omega = 0.0;      // [rad/s]

    void validate() const;
};

// Second-order structural matrices M x'' + C x' + K x = B_d f_d - B_a f_a,
// where f_a is the total force the absorber link exerts on the absorber
// mass (the chain sees its reaction).
struct StructuralMatrices {
    Eigen::MatrixXd M;  // diagonal
    Eigen::MatrixXd C;  // symmetric tridiagonal
    Eigen::MatrixXd K;  // symmetric tridiagonal
    Eigen::VectorXd B_d;  // unit at mass d
    Eigen::VectorXd B_a;  // unit at mass p
};

StructuralMatrices assemble_matrices(const ChainModel& model);

// Dynamic stiffness A(omega) = -M w^2 + j w C + K.
Eigen::MatrixXcd dynamic_stiffness(const StructuralMatrices& mats, double omega);

// Block partition of A(omega) around the target row/column s: the leading
// (s-1)x(s-1) block couples the masses upstream of the target (resonating
// subsystem), the trailing (d-s)x(d-s) block the masses downstream
// (vibrating subsystem). a_R and a_V are the coupling columns into row s.
struct PartitionedStiffness {
    Eigen::MatrixXcd full;   // A(omega), d x d
    Eigen::MatrixXcd A_R;    // (s-1) x (s-1)
    Eigen::MatrixXcd A_V;    // (d-s) x (d-s); empty when s == d
    Eigen::VectorXcd a_R;    // length s-1
    Eigen::VectorXcd a_V;    // length d-s
    std::complex<double> a_ss;
    Eigen::VectorXd D_d;     // selector of mass d inside the vibrating block
    Eigen::VectorXd D_a;     // selector of mass p inside the resonating block
};

PartitionedStiffness partition(const ChainModel& model,
                               const StructuralMatrices& mats, double omega);

// Selector of mass i within the resonating block (masses 1..s-1). The base
// (i = 0) and the stopped target (i = s) map to the zero vector, which is
// how the motion-less barrier enters the link-energy formulas.
Eigen::VectorXd resonating_selector(const ChainModel& model, int i);

// Selector of mass j within the vibrating block (masses s+1..d); zero vector
// for j = s (barrier) and j = d+1 (base).
Eigen::VectorXd vibrating_selector(const ChainModel& model, int j);

}  // namespace drchain
