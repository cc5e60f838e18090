#include "drchain/chain_model.hpp"

#include <numeric>
#include <sstream>

namespace drchain {

namespace {

void require_positive(const std::vector<double>& values, std::size_t expected,
                      const char* name) {
    if (values.size() != expected) {
        std::ostringstream msg;
        msg << "chain model: " << name << " must have " << expected
            << " entries, got " << values.size();
        throw ValidationError(msg.str());
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) {
            std::ostringstream msg;
            msg << "chain model: " << name << "[" << i + 1
                << "] must be strictly positive, got " << values[i];
            throw ValidationError(msg.str());
        }
    }
}

}  // namespace

void ChainModel::validate() const {
    if (d < 2) {
        throw ValidationError("chain model: at least two masses are required (d >= 2), got d=" +
                              std::to_string(d));
    }
    require_positive(masses, static_cast<std::size_t>(d), "masses");
    require_positive(stiffnesses, static_cast<std::size_t>(d) + 1, "stiffnesses");
    require_positive(dampings, static_cast<std::size_t>(d) + 1, "dampings");
    if (!(1 <= p && p < s && s <= d)) {
        std::ostringstream msg;
        msg << "chain model: non-collocated arrangement requires 1 <= p < s <= d "
               "(absorber upstream of the target, disturbance at mass d); got p="
            << p << ", s=" << s << ", d=" << d;
        throw ValidationError(msg.str());
    }
}

double ChainModel::total_mass() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

void AbsorberModel::validate() const {
    if (!(mass > 0.0) || !(damping > 0.0) || !(stiffness > 0.0)) {
        std::ostringstream msg;
        msg << "absorber model: mass, damping and stiffness must be strictly positive; got m_a="
            << mass << ", c_a=" << damping << ", k_a=" << stiffness;
        throw ValidationError(msg.str());
    }
}

void HarmonicExcitation::validate() const {
    if (amplitude < 0.0) {
        throw ValidationError("excitation: amplitude must be nonnegative, got " +
                              std::to_string(amplitude));
    }
    if (!(omega > 0.0)) {
        throw ValidationError("excitation: omega must be strictly positive, got " +
                              std::to_string(omega));
    }
}

StructuralMatrices assemble_matrices(const ChainModel& model) {
    model.validate();
    const int d = model.d;
    const auto& k = model.stiffnesses;
    const auto& c = model.dampings;

    StructuralMatrices out;
    out.M = Eigen::MatrixXd::Zero(d, d);
    out.K = Eigen::MatrixXd::Zero(d, d);
    out.C = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        out.M(i, i) = model.masses[static_cast<std::size_t>(i)];
        out.K(i, i) = k[static_cast<std::size_t>(i)] + k[static_cast<std::size_t>(i) + 1];
        out.C(i, i) = c[static_cast<std::size_t>(i)] + c[static_cast<std::size_t>(i) + 1];
        if (i + 1 < d) {
            out.K(i, i + 1) = out.K(i + 1, i) = -k[static_cast<std::size_t>(i) + 1];
            out.C(i, i + 1) = out.C(i + 1, i) = -c[static_cast<std::size_t>(i) + 1];
        }
    }
    out.B_d = Eigen::VectorXd::Zero(d);
    out.B_d(d - 1) = 1.0;
    out.B_a = Eigen::VectorXd::Zero(d);
    out.B_a(model.p - 1) = 1.0;
    return out;
}

Eigen::MatrixXcd dynamic_stiffness(const StructuralMatrices& mats, double omega) {
    const std::complex<double> jw(0.0, omega);
    return (-(omega * omega) * mats.M + mats.K).cast<std::complex<double>>() +
           jw * mats.C.cast<std::complex<double>>();
}

PartitionedStiffness partition(const ChainModel& model,
                               const StructuralMatrices& mats, double omega) {
    if (!(omega > 0.0)) {
        throw ValidationError("partition: omega must be strictly positive");
    }
    const int d = model.d;
    const int si = model.s - 1;  // 0-based target index
    PartitionedStiffness out;
    out.full = dynamic_stiffness(mats, omega);
    out.A_R = out.full.topLeftCorner(si, si);
    out.a_R = out.full.col(si).head(si);
    out.a_ss = out.full(si, si);
    out.A_V = out.full.bottomRightCorner(d - model.s, d - model.s);
    out.a_V = out.full.col(si).tail(d - model.s);
    out.D_a = Eigen::VectorXd::Zero(si);
    out.D_a(model.p - 1) = 1.0;
    out.D_d = Eigen::VectorXd::Zero(d - model.s);
    if (model.s < d) out.D_d(d - model.s - 1) = 1.0;
    return out;
}

Eigen::VectorXd resonating_selector(const ChainModel& model, int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(model.s - 1);
    if (i >= 1 && i <= model.s - 1) e(i - 1) = 1.0;
    return e;
}

Eigen::VectorXd vibrating_selector(const ChainModel& model, int j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(model.d - model.s);
    if (j >= model.s + 1 && j <= model.d) e(j - model.s - 1) = 1.0;
    return e;
}

}  // namespace drchain
