#include "drchain/dr_tuning.hpp"

#include <algorithm>
#include <cmath>

namespace drchain {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Delay for turn count k on a given branch; arg(q) is taken in (-pi, pi].
double delay_for(Branch branch, int k, double arg_q, double omega) {
    const double phase = branch == Branch::kPlus ? -arg_q + 2.0 * k * kPi
                                                 : kPi - arg_q + 2.0 * k * kPi;
    return phase / omega;
}

// Smallest k with a nonnegative delay on the branch.
int first_turn(Branch branch, double arg_q) {
    if (branch == Branch::kPlus) return arg_q > 0.0 ? 1 : 0;
    return 0;  // pi - arg_q >= 0 already for arg_q in (-pi, pi]
}

}  // namespace

std::complex<double> compute_q(const ChainModel& model,
                               const AbsorberModel& absorber,
                               const HarmonicExcitation& excitation) {
    absorber.validate();
    excitation.validate();
    const StructuralMatrices mats = assemble_matrices(model);
    const PartitionedStiffness part = partition(model, mats, excitation.omega);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(part.A_R);
    if (lu.rcond() < 1e-12) {
        throw SingularSubsystemError("compute_q: resonating block A_R is singular");
    }
    const Eigen::VectorXcd y = lu.solve(part.D_a.cast<std::complex<double>>());
    const std::complex<double> H = y(model.p - 1);

    const double w = excitation.omega;
    const double ma_w2 = absorber.mass * w * w;
    const std::complex<double> coupling(absorber.stiffness, w * absorber.damping);
    return -ma_w2 * (1.0 - coupling * (1.0 / ma_w2 - H));
}

TuningSet tune(const ChainModel& model, const AbsorberModel& absorber,
               const HarmonicExcitation& excitation, const BranchPolicy& policy) {
    TuningSet set;
    set.q = compute_q(model, absorber, excitation);

    const double w = excitation.omega;
    const double mag = std::abs(set.q);
    if (mag < 1e-12 * absorber.mass * w * w) {
        throw NumericalError("tune: Q(omega) vanishes; no feedback is needed and the "
                             "gain-delay pair is undetermined");
    }
    const double arg_q = std::arg(set.q);

    // Two smallest nonnegative delays per branch.
    for (Branch branch : {Branch::kPlus, Branch::kMinus}) {
        const int k0 = first_turn(branch, arg_q);
        for (int k = k0; k < k0 + 2; ++k) {
            DrFeedback fb;
            fb.branch = branch;
            fb.k = k;
            fb.gain = branch == Branch::kPlus ? mag : -mag;
            fb.delay = delay_for(branch, k, arg_q, w);
            set.candidates.push_back(fb);
        }
    }
    std::sort(set.candidates.begin(), set.candidates.end(),
              [](const DrFeedback& a, const DrFeedback& b) {
                  if (a.delay != b.delay) return a.delay < b.delay;
                  return a.branch == Branch::kPlus && b.branch == Branch::kMinus;
              });

    auto admissible = [&](const DrFeedback& fb) {
        if (policy.branch && fb.branch != *policy.branch) return false;
        if (policy.k && fb.k != *policy.k) return false;
        return fb.delay >= 0.0;
    };
    const auto it = std::find_if(set.candidates.begin(), set.candidates.end(), admissible);
    if (it != set.candidates.end()) {
        set.selected = *it;
    } else if (policy.k) {
        // Forced turn count outside the enumerated window: build it directly.
        DrFeedback fb;
        fb.branch = policy.branch.value_or(Branch::kPlus);
        fb.k = *policy.k;
        fb.gain = fb.branch == Branch::kPlus ? mag : -mag;
        fb.delay = delay_for(fb.branch, fb.k, arg_q, w);
        if (!policy.branch) {
            DrFeedback alt = fb;
            alt.branch = Branch::kMinus;
            alt.gain = -mag;
            alt.delay = delay_for(Branch::kMinus, fb.k, arg_q, w);
            if (alt.delay >= 0.0 && (fb.delay < 0.0 || alt.delay < fb.delay)) fb = alt;
        }
        if (fb.delay < 0.0) {
            throw ValidationError("tune: forced branch/k gives a negative delay");
        }
        set.selected = fb;
    } else {
        throw ValidationError("tune: branch policy admits no realizable delay");
    }
    return set;
}

}  // namespace drchain
