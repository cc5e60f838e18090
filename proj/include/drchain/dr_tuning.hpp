#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "drchain/chain_model.hpp"

namespace drchain {

enum class Branch { kPlus, kMinus };

// Position-feedback law u(t) = gain * x_a(t - delay). PLUS carries
// gain = |Q|, MINUS gain = -|Q|; k counts full turns of the delay phase.
struct DrFeedback {
    double gain = 0.0;   // [N/m]
    double delay = 0.0;  // [s], >= 0
    Branch branch = Branch::kPlus;
    int k = 0;
};

struct BranchPolicy {
    std::optional<Branch> branch;  // restrict to one sign branch
    std::optional<int> k;          // force the turn count
};

struct TuningSet {
    std::complex<double> q;             // gain-delay constraint g e^{-j w tau} = q
    std::vector<DrFeedback> candidates;  // ascending delay, both branches
    DrFeedback selected;
};

// Complex constraint value the feedback pair must meet so that the absorber
// supplies exactly the force that stops the target:
//   Q(w) = -m_a w^2 [1 - (j w c_a + k_a)(1/(m_a w^2) - e_rp^T A_R^{-1} D_a)].
std::complex<double> compute_q(const ChainModel& model,
                               const AbsorberModel& absorber,
                               const HarmonicExcitation& excitation);

// Enumerates both sign branches over the turn count and selects the smallest
// nonnegative delay (ties resolve to PLUS). The policy may pin the branch
// and/or k; a pinned combination with a negative delay is rejected.
TuningSet tune(const ChainModel& model, const AbsorberModel& absorber,
               const HarmonicExcitation& excitation,
               const BranchPolicy& policy = {});

}  // namespace drchain
