#pragma once

#include <stdexcept>
#include <string>

namespace drchain {

// Bad inputs: model invariants, config schema, CLI usage. Exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Failures of the numerics themselves (singular blocks, non-convergent
// root refinement, diverging integration). Exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dynamic-stiffness block is singular at the requested frequency.
struct SingularSubsystemError : NumericalError {
    using NumericalError::NumericalError;
};

// A scalar divisor in a closed-form expression vanished.
struct ZeroDivisorError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace drchain
