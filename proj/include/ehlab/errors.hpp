#pragma once

#include <stdexcept>
#include <string>

namespace ehlab {

// Two failure families, mirrored by the CLI exit codes:
// validation errors (bad inputs, broken preconditions) -> exit 2,
// numerical errors (a computation could not be completed) -> exit 3.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfOverlap final : ValidationError {
    using ValidationError::ValidationError;
};
struct MissingTransition final : ValidationError {
    using ValidationError::ValidationError;
};
struct OutOfDomain final : ValidationError {
    using ValidationError::ValidationError;
};
struct StartMismatch final : ValidationError {
    using ValidationError::ValidationError;
};
struct NoChartContains final : ValidationError {
    using ValidationError::ValidationError;
};
struct WeightSumViolation final : ValidationError {
    using ValidationError::ValidationError;
};
struct UndefinedSummand final : ValidationError {
    using ValidationError::ValidationError;
};
struct ConfigError final : ValidationError {
    using ValidationError::ValidationError;
};

struct IncompleteLift final : NumericalError {
    using NumericalError::NumericalError;
};
struct SamplerBudgetExceeded final : NumericalError {
    using NumericalError::NumericalError;
};
struct PartitionGap final : NumericalError {
    using NumericalError::NumericalError;
};
struct AgreementViolation final : NumericalError {
    using NumericalError::NumericalError;
};
struct SeparationViolation final : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateMetric final : NumericalError {
    using NumericalError::NumericalError;
};
struct NonConvergent final : NumericalError {
    using NumericalError::NumericalError;
};
struct EmbeddingFailure final : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace ehlab
