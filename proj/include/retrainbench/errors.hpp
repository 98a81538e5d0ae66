#pragma once

#include <stdexcept>
#include <string>

namespace retrainbench {

/// Base class for all engine errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define RETRAINBENCH_DEFINE_ERROR(Name)         \
    struct Name : Error {                       \
        using Error::Error;                     \
    }

// panel
RETRAINBENCH_DEFINE_ERROR(MalformedRow);
RETRAINBENCH_DEFINE_ERROR(MisalignedPanel);
RETRAINBENCH_DEFINE_ERROR(NegativeDemand);
RETRAINBENCH_DEFINE_ERROR(FrequencyMismatch);
RETRAINBENCH_DEFINE_ERROR(EmptyPanel);
RETRAINBENCH_DEFINE_ERROR(InvalidSpec);

// features
RETRAINBENCH_DEFINE_ERROR(WindowTooShort);
RETRAINBENCH_DEFINE_ERROR(SuffixLengthMismatch);

// models
RETRAINBENCH_DEFINE_ERROR(SingularSystem);
RETRAINBENCH_DEFINE_ERROR(DivergedTraining);
RETRAINBENCH_DEFINE_ERROR(HistoryTooShort);
RETRAINBENCH_DEFINE_ERROR(SchemaMismatch);

// backtest
RETRAINBENCH_DEFINE_ERROR(InsufficientHistory);

// metrics
RETRAINBENCH_DEFINE_ERROR(ZeroDenominator);
RETRAINBENCH_DEFINE_ERROR(MissingQuantile);
RETRAINBENCH_DEFINE_ERROR(IncompatibleRuns);

// analysis
RETRAINBENCH_DEFINE_ERROR(IncompleteBlocks);
RETRAINBENCH_DEFINE_ERROR(MissingBaseline);

// cli / reporting
RETRAINBENCH_DEFINE_ERROR(ConfigError);
RETRAINBENCH_DEFINE_ERROR(MissingArtifact);

#undef RETRAINBENCH_DEFINE_ERROR

}  // namespace retrainbench
