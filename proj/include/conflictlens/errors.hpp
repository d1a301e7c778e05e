#pragma once

#include <stdexcept>
#include <string>

namespace conflictlens {

// Base class for all library errors. Each failure mode the library can
// signal gets its own type so callers can catch precisely.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CONFLICTLENS_ERROR(Name)                                    \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

// event_model
CONFLICTLENS_ERROR(UnknownLevel);
CONFLICTLENS_ERROR(NonFiniteValue);
CONFLICTLENS_ERROR(NonPositivePET);
CONFLICTLENS_ERROR(InvalidEvent);
CONFLICTLENS_ERROR(EmptyDataset);
CONFLICTLENS_ERROR(DegenerateSplit);
CONFLICTLENS_ERROR(CsvError);
CONFLICTLENS_ERROR(UnlabeledData);

// synth
CONFLICTLENS_ERROR(InvalidConfig);
CONFLICTLENS_ERROR(NoRoot);

// imbalance
CONFLICTLENS_ERROR(SingleClass);
CONFLICTLENS_ERROR(TooFewMinority);

// trees
CONFLICTLENS_ERROR(EmptyNode);

// logit
CONFLICTLENS_ERROR(Separation);
CONFLICTLENS_ERROR(SingularInformation);
CONFLICTLENS_ERROR(DimensionMismatch);

// eval
CONFLICTLENS_ERROR(LengthMismatch);
CONFLICTLENS_ERROR(NoPositives);

// tune
CONFLICTLENS_ERROR(TooFewPerClass);
CONFLICTLENS_ERROR(BudgetTooSmall);

// explain
CONFLICTLENS_ERROR(TooManyFeatures);
CONFLICTLENS_ERROR(EmptyBackground);
CONFLICTLENS_ERROR(MissingCover);

// pipeline
CONFLICTLENS_ERROR(SchemaMismatch);

#undef CONFLICTLENS_ERROR

}  // namespace conflictlens
