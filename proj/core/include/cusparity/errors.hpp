#pragma once

#include <stdexcept>
#include <string>

namespace cusparity {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define CUSPARITY_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                          \
    public:                                                              \
        using Error::Error;                                              \
        const char* kind() const noexcept override { return #Name; }     \
    }

// family
CUSPARITY_DEFINE_ERROR(EvaluationError);
CUSPARITY_DEFINE_ERROR(UnknownFamily);
CUSPARITY_DEFINE_ERROR(ParseError);
// numerics
CUSPARITY_DEFINE_ERROR(SingularMatrix);
CUSPARITY_DEFINE_ERROR(NoConvergence);
CUSPARITY_DEFINE_ERROR(AmbiguousKernel);
CUSPARITY_DEFINE_ERROR(MaxIter);
// continuation
CUSPARITY_DEFINE_ERROR(BranchLost);
CUSPARITY_DEFINE_ERROR(BoundaryExit);
CUSPARITY_DEFINE_ERROR(FoldOnPath);
CUSPARITY_DEFINE_ERROR(StepCollapse);
CUSPARITY_DEFINE_ERROR(SeedDegenerate);
CUSPARITY_DEFINE_ERROR(FrameUnavailable);
// detect
CUSPARITY_DEFINE_ERROR(DegenerateNormalization);
CUSPARITY_DEFINE_ERROR(DegenerateCusp);
CUSPARITY_DEFINE_ERROR(RefinementFailed);
CUSPARITY_DEFINE_ERROR(NotPseudoHyperbolic);
CUSPARITY_DEFINE_ERROR(AtCusp);
// szparity
CUSPARITY_DEFINE_ERROR(SZViolation);
CUSPARITY_DEFINE_ERROR(TransportBroken);
CUSPARITY_DEFINE_ERROR(InconclusiveMembership);
CUSPARITY_DEFINE_ERROR(CrossCheckFailure);
// oracle / report
CUSPARITY_DEFINE_ERROR(NotParameterLinear);
CUSPARITY_DEFINE_ERROR(SchemaMismatch);

#undef CUSPARITY_DEFINE_ERROR

} // namespace cusparity
