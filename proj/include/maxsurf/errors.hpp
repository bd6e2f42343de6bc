#pragma once

#include <stdexcept>
#include <string>

namespace maxsurf {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MAXSURF_DEFINE_ERROR(Name)                          \
  struct Name : Error {                                     \
    explicit Name(const std::string& msg) : Error(msg) {}   \
  }

MAXSURF_DEFINE_ERROR(UnitModulusInput);
MAXSURF_DEFINE_ERROR(PunctureEvaluation);
MAXSURF_DEFINE_ERROR(QuadratureDivergence);
MAXSURF_DEFINE_ERROR(SingularPoint);
MAXSURF_DEFINE_ERROR(PunctureOnPath);
MAXSURF_DEFINE_ERROR(NotAGraph);
MAXSURF_DEFINE_ERROR(NotAConeCircle);
MAXSURF_DEFINE_ERROR(InsufficientRings);
MAXSURF_DEFINE_ERROR(BranchCollision);
MAXSURF_DEFINE_ERROR(StepUnderflow);
MAXSURF_DEFINE_ERROR(OutOfSlab);
MAXSURF_DEFINE_ERROR(TooFewPoints);
MAXSURF_DEFINE_ERROR(GridTooCoarse);
MAXSURF_DEFINE_ERROR(SpacelikeViolation);
MAXSURF_DEFINE_ERROR(OrderingViolation);
MAXSURF_DEFINE_ERROR(LocalSolveDiverged);
MAXSURF_DEFINE_ERROR(NotConverged);
MAXSURF_DEFINE_ERROR(FitDegenerate);
MAXSURF_DEFINE_ERROR(InvalidArgument);
MAXSURF_DEFINE_ERROR(IoError);

#undef MAXSURF_DEFINE_ERROR

}  // namespace maxsurf
