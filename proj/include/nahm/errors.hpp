#pragma once
// Error types. Each carries a stable name used by the CLI and in JSON reports.
#include <stdexcept>
#include <string>

namespace nahm {

class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

#define NAHM_ERROR(Cls)                                                   \
  struct Cls : Error {                                                    \
    explicit Cls(const std::string& what) : Error(#Cls, what) {}          \
  };

NAHM_ERROR(InvalidArgument)
NAHM_ERROR(DegenerateConfiguration)
NAHM_ERROR(LevelNotInSpectrum)
NAHM_ERROR(InvalidConnection)
NAHM_ERROR(ResolutionTooCoarse)
NAHM_ERROR(BoundaryMismatch)
NAHM_ERROR(NotFredholm)
NAHM_ERROR(NoSpectralGap)
NAHM_ERROR(IterationLimit)
NAHM_ERROR(NotAdjacent)
NAHM_ERROR(CrossingAtBoundary)
NAHM_ERROR(WindowTooShort)
NAHM_ERROR(NoDominantMode)
NAHM_ERROR(ModeOverflow)
NAHM_ERROR(WallHit)
NAHM_ERROR(NotInvertible)
NAHM_ERROR(NoConvergence)
NAHM_ERROR(SingularTwist)
NAHM_ERROR(RankJump)
NAHM_ERROR(BranchCut)
NAHM_ERROR(RankZero)
NAHM_ERROR(ClusterAmbiguous)
NAHM_ERROR(FormatError)

#undef NAHM_ERROR

}  // namespace nahm
