#pragma once

#include <stdexcept>

namespace eigenshift {

// Base for everything thrown by this library. Each failure condition gets
// its own type so callers (and tests) can catch precisely what they expect.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error { using Error::Error; };
struct InvalidSelection : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct DegenerateGap : Error { using Error::Error; };
struct InvalidRadius : Error { using Error::Error; };
struct IncompleteInput : Error { using Error::Error; };
struct NegativeSpike : Error { using Error::Error; };
struct PreconditionFailed : Error { using Error::Error; };
struct SubcriticalSpike : Error { using Error::Error; };
struct SingularInput : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct UnsupportedAllInside : Error { using Error::Error; };
struct NoSeparatingContour : Error { using Error::Error; };
struct NonConvergent : Error { using Error::Error; };
struct ProfileError : Error { using Error::Error; };
struct LayoutError : Error { using Error::Error; };
struct NotPSD : Error { using Error::Error; };
struct EmptyResult : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };

}  // namespace eigenshift
