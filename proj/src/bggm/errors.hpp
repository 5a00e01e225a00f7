#pragma once

#include <stdexcept>

namespace bggm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DimensionTooSmall : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct SingularSample : Error { using Error::Error; };
struct InvalidLambda : Error { using Error::Error; };
struct UnequalSampleSizes : Error { using Error::Error; };
struct EmptyFeasibleGrid : Error { using Error::Error; };

}  // namespace bggm
