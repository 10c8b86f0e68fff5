#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mems {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Error hierarchy. Every failure the library reports derives from Error so
// callers can catch one type at the boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define MEMS_DEFINE_ERROR(name) \
  struct name : Error {         \
    using Error::Error;         \
  }

MEMS_DEFINE_ERROR(DomainError);
MEMS_DEFINE_ERROR(SolveError);
MEMS_DEFINE_ERROR(ResolutionError);
MEMS_DEFINE_ERROR(NoArrival);
MEMS_DEFINE_ERROR(EmptyResult);
MEMS_DEFINE_ERROR(MeshGenError);
MEMS_DEFINE_ERROR(DegenerateElement);
MEMS_DEFINE_ERROR(OutsideMesh);
MEMS_DEFINE_ERROR(RankError);
MEMS_DEFINE_ERROR(QuenchReached);
MEMS_DEFINE_ERROR(MeshTangled);
MEMS_DEFINE_ERROR(NewtonDivergence);

#undef MEMS_DEFINE_ERROR

}  // namespace mems
