#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace serp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

inline constexpr int kNumJoints = 9;
inline constexpr int kSensorDim = 18;   // 9 motor angles + 9 loads
inline constexpr int kCommandDim = 9;
inline constexpr int kMarkerDim = 27;   // 9 markers x (x, y, z)

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct InvalidDimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RangeError : std::domain_error {
  using std::domain_error::domain_error;
};

struct UnrecoverablePoseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WindowError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HashMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

// FNV-1a, used for config and artifact content hashes.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace serp
