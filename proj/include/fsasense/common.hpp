#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace fsasense {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a precondition.
struct InvalidInput : Error {
    using Error::Error;
};

/// Frequency does not radiate a main beam (arcsin argument out of [-1, 1]).
struct OutOfScanRange : Error {
    using Error::Error;
};

/// Query outside the span of a frequency-angle map.
struct OutOfFov : Error {
    using Error::Error;
};

/// Malformed file content; message carries the row or field location.
struct ParseError : Error {
    using Error::Error;
};

/// Too few valid samples to compute a statistic.
struct InsufficientData : Error {
    using Error::Error;
};

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle in degrees to (-180, 180].
inline double wrap_deg(double deg) {
    double r = std::remainder(deg, 360.0);
    if (r <= -180.0) r += 360.0;
    return r;
}

/// Wrap an angle in radians to (-pi, pi].
inline double wrap_rad(double rad) {
    double r = std::remainder(rad, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 normalized(const Vec2& v) {
    double n = v.norm();
    if (n == 0.0) throw InvalidInput("cannot normalize zero vector");
    return {v.x / n, v.y / n};
}

} // namespace fsasense
