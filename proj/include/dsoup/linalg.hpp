#pragma once

#include <cmath>

#include "dsoup/errors.hpp"

namespace dsoup {

// All data is 2-D by construction; a hand-rolled Vec2/Mat2 keeps every
// floating-point operation explicit and deterministic.

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    bool operator==(const Vec2& o) const = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }
inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double u, double v) { return {u, 0.0, 0.0, v}; }

    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    bool operator==(const Mat2& o) const = default;

    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }

    Mat2 inverse() const {
        const double dt = det();
        if (dt == 0.0 || !std::isfinite(dt)) {
            throw ValidationError("matrix is singular");
        }
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    bool symmetric(double tol = 1e-9) const { return std::abs(b - c) <= tol * (1.0 + std::abs(b) + std::abs(c)); }

    /// Smaller eigenvalue, assuming the matrix is symmetric.
    double min_eigenvalue_sym() const {
        const double m = 0.5 * trace();
        const double h = 0.5 * (a - d);
        const double r = std::sqrt(h * h + b * c);
        return m - r;
    }

    double max_eigenvalue_sym() const {
        const double m = 0.5 * trace();
        const double h = 0.5 * (a - d);
        const double r = std::sqrt(h * h + b * c);
        return m + r;
    }

    /// Lower-triangular Cholesky factor of an SPD matrix.
    Mat2 cholesky_lower() const {
        if (a <= 0.0) throw ValidationError("covariance is not positive definite");
        const double l11 = std::sqrt(a);
        const double l21 = c / l11;
        const double rest = d - l21 * l21;
        if (rest <= 0.0) throw ValidationError("covariance is not positive definite");
        return {l11, 0.0, l21, std::sqrt(rest)};
    }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

/// Kahan compensated accumulator; keeps reductions order-stable to ~1 ulp.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace dsoup
