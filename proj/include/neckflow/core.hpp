// core.hpp
//
// Small shared pieces: 2D points/vectors/tensors, second-order Taylor jets
// for exact derivative evaluation of closed-form fields, C^3 smoothstep
// blending, and a tiny rational type for exponents.

#ifndef NECKFLOW_CORE_HPP
#define NECKFLOW_CORE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace neckflow {

constexpr double kPi = 3.14159265358979323846264338327950288;

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    // z-component of the 2D cross product
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

using Point2 = Vec2;

// 2x2 tensor, row-major: t[r][c].
struct Tensor2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Tensor2() = default;
    Tensor2(double t11, double t12, double t21, double t22)
        : a11(t11), a12(t12), a21(t21), a22(t22) {}

    static Tensor2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Tensor2 operator+(const Tensor2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Tensor2 operator-(const Tensor2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Tensor2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    Tensor2& operator+=(const Tensor2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22; return *this;
    }

    Tensor2 transpose() const { return {a11, a21, a12, a22}; }

    // symmetric part (M + M^T)/2
    Tensor2 sym() const {
        const double off = 0.5 * (a12 + a21);
        return {a11, off, off, a22};
    }

    double trace() const { return a11 + a22; }
    double frobenius() const {
        return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
    }
    // Frobenius inner product
    double ddot(const Tensor2& o) const {
        return a11 * o.a11 + a12 * o.a12 + a21 * o.a21 + a22 * o.a22;
    }
    Vec2 apply(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
};

inline Tensor2 operator*(double s, const Tensor2& t) { return t * s; }

// Second-order 2D Taylor jet.  Carries a value and all derivatives through
// order two; arithmetic propagates them exactly, so closed-form fields built
// on jets yield machine-precision gradients, Laplacians and divergences
// without numeric differencing.
struct Jet2 {
    double v = 0.0;            // value
    double dx = 0.0, dy = 0.0; // first derivatives
    double dxx = 0.0, dxy = 0.0, dyy = 0.0;

    Jet2() = default;
    explicit Jet2(double c) : v(c) {}
    Jet2(double v_, double dx_, double dy_, double dxx_, double dxy_, double dyy_)
        : v(v_), dx(dx_), dy(dy_), dxx(dxx_), dxy(dxy_), dyy(dyy_) {}

    static Jet2 var_x(double x) { return {x, 1.0, 0.0, 0.0, 0.0, 0.0}; }
    static Jet2 var_y(double y) { return {y, 0.0, 1.0, 0.0, 0.0, 0.0}; }

    Jet2 operator-() const { return {-v, -dx, -dy, -dxx, -dxy, -dyy}; }

    Jet2 operator+(const Jet2& o) const {
        return {v + o.v, dx + o.dx, dy + o.dy, dxx + o.dxx, dxy + o.dxy, dyy + o.dyy};
    }
    Jet2 operator-(const Jet2& o) const {
        return {v - o.v, dx - o.dx, dy - o.dy, dxx - o.dxx, dxy - o.dxy, dyy - o.dyy};
    }
    Jet2 operator*(const Jet2& o) const {
        return {v * o.v,
                dx * o.v + v * o.dx,
                dy * o.v + v * o.dy,
                dxx * o.v + 2.0 * dx * o.dx + v * o.dxx,
                dxy * o.v + dx * o.dy + dy * o.dx + v * o.dxy,
                dyy * o.v + 2.0 * dy * o.dy + v * o.dyy};
    }
    Jet2 operator/(const Jet2& o) const {
        Jet2 r;
        r.v = v / o.v;
        r.dx = (dx - r.v * o.dx) / o.v;
        r.dy = (dy - r.v * o.dy) / o.v;
        r.dxx = (dxx - 2.0 * r.dx * o.dx - r.v * o.dxx) / o.v;
        r.dxy = (dxy - r.dx * o.dy - r.dy * o.dx - r.v * o.dxy) / o.v;
        r.dyy = (dyy - 2.0 * r.dy * o.dy - r.v * o.dyy) / o.v;
        return r;
    }

    Jet2 operator+(double c) const { Jet2 r = *this; r.v += c; return r; }
    Jet2 operator-(double c) const { Jet2 r = *this; r.v -= c; return r; }
    Jet2 operator*(double c) const {
        return {v * c, dx * c, dy * c, dxx * c, dxy * c, dyy * c};
    }
    Jet2 operator/(double c) const { return (*this) * (1.0 / c); }
};

inline Jet2 operator+(double c, const Jet2& j) { return j + c; }
inline Jet2 operator-(double c, const Jet2& j) { return (-j) + c; }
inline Jet2 operator*(double c, const Jet2& j) { return j * c; }
inline Jet2 operator/(double c, const Jet2& j) { return Jet2(c) / j; }

inline Jet2 pow_int(const Jet2& j, int n) {
    if (n < 0) return Jet2(1.0) / pow_int(j, -n);
    Jet2 r(1.0);
    for (int i = 0; i < n; ++i) r = r * j;
    return r;
}

inline Jet2 jsin(const Jet2& f) {
    const double s = std::sin(f.v), c = std::cos(f.v);
    return {s,
            c * f.dx,
            c * f.dy,
            c * f.dxx - s * f.dx * f.dx,
            c * f.dxy - s * f.dx * f.dy,
            c * f.dyy - s * f.dy * f.dy};
}

inline Jet2 jcos(const Jet2& f) {
    const double s = std::sin(f.v), c = std::cos(f.v);
    return {c,
            -s * f.dx,
            -s * f.dy,
            -s * f.dxx - c * f.dx * f.dx,
            -s * f.dxy - c * f.dx * f.dy,
            -s * f.dyy - c * f.dy * f.dy};
}

// C^3 smoothstep: s(0)=0, s(1)=1, first three derivatives vanish at both
// ends.  Used for every blend in the geometry and boundary-data machinery so
// composite curves stay C^3 at the junctions.
inline double smoothstep7(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double t4 = t * t * t * t;
    return t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}

inline double smoothstep7_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double t3 = t * t * t;
    return t3 * (140.0 + t * (-420.0 + t * (420.0 - 140.0 * t)));
}

// Small exact fraction for rate exponents (-1/2, -3/2, ...).
struct Frac {
    int num = 0;
    int den = 1;

    double value() const { return static_cast<double>(num) / den; }
    bool operator==(const Frac& o) const {
        return static_cast<long>(num) * o.den == static_cast<long>(o.num) * den;
    }
    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

// FNV-1a 64-bit content hash, used to stamp output files.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace neckflow

#endif // NECKFLOW_CORE_HPP
