#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "neckflow/core.hpp"

using namespace neckflow;

TEST_CASE("tensor symmetric part") {
    Tensor2 m(1.0, 2.0, 4.0, 3.0);
    Tensor2 e = m.sym();
    CHECK(e.a12 == doctest::Approx(3.0));
    CHECK(e.a21 == doctest::Approx(3.0));
    CHECK(e.a11 == doctest::Approx(1.0));
    CHECK(e.a22 == doctest::Approx(3.0));
}

static double fd2(double (*f)(double, double), double x, double y, double hx, double hy) {
    // central second difference in the hx/hy direction pair
    if (hy == 0.0)
        return (f(x + hx, y) - 2.0 * f(x, y) + f(x - hx, y)) / (hx * hx);
    if (hx == 0.0)
        return (f(x, y + hy) - 2.0 * f(x, y) + f(x, y - hy)) / (hy * hy);
    return (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) /
           (4.0 * hx * hy);
}

static double sample_fn(double x, double y) {
    return (x * x * y + 3.0 * x / (1.0 + y * y)) * (y - 0.5) + x * x * x * y * y;
}

TEST_CASE("jet arithmetic matches finite differences") {
    const double x = 0.7, y = -0.3;
    Jet2 X = Jet2::var_x(x), Y = Jet2::var_y(y);
    Jet2 f = (X * X * Y + 3.0 * X / (1.0 + Y * Y)) * (Y - 0.5) + X * X * X * Y * Y;

    CHECK(f.v == doctest::Approx(sample_fn(x, y)).epsilon(1e-14));
    const double h = 1e-5;
    CHECK(f.dx == doctest::Approx((sample_fn(x + h, y) - sample_fn(x - h, y)) / (2 * h))
                      .epsilon(1e-8));
    CHECK(f.dy == doctest::Approx((sample_fn(x, y + h) - sample_fn(x, y - h)) / (2 * h))
                      .epsilon(1e-8));
    CHECK(f.dxx == doctest::Approx(fd2(sample_fn, x, y, 1e-4, 0.0)).epsilon(1e-6));
    CHECK(f.dyy == doctest::Approx(fd2(sample_fn, x, y, 0.0, 1e-4)).epsilon(1e-6));
    CHECK(f.dxy == doctest::Approx(fd2(sample_fn, x, y, 1e-4, 1e-4)).epsilon(1e-6));
}

TEST_CASE("jet trig") {
    const double x = 1.1;
    Jet2 X = Jet2::var_x(x);
    Jet2 s = jsin(X * X);
    CHECK(s.v == doctest::Approx(std::sin(x * x)));
    CHECK(s.dx == doctest::Approx(2 * x * std::cos(x * x)));
    CHECK(s.dxx ==
          doctest::Approx(2 * std::cos(x * x) - 4 * x * x * std::sin(x * x)).epsilon(1e-12));
}

TEST_CASE("smoothstep7 endpoint derivatives vanish") {
    CHECK(smoothstep7(0.0) == 0.0);
    CHECK(smoothstep7(1.0) == 1.0);
    const double h = 1e-3;
    // three vanishing derivatives at each end
    for (double t0 : {0.0, 1.0}) {
        auto f = [&](double t) { return smoothstep7(t); };
        const double d1 = (f(t0 + h) - f(t0 - h)) / (2 * h);
        const double d2 = (f(t0 + h) - 2 * f(t0) + f(t0 - h)) / (h * h);
        const double d3 =
            (f(t0 + 2 * h) - 2 * f(t0 + h) + 2 * f(t0 - h) - f(t0 - 2 * h)) / (2 * h * h * h);
        CHECK(std::fabs(d1) < 2e-5);
        CHECK(std::fabs(d2) < 5e-2);
        CHECK(std::fabs(d3) < 5.0);
    }
}

TEST_CASE("fnv hash is stable") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
}
