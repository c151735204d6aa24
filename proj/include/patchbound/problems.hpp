#pragma once

// Coefficient sets of the model problems used by the experiments.

#include <cmath>
#include <numbers>
#include <string>

#include "patchbound/error.hpp"
#include "patchbound/local_integrals.hpp"

namespace patchbound::problems {

/// Source term used by every experiment.
inline constexpr double source = 10.0;

inline CoefficientField constant(const Tensor2& a, double c)
{
    CoefficientField f;
    f.a = [a](const Point&) { return a; };
    f.c = [c](const Point&) { return c; };
    return f;
}

inline Tensor2 diag(double a11, double a22)
{
    Tensor2 t;
    t << a11, 0.0, 0.0, a22;
    return t;
}

/// a = diag(3.01 + 3 s, 1.01 + s) with s = sin(pi x1 x2), c = 1.
inline CoefficientField diffusion_reaction()
{
    CoefficientField f;
    f.a = [](const Point& x) {
        const double s = std::sin(x.x() * x.y() * std::numbers::pi);
        return diag(3.01 + 3.0 * s, 1.01 + s);
    };
    f.c = [](const Point&) { return 1.0; };
    return f;
}

/// Reference data for the diffusion-reaction problem: a_p1 = I or a_p2 = diag(3,1), c_p = 1.
inline CoefficientField diffusion_reaction_reference(int which)
{
    if (which == 1)
        return constant(Tensor2::Identity(), 1.0);
    if (which == 2)
        return constant(diag(3.0, 1.0), 1.0);
    throw InvalidArgument("unknown reference data ap" + std::to_string(which));
}

/// The three coefficient tests comparing spectra with their bounds.
struct BoundTest {
    CoefficientField coeff;
    CoefficientField reference;
};

inline BoundTest bound_test(int id)
{
    const auto oscillating = [](double c) {
        CoefficientField f;
        f.a = [](const Point& x) {
            const double s = std::sin(x.x() * x.y() * std::numbers::pi);
            return ((1.0 + s) * diag(3.0, 1.0) + 0.1 * Tensor2::Identity()).eval();
        };
        f.c = [c](const Point&) { return c; };
        return f;
    };
    switch (id) {
    case 1:
        return {oscillating(1.0), constant(diag(3.0, 1.0), 1.0)};
    case 2:
        return {oscillating(0.0), constant(diag(3.0, 1.0), 0.0)};
    case 3: {
        CoefficientField f;
        f.a = [](const Point& x) { return (x.x() < 0.5 ? 1.0 : 5.0) * Tensor2::Identity(); };
        f.c = [](const Point&) { return 0.0; };
        return {f, constant(Tensor2::Identity(), 0.0)};
    }
    default:
        throw InvalidArgument("unknown bound test " + std::to_string(id));
    }
}

/// a = diag(20 - 2 x2, 3 - 2 x1), b = 10 (-x2, x1), c = 10. The velocity is divergence free.
inline CoefficientField convection_diffusion()
{
    CoefficientField f;
    f.a = [](const Point& x) { return diag(20.0 - 2.0 * x.y(), 3.0 - 2.0 * x.x()); };
    f.b = [](const Point& x) { return Eigen::Vector2d(-10.0 * x.y(), 10.0 * x.x()); };
    f.c = [](const Point&) { return 10.0; };
    return f;
}

/// a_p1 = I or a_p2 = diag(19, 2), c_p = 10, no convection.
inline CoefficientField convection_diffusion_reference(int which)
{
    if (which == 1)
        return constant(Tensor2::Identity(), 10.0);
    if (which == 2)
        return constant(diag(19.0, 2.0), 10.0);
    throw InvalidArgument("unknown reference data ap" + std::to_string(which));
}

} // namespace patchbound::problems
