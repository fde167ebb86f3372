#pragma once

// Brute-force reference computations for the test suites.  Deliberately slow
// and independent of the library's quadrature and tensor machinery: plain
// trapezoid sums on [0,π], which are exact to rounding for the trigonometric
// polynomials exercised here (degree far below the node count) and accurate
// to O(h²) at the u⁺ kinks.

#include <cmath>
#include <vector>

#include "beamlab/dynamics.hpp"
#include "beamlab/spectral.hpp"

namespace oracle {

template <typename F>
double trapezoid(F&& fn, int nodes) {
    const double h = beamlab::pi / nodes;
    double acc = 0.5 * (fn(0.0) + fn(beamlab::pi));
    for (int i = 1; i < nodes; ++i) acc += fn(i * h);
    return acc * h;
}

inline double quadruple_sine(int p, int q, int r, int s, int nodes = 100000) {
    return 8.0 / beamlab::pi *
           trapezoid(
               [&](double x) {
                   return std::sin(p * x) * std::sin(q * x) * std::sin(r * x) * std::sin(s * x);
               },
               nodes);
}

inline double field_at(const beamlab::ModeVector& u, double x) {
    double v = 0.0;
    for (std::size_t m = 0; m < u.size(); ++m) v += u[m] * std::sin((m + 1.0) * x);
    return v;
}

inline beamlab::ModeVector project(const beamlab::NonlinearitySpec& f,
                                   const beamlab::ModeVector& u, int nodes = 20000) {
    beamlab::ModeVector out(u.size());
    for (std::size_t n = 1; n <= u.size(); ++n)
        out[n - 1] = 2.0 / beamlab::pi *
                     trapezoid([&](double x) { return f.f(field_at(u, x)) * std::sin(n * x); },
                               nodes);
    return out;
}

inline double potential(const beamlab::NonlinearitySpec& f, const beamlab::ModeVector& u,
                        int nodes = 20000) {
    return trapezoid([&](double x) { return f.F(field_at(u, x)); }, nodes);
}

inline double energy(const beamlab::ModalState& state, const beamlab::NonlinearitySpec& f,
                     int nodes = 20000) {
    double quad = 0.0;
    for (int n = 1; n <= state.modes(); ++n) {
        const double n4 = double(n) * n * n * n;
        quad += state.phidot[n - 1] * state.phidot[n - 1] +
                n4 * state.phi[n - 1] * state.phi[n - 1];
    }
    return 0.25 * beamlab::pi * quad + potential(f, state.phi, nodes);
}

} // namespace oracle
