#pragma once

/*
 * Truncated modal dynamics of the hinged nonlinear beam,
 *
 *     φ̈_n + n⁴ φ_n + (2/π)∫₀^π f(Σ_m φ_m sin(mx)) sin(nx) dx = δ_{jn} α sin(γt),
 *
 * for n = 1..N, integrated as a first-order system of dimension 2N by an
 * embedded explicit Runge–Kutta 5(4) pair (Dormand–Prince) with
 * proportional–integral step control.  Dense output is produced on a uniform
 * grid of spacing dt_sample plus every accepted step endpoint, so running sup
 * norms are not aliased by the controller's step choices.
 *
 * The conserved quantity in the autonomous case is
 *
 *     E = (π/4) Σ (φ̇_n² + n⁴ φ_n²) + ∫₀^π F(u) dx,
 *
 * and under single-mode forcing g = α sin(jx) sin(γt) the balance law is
 * dE/dt = (π/2) α sin(γt) φ̇_j.
 */

#include <cstddef>
#include <iosfwd>

#include "beamlab/spectral.hpp"

namespace beamlab {

// Single-mode harmonic forcing g(x,t) = α sin(jx) sin(γt), or absent.
struct ModalForcing {
    bool present = false;
    int j = 0;
    double alpha = 0.0;
    double gamma = 0.0;

    static ModalForcing none() { return {}; }
    static ModalForcing single_mode(int j, double alpha, double gamma);

    // δ_{jn} α sin(γt)
    double modal_value(int n, double t) const;
};

// Modal coefficients and velocities at one instant.
struct ModalState {
    double t = 0.0;
    ModeVector phi;
    ModeVector phidot;

    int modes() const { return static_cast<int>(phi.size()); }
};

struct SolverOptions {
    double atol = 1e-9;
    double rtol = 1e-9;
    double dt_sample = 1e-3;
    int quad_panels = 0;               // 0 selects max(64, 8N)
    std::size_t max_samples = 20000000; // resource cap on stored samples
};

// Densely sampled solution plus per-sample energy and the full input record.
struct Trajectory {
    int N = 0;
    double T = 0.0;
    std::vector<double> t;              // strictly increasing, t.front()=0, t.back()=T
    std::vector<double> phi;            // row-major samples × N
    std::vector<double> phidot;         // row-major samples × N
    std::vector<double> energy;         // per-sample E(t)
    std::vector<unsigned char> on_grid; // 1 when the sample sits on the uniform grid

    NonlinearitySpec f;
    ModalForcing forcing;
    ModeVector u0, v0;
    SolverOptions options;

    std::size_t size() const { return t.size(); }
    double phi_at(std::size_t i, int n) const { return phi[i * N + (n - 1)]; }
    double phidot_at(std::size_t i, int n) const { return phidot[i * N + (n - 1)]; }
};

// Accelerations of the modal system at one state: entry n is
// −n⁴φ_n − proj_n(φ) + δ_{jn} α sin(γt).
ModeVector assemble_rhs(const ModalState& state, const NonlinearitySpec& f,
                        const ModalForcing& forcing);

Trajectory integrate(const ModalState& initial, const NonlinearitySpec& f,
                     const ModalForcing& forcing, double T,
                     const SolverOptions& options = {});

// Total energy (kinetic + bending + potential) of one state.
double energy(const ModalState& state, const NonlinearitySpec& f);

// The closed-form first mode for f(u)=3u⁺ started from u₀=0, u₁=sin x:
// (1/2)sin(2t) on [0,π/2], sin(π/2−t) on [π/2,3π/2], then 3π/2-periodic.
double explicit_first_mode_solution(double t, double mu);

// Uniform-in-time bound 4E0/(π(N+1)⁴) on Σ_{n>N} φ_n² for the autonomous flow.
double remainder_bound(double E0, int N);

// CSV export: header t,phi_1..phi_N,dphi_1..dphi_N,E with %.17g values.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

// CSV export of t,E only.
void write_energy_csv(const Trajectory& traj, std::ostream& os);

} // namespace beamlab
