#pragma once

/*
 * Fourier sine basis on (0,π), the quadruple sine coupling tensor, and the
 * projection of the nonlinearity onto modes.
 *
 * A displacement field is represented by its sine coefficients,
 *
 *     u(x) = Σ_{n=1}^N u_n sin(nx),      x ∈ (0,π),
 *
 * and the nonlinear term enters the modal equations through
 *
 *     proj_n(u) = (2/π) ∫₀^π f(u(x)) sin(nx) dx.
 *
 * For f(u) = u³ this projection is exact via the coupling tensor
 *
 *     T(p,q,r,s) = (8/π) ∫₀^π sin(px) sin(qx) sin(rx) sin(sx) dx ∈ {−1,0,1,2,3},
 *
 * whose closed-form case analysis (prostaphaeresis) is implemented in
 * quadruple_sine_integral.  For the non-smooth kinds f(u) = μu⁺ and
 * f(u) = (u⁺)³ the projection is computed by composite Gauss–Legendre
 * quadrature (8 nodes per panel, max(64, 8N) panels by default; the even
 * panel count keeps the grid symmetric about π/2, which preserves parity
 * cancellations to rounding).
 */

#include <cstdint>
#include <set>
#include <unordered_map>
#include <vector>

#include "beamlab/errors.hpp"

namespace beamlab {

inline constexpr double pi = 3.14159265358979323846;

// Modal coefficient vector; entry i corresponds to basis function sin((i+1)x).
using ModeVector = std::vector<double>;

enum class NonlinearityKind { PositivePart, Cubic, PositiveCubic };

// One of the three admissible nonlinearities: f(u) = μu⁺, u³, (u⁺)³.
// All satisfy f(0)=0, f non-decreasing, locally Lipschitz, with potential
// F(s) = ∫₀ˢ f ≥ 0 equal to μ(s⁺)²/2, s⁴/4, (s⁺)⁴/4 respectively.
struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::Cubic;
    double mu = 0.0; // coefficient of u⁺, PositivePart only

    static NonlinearitySpec positive_part(double mu);
    static NonlinearitySpec cubic() { return {NonlinearityKind::Cubic, 0.0}; }
    static NonlinearitySpec positive_cubic() { return {NonlinearityKind::PositiveCubic, 0.0}; }

    double f(double s) const;
    double F(double s) const;
    bool smooth() const { return kind == NonlinearityKind::Cubic; }
};

// Largest admissible truncation order; overridden by env var BEAMLAB_MAX_N.
int max_mode_count();

// (8/π)∫₀^π sin(px)sin(qx)sin(rx)sin(sx) dx by closed-form case analysis.
double quadruple_sine_integral(int p, int q, int r, int s);

// Sparse, permutation-symmetric table of all nonzero T(p,q,r,s), p,q,r,s ≤ N,
// stored once per sorted key.
struct CubicCouplingTensor {
    int N = 0;
    std::unordered_map<std::uint32_t, double> entries; // sorted key → value

    static std::uint32_t key(int p, int q, int r, int s); // sorts internally
    double value(int p, int q, int r, int s) const;       // 0 if absent
};

CubicCouplingTensor build_cubic_tensor(int N);

// Precomputed projector for one (nonlinearity, N) pair.  Cubic contracts the
// coupling tensor exactly; the u⁺ kinds evaluate the integral by composite
// Gauss–Legendre.  panels = 0 selects the default rule max(64, 8N).
class NonlinearProjector {
public:
    NonlinearProjector(const NonlinearitySpec& f, int N, int panels = 0);

    int modes() const { return N_; }
    const NonlinearitySpec& nonlinearity() const { return f_; }

    // out[n-1] = (2/π)∫₀^π f(u(x)) sin(nx) dx, n = 1..N
    void project(const double* u, double* out) const;
    ModeVector project(const ModeVector& u) const;

    // ∫₀^π F(u(x)) dx; tensor contraction for Cubic, same quadrature rule as
    // project() otherwise (so the modal system conserves exactly this value)
    double potential_integral(const double* u) const;

private:
    NonlinearitySpec f_;
    int N_;

    struct CubicTerm {
        int q, r, s;
        double w; // permutation multiplicity × T(n,q,r,s) / 4
    };
    std::vector<std::vector<CubicTerm>> plan_; // per target mode n

    struct QuarticTerm {
        int p, q, r, s;
        double w; // multiplicity × T(p,q,r,s) × π/32  (gives ∫ u⁴/4 directly)
    };
    std::vector<QuarticTerm> quartic_;

    std::vector<double> nodes_, weights_; // composite rule on [0,π]
    std::vector<double> sin_table_;       // N × nodes, sin(n x_k)
    mutable std::vector<double> scratch_; // f(u(x_k)) buffer
};

// Convenience wrapper building a one-shot projector.
ModeVector project_nonlinearity(const NonlinearitySpec& f, const ModeVector& u);

// Pointwise field values Σ u_n sin(n x) at each requested position.
std::vector<double> evaluate_field(const ModeVector& u, const std::vector<double>& xs);

// Modes that can receive energy from one, two, or three distinct source modes
// through the cubic coupling; the sources themselves are excluded.
std::set<int> influence_set(const std::vector<int>& sources);

// Gauss–Legendre nodes and weights on [−1,1] (Newton iteration on P_n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace beamlab
