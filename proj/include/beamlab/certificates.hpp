#pragma once

/*
 * Quantitative truncation-error certificates that lift detector verdicts from
 * the N-mode system to the full beam equation.
 *
 * With L a Lipschitz constant of f on [−M, M], M a uniform bound on the
 * solution amplitude, and C = L/√(2(L+2)), each truncated mode obeys
 *
 *   ‖φ_n − φ_n^N‖_{L∞(0,T)} ≤ (4M/(N+1)²) √((L+2)/π) (e^{CT/2} − 1)
 *                              / √(n⁴ + 1/T² + L/2).
 *
 * The bound on M is √(2E(0)) plus the L² mass of the forcing over [0,T]; for
 * g = α sin(jx) sin(γt) the time integral has the closed form
 * √(π/2)·α·(2k + 1 − cos(θ − kπ))/|γ| with θ = |γ|T, k = ⌊θ/π⌋.  A
 * certificate turns a Stable verdict into Certified-Stable when perturbing
 * every residual sup norm by its per-mode bound still cannot satisfy the
 * 0.11/11(α+1) instability inequalities at any scanned τ, and an Unstable
 * verdict into Certified-Unstable when some witness survives the opposite
 * perturbation against the 0.09/9(α+1) constants.  Modes beyond N are covered
 * by the reported tail remainder 4E₀/(π(N+1)⁴) (forced runs substitute
 * E₀ → M²/2), which is diagnostic and does not gate certification.
 */

#include <optional>
#include <string>

#include "beamlab/stability.hpp"

namespace beamlab {

// Lipschitz constant of f on [−K, K]: μ for μu⁺, 3K² for the cubic kinds.
double lipschitz_constant(const NonlinearitySpec& f, double K);

// √(2E0) plus an integer-part majorization of the forcing mass:
// √(2E0) + √(2π)(α/γ)⌊1 + γT/π⌋ in the forced case.
double solution_bound_M(double E0, const ModalForcing& forcing, double T);

// Exact ∫₀ᵀ ‖g(·,s)‖_{L²(0,π)} ds for single-mode harmonic forcing.
double forcing_l2_mass(const ModalForcing& forcing, double T);

double growth_constant(double L); // C = L/√(2(L+2))

double mode_error_bound(int n, int N, double T, double M, double L);

// Specialization of the per-mode bound to f = μu⁺ with N = 5 and the
// majorized M (whence the √32 factors and the fixed (N+1)² = 36).
double specialized_positive_part_bound(int n, double mu, double E0, double alpha, double gamma,
                                       double T);

struct ErrorCertificate {
    int N = 0;
    double T = 0.0;
    double E0 = 0.0;
    double M = 0.0; // uniform solution bound, built from the exact forcing mass
    double L = 0.0;
    double C = 0.0;
    std::vector<double> per_mode_bounds; // entry n-1 bounds ‖φ_n − φ_n^N‖_{L∞(0,T)}
    double remainder = 0.0;              // tail bound on Σ_{n>N} φ_n²
    bool remainder_forced_substitution = false; // true when E0 → M²/2 was applied

    static ErrorCertificate build(const ModalState& initial, const NonlinearitySpec& f,
                                  const ModalForcing& forcing, double T);
};

enum class CertificationStatus { CertifiedStable, CertifiedUnstable, NotCertified };

const char* to_string(CertificationStatus s);

struct CertificationResult {
    CertificationStatus status = CertificationStatus::NotCertified;
    double limiting_margin = 0.0; // smallest slack across all checks (negative = violated)
    std::optional<int> limiting_mode;
    std::optional<double> limiting_tau;
    std::string detail;
};

// Flip test: re-check the detector inequalities with every residual sup norm
// perturbed by its per-mode bound.  Indeterminate verdicts are never upgraded.
CertificationResult certify(const StabilityVerdict& verdict, const ErrorCertificate& cert,
                            const DetectorScan& scan, double alpha);

} // namespace beamlab
