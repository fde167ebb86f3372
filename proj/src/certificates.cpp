#include "beamlab/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace beamlab {

double lipschitz_constant(const NonlinearitySpec& f, double K) {
    if (K < 0.0) throw std::invalid_argument("lipschitz_constant: K must be >= 0");
    switch (f.kind) {
    case NonlinearityKind::PositivePart: return f.mu;
    case NonlinearityKind::Cubic:
    case NonlinearityKind::PositiveCubic: return 3.0 * K * K;
    }
    return 0.0;
}

double solution_bound_M(double E0, const ModalForcing& forcing, double T) {
    if (E0 < 0.0) throw std::invalid_argument("solution_bound_M: E0 must be >= 0");
    if (!(T > 0.0)) throw std::invalid_argument("solution_bound_M: T must be positive");
    double M = std::sqrt(2.0 * E0);
    if (forcing.present) {
        const double g = std::abs(forcing.gamma);
        M += std::sqrt(2.0 * pi) * (forcing.alpha / g) * std::floor(1.0 + g * T / pi);
    }
    return M;
}

double forcing_l2_mass(const ModalForcing& forcing, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("forcing_l2_mass: T must be positive");
    if (!forcing.present) return 0.0;
    // ∫₀ᵀ |sin(γs)| ds = (2k + 1 − cos(θ − kπ))/|γ|, θ = |γ|T, k = ⌊θ/π⌋
    const double g = std::abs(forcing.gamma);
    const double theta = g * T;
    const double k = std::floor(theta / pi);
    const double integral = (2.0 * k + 1.0 - std::cos(theta - k * pi)) / g;
    return std::sqrt(0.5 * pi) * forcing.alpha * integral;
}

double growth_constant(double L) {
    if (L < 0.0) throw std::invalid_argument("growth_constant: L must be >= 0");
    return L / std::sqrt(2.0 * (L + 2.0));
}

double mode_error_bound(int n, int N, double T, double M, double L) {
    if (n < 1 || n > N) throw std::invalid_argument("mode_error_bound: need 1 <= n <= N");
    if (!(T > 0.0)) throw std::invalid_argument("mode_error_bound: T must be positive");
    if (M < 0.0 || L < 0.0) throw std::invalid_argument("mode_error_bound: M, L must be >= 0");
    const double C = growth_constant(L);
    const double np1 = N + 1.0;
    const double n4 = double(n) * n * n * n;
    return (4.0 * M / (np1 * np1)) * std::sqrt((L + 2.0) / pi) * std::expm1(0.5 * C * T) /
           std::sqrt(n4 + 1.0 / (T * T) + 0.5 * L);
}

double specialized_positive_part_bound(int n, double mu, double E0, double alpha, double gamma,
                                       double T) {
    if (n < 1 || n > 5)
        throw std::invalid_argument("specialized_positive_part_bound: need 1 <= n <= 5");
    if (!(mu > 0.0) || E0 < 0.0 || !(T > 0.0))
        throw std::invalid_argument("specialized_positive_part_bound: bad parameters");
    const double g = std::abs(gamma);
    double numerator = std::sqrt(32.0 * E0);
    if (alpha != 0.0) {
        if (g == 0.0)
            throw std::invalid_argument("specialized_positive_part_bound: gamma must be nonzero");
        numerator += std::sqrt(32.0 * pi) * (alpha / g) * std::floor(1.0 + g * T / pi);
    }
    const double n4 = double(n) * n * n * n;
    return std::sqrt((mu + 2.0) / pi) * (numerator / 36.0) *
           std::expm1(mu * T / (2.0 * std::sqrt(2.0 * (mu + 2.0)))) /
           std::sqrt(n4 + 1.0 / (T * T) + 0.5 * mu);
}

ErrorCertificate ErrorCertificate::build(const ModalState& initial, const NonlinearitySpec& f,
                                         const ModalForcing& forcing, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("ErrorCertificate: T must be positive");
    ErrorCertificate cert;
    cert.N = initial.modes();
    cert.T = T;
    cert.E0 = energy(initial, f);
    cert.M = std::sqrt(2.0 * cert.E0) + forcing_l2_mass(forcing, T);
    cert.L = lipschitz_constant(f, cert.M);
    cert.C = growth_constant(cert.L);
    cert.per_mode_bounds.resize(cert.N);
    for (int n = 1; n <= cert.N; ++n)
        cert.per_mode_bounds[n - 1] = mode_error_bound(n, cert.N, T, cert.M, cert.L);
    if (forcing.present) {
        cert.remainder = remainder_bound(0.5 * cert.M * cert.M, cert.N);
        cert.remainder_forced_substitution = true;
    } else {
        cert.remainder = remainder_bound(cert.E0, cert.N);
    }
    return cert;
}

const char* to_string(CertificationStatus s) {
    switch (s) {
    case CertificationStatus::CertifiedStable: return "certified_stable";
    case CertificationStatus::CertifiedUnstable: return "certified_unstable";
    case CertificationStatus::NotCertified: return "not_certified";
    }
    return "not_certified";
}

CertificationResult certify(const StabilityVerdict& verdict, const ErrorCertificate& cert,
                            const DetectorScan& scan, double alpha) {
    if (cert.N != scan.N)
        throw std::invalid_argument("certify: certificate and scan disagree on N");
    if (std::abs(cert.T - scan.T) > 1e-9 * std::max(1.0, std::abs(scan.T)))
        throw std::invalid_argument("certify: certificate and scan disagree on T");

    CertificationResult res;
    const std::size_t M = scan.taus.size();
    const int j = scan.j;
    const double eps_j = cert.per_mode_bounds[j - 1];

    if (verdict.status == StabilityStatus::Indeterminate) {
        res.status = CertificationStatus::NotCertified;
        res.detail = "finite-dimensional verdict is indeterminate";
        return res;
    }

    if (verdict.status == StabilityStatus::Stable) {
        // Perturbed data must stay clear of the 0.11/11(α+1) instability pair
        // at every residual mode and scanned τ.
        double worst = std::numeric_limits<double>::infinity();
        std::optional<int> worst_k;
        std::optional<double> worst_tau;
        for (std::size_t m = 0; m < M; ++m) {
            for (int k = 1; k <= scan.N; ++k) {
                if (k == j) continue;
                const double eps_k = cert.per_mode_bounds[k - 1];
                const double hi_k = scan.S(k, m) + eps_k;
                // amplitude escape: S̃_k < 0.11 S̃_j
                const double margin_amp = 0.11 * (scan.S(j, m) - eps_j) - hi_k;
                // growth escape: S̃_k(τ) < 11(α+1) S̃_k(τ/2)
                const double den = scan.Shalf(k, m) - eps_k;
                const double margin_growth =
                    den > 0.0 ? 11.0 * (alpha + 1.0) * den - hi_k
                              : -std::numeric_limits<double>::infinity();
                const double margin = std::max(margin_amp, margin_growth);
                if (margin < worst) {
                    worst = margin;
                    worst_k = k;
                    worst_tau = scan.taus[m];
                }
            }
        }
        res.limiting_margin = worst;
        res.limiting_mode = worst_k;
        res.limiting_tau = worst_tau;
        if (worst > 0.0) {
            res.status = CertificationStatus::CertifiedStable;
            res.detail = "perturbed sup norms cannot reach the instability inequalities";
        } else {
            res.status = CertificationStatus::NotCertified;
            res.detail = "per-mode bounds too large to exclude instability of the full system";
        }
        return res;
    }

    // Unstable verdict: look for a witness that survives perturbation against
    // the 0.09/9(α+1) stable inequalities.
    double best = -std::numeric_limits<double>::infinity();
    std::optional<int> best_k;
    std::optional<double> best_tau;
    for (std::size_t m = 0; m < M; ++m) {
        for (int k = 1; k <= scan.N; ++k) {
            if (k == j) continue;
            const double eps_k = cert.per_mode_bounds[k - 1];
            const double lo_k = scan.S(k, m) - eps_k;
            const double margin_amp = lo_k - 0.09 * (scan.S(j, m) + eps_j);
            const double margin_growth =
                lo_k - 9.0 * (alpha + 1.0) * (scan.Shalf(k, m) + eps_k);
            const double margin = std::min(margin_amp, margin_growth);
            if (margin > best) {
                best = margin;
                best_k = k;
                best_tau = scan.taus[m];
            }
        }
    }
    res.limiting_margin = best;
    res.limiting_mode = best_k;
    res.limiting_tau = best_tau;
    if (best > 0.0) {
        res.status = CertificationStatus::CertifiedUnstable;
        res.detail = "witness violates the stable inequalities under any admissible perturbation";
    } else {
        res.status = CertificationStatus::NotCertified;
        res.detail = "per-mode bounds too large to pin the witness above the stable constants";
    }
    return res;
}

} // namespace beamlab
