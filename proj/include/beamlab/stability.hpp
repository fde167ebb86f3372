#pragma once

/*
 * Prevailing-mode classification and the finite-dimensional instability
 * detector.
 *
 * A mode j prevails (unforced) when it is the unique index with
 * Σ_{n≠j}(a_n² + b_n²) ≤ η⁴ (a_j² + b_j²); under single-mode forcing the
 * forced mode j prevails when a_n² + b_n² ≤ η⁴ (a_j² + b_j²) for every n≠j.
 *
 * The detector scans every residual mode k and every sampled τ ∈ (2T_W, T):
 *
 *   unstable witness:  S_k(τ) ≥ 0.11 S_j(τ)  and  S_k(τ)/S_k(τ/2) ≥ 11(α+1)
 *   stable everywhere: S_k(τ) ≤ 0.09 S_j(τ)  or   S_k(τ)/S_k(τ/2) ≤ 9(α+1)
 *
 * with S_k(τ) = ‖φ_k‖_{L∞(0,τ)}.  The 0.09/9 and 0.11/11 constants are not
 * complementary; configurations falling in the gap are reported as
 * Indeterminate.  A growth ratio with zero denominator counts as +∞ when the
 * numerator is positive and as failed when both vanish.
 */

#include <optional>
#include <utility>

#include "beamlab/dynamics.hpp"

namespace beamlab {

struct PrevailingConfig {
    double eta = 0.1; // 0.1 unforced, 0.999 forced
    double T_W = 1.0; // Wagner time; detection scans τ ∈ (2T_W, T)
    double T = 0.0;   // observation horizon, must exceed 2T_W

    static PrevailingConfig for_horizon(double T, bool forced) {
        return {forced ? 0.999 : 0.1, 1.0, T};
    }
};

enum class StabilityStatus { Stable, Unstable, Indeterminate };

struct StabilityVerdict {
    StabilityStatus status = StabilityStatus::Indeterminate;
    std::optional<int> witness_mode;    // Unstable: earliest witness; Indeterminate: gap location
    std::optional<double> witness_tau;
    double ratio_amplitude = 0.0; // S_k(τ)/S_j(τ) at the witness (max over scan if Stable)
    double ratio_growth = 0.0;    // S_k(τ)/S_k(τ/2) likewise
};

const char* to_string(StabilityStatus s);

// Unique η-prevailing mode of the initial data (a = positions, b = velocities),
// or nullopt when no mode qualifies.
std::optional<int> classify_prevailing(const ModeVector& a, const ModeVector& b,
                                       const ModalForcing& forcing, double eta);

// max_{t ≤ tau} |φ_k(t)| over the stored samples.
double running_sup(const Trajectory& traj, int k, double tau);

// Running sup norms of every mode at every scanned τ, the inputs of both the
// detector and the certificate flip test.
struct DetectorScan {
    int N = 0;
    int j = 0;
    double T = 0.0;
    double T_W = 1.0;
    std::vector<double> taus;     // sample times in (2T_W, T), increasing
    std::vector<double> sup;      // mode-major: sup[(k-1)*taus.size()+i] = S_k(τ_i)
    std::vector<double> half_sup; // S_k(τ_i / 2)

    double S(int k, std::size_t i) const { return sup[(k - 1) * taus.size() + i]; }
    double Shalf(int k, std::size_t i) const { return half_sup[(k - 1) * taus.size() + i]; }
};

DetectorScan scan_running_sups(const Trajectory& traj, int j, const PrevailingConfig& cfg);

StabilityVerdict evaluate_detector(const DetectorScan& scan, double alpha);

StabilityVerdict detect_instability(const Trajectory& traj, int j, double alpha,
                                    const PrevailingConfig& cfg);

// Amplitude-threshold bisection: initial data M sin(jx) + δ Σ_{n≠j} sin(nx),
// u₁ = 0; Stable verdicts raise the low end, anything else lowers the high
// end (Indeterminate is conservatively treated as not Stable).
struct ThresholdProblem {
    NonlinearitySpec f;
    int N = 12;
    double T = 16.0;
    int j = 2;
    double residual_delta = 0.01;
    ModalForcing forcing; // absent for the autonomous sweeps
    SolverOptions solver;
    double eta = 0.1;
    double T_W = 1.0;
};

struct ThresholdEvaluation {
    double amplitude = 0.0;
    StabilityVerdict verdict;
};

struct ThresholdResult {
    double threshold = 0.0;                  // midpoint of the final bracket
    std::pair<double, double> bracket{0, 0}; // final [lo, hi]
    std::optional<int> witness_mode;         // from the lowest Unstable amplitude seen
    std::optional<double> witness_tau;
    std::optional<std::pair<double, double>> indeterminate_band; // amplitudes seen Indeterminate
    std::vector<ThresholdEvaluation> evaluations;
};

ThresholdResult threshold_search(const ThresholdProblem& problem,
                                 std::pair<double, double> bracket, double step);

} // namespace beamlab
