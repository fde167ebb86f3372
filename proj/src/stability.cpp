#include "beamlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace beamlab {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();

// Growth ratio with the zero-denominator convention: num>0/den=0 → +∞
// (instability condition satisfied), 0/0 → NaN (both conditions fail).
double growth_ratio(double num, double den) {
    if (den > 0.0) return num / den;
    if (num > 0.0) return inf;
    return std::numeric_limits<double>::quiet_NaN();
}
} // namespace

const char* to_string(StabilityStatus s) {
    switch (s) {
    case StabilityStatus::Stable: return "stable";
    case StabilityStatus::Unstable: return "unstable";
    case StabilityStatus::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

std::optional<int> classify_prevailing(const ModeVector& a, const ModeVector& b,
                                       const ModalForcing& forcing, double eta) {
    if (a.size() != b.size())
        throw std::invalid_argument("classify_prevailing: coefficient arrays differ in length");
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("classify_prevailing: eta must lie in (0,1)");
    const int N = static_cast<int>(a.size());
    const double eta4 = eta * eta * eta * eta;

    if (forcing.present) {
        const int j = forcing.j;
        if (j < 1 || j > N) return std::nullopt;
        const double ej = a[j - 1] * a[j - 1] + b[j - 1] * b[j - 1];
        for (int n = 1; n <= N; ++n) {
            if (n == j) continue;
            if (a[n - 1] * a[n - 1] + b[n - 1] * b[n - 1] > eta4 * ej) return std::nullopt;
        }
        return j;
    }

    double total = 0.0;
    for (int n = 0; n < N; ++n) total += a[n] * a[n] + b[n] * b[n];
    std::optional<int> found;
    for (int j = 1; j <= N; ++j) {
        const double ej = a[j - 1] * a[j - 1] + b[j - 1] * b[j - 1];
        if (total - ej <= eta4 * ej) {
            if (found) return std::nullopt; // not unique
            found = j;
        }
    }
    return found;
}

double running_sup(const Trajectory& traj, int k, double tau) {
    if (k < 1 || k > traj.N) throw std::invalid_argument("running_sup: mode index out of range");
    if (!(tau > 0.0) || tau > traj.t.back() + 1e-12 * std::max(1.0, traj.t.back()))
        throw std::invalid_argument("running_sup: tau outside the covered interval");
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.size() && traj.t[i] <= tau; ++i)
        sup = std::max(sup, std::abs(traj.phi[i * traj.N + (k - 1)]));
    return sup;
}

DetectorScan scan_running_sups(const Trajectory& traj, int j, const PrevailingConfig& cfg) {
    if (j < 1 || j > traj.N)
        throw std::invalid_argument("detector: prevailing index out of range");
    if (!(cfg.T_W > 0.0) || !(cfg.T > 2.0 * cfg.T_W))
        throw std::invalid_argument("detector: requires T > 2 T_W > 0");
    if (traj.t.back() + 1e-12 * std::max(1.0, cfg.T) < cfg.T)
        throw std::invalid_argument("detector: trajectory does not cover [0,T]");

    const int N = traj.N;
    const std::size_t S = traj.size();
    DetectorScan scan;
    scan.N = N;
    scan.j = j;
    scan.T = cfg.T;
    scan.T_W = cfg.T_W;

    // prefix running sups over all samples, mode-major
    std::vector<double> prefix(static_cast<std::size_t>(N) * S);
    for (int k = 0; k < N; ++k) {
        double m = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
            m = std::max(m, std::abs(traj.phi[i * N + k]));
            prefix[k * S + i] = m;
        }
    }

    std::vector<std::size_t> idx; // sample indices scanned as τ
    for (std::size_t i = 0; i < S; ++i)
        if (traj.t[i] > 2.0 * cfg.T_W && traj.t[i] < cfg.T) idx.push_back(i);

    const std::size_t M = idx.size();
    scan.taus.resize(M);
    scan.sup.resize(static_cast<std::size_t>(N) * M);
    scan.half_sup.resize(static_cast<std::size_t>(N) * M);

    std::size_t half = 0; // largest sample index with t ≤ τ/2, advances with τ
    for (std::size_t m = 0; m < M; ++m) {
        const double tau = traj.t[idx[m]];
        scan.taus[m] = tau;
        while (half + 1 < S && traj.t[half + 1] <= 0.5 * tau) ++half;
        for (int k = 0; k < N; ++k) {
            scan.sup[k * M + m] = prefix[k * S + idx[m]];
            scan.half_sup[k * M + m] = prefix[k * S + half];
        }
    }
    return scan;
}

StabilityVerdict evaluate_detector(const DetectorScan& scan, double alpha) {
    const double up_amp = 0.11, up_growth = 11.0 * (alpha + 1.0);
    const double lo_amp = 0.09, lo_growth = 9.0 * (alpha + 1.0);
    const std::size_t M = scan.taus.size();

    StabilityVerdict v;
    bool all_stable = true;
    std::optional<std::pair<int, std::size_t>> gap; // earliest pair failing both stable branches
    double max_amp_ratio = 0.0, max_growth_ratio = 0.0;

    for (std::size_t m = 0; m < M && !v.witness_mode; ++m) {
        for (int k = 1; k <= scan.N; ++k) {
            if (k == scan.j) continue;
            const double sk = scan.S(k, m), sj = scan.S(scan.j, m);
            const double g = growth_ratio(sk, scan.Shalf(k, m));

            if (sk >= up_amp * sj && g >= up_growth) { // NaN g fails both comparisons
                v.witness_mode = k;
                v.witness_tau = scan.taus[m];
                v.ratio_amplitude = sj > 0.0 ? sk / sj : (sk > 0.0 ? inf : 0.0);
                v.ratio_growth = g;
                break;
            }
            const bool stable_here = (sk <= lo_amp * sj) || (g <= lo_growth);
            if (!stable_here && all_stable) {
                all_stable = false;
                gap = {k, m};
            }
        }
    }

    if (v.witness_mode) {
        v.status = StabilityStatus::Unstable;
        return v;
    }
    if (all_stable) {
        v.status = StabilityStatus::Stable;
        // diagnostic: worst ratios attained anywhere in the scan
        for (std::size_t m = 0; m < M; ++m)
            for (int k = 1; k <= scan.N; ++k) {
                if (k == scan.j) continue;
                const double sj = scan.S(scan.j, m);
                if (sj > 0.0) max_amp_ratio = std::max(max_amp_ratio, scan.S(k, m) / sj);
                const double g = growth_ratio(scan.S(k, m), scan.Shalf(k, m));
                if (!std::isnan(g) && g != inf) max_growth_ratio = std::max(max_growth_ratio, g);
            }
        v.ratio_amplitude = max_amp_ratio;
        v.ratio_growth = max_growth_ratio;
        return v;
    }
    v.status = StabilityStatus::Indeterminate;
    const auto [k, m] = *gap;
    v.witness_mode = k;
    v.witness_tau = scan.taus[m];
    const double sj = scan.S(scan.j, m);
    v.ratio_amplitude = sj > 0.0 ? scan.S(k, m) / sj : (scan.S(k, m) > 0.0 ? inf : 0.0);
    v.ratio_growth = growth_ratio(scan.S(k, m), scan.Shalf(k, m));
    return v;
}

StabilityVerdict detect_instability(const Trajectory& traj, int j, double alpha,
                                    const PrevailingConfig& cfg) {
    return evaluate_detector(scan_running_sups(traj, j, cfg), alpha);
}

namespace {
StabilityVerdict evaluate_amplitude(const ThresholdProblem& p, double M) {
    ModalState init;
    init.t = 0.0;
    init.phi.assign(p.N, p.residual_delta);
    init.phi[p.j - 1] = M;
    init.phidot.assign(p.N, 0.0);
    Trajectory traj = integrate(init, p.f, p.forcing, p.T, p.solver);
    PrevailingConfig cfg{p.eta, p.T_W, p.T};
    double alpha = p.forcing.present ? p.forcing.alpha : 0.0;
    return detect_instability(traj, p.j, alpha, cfg);
}
} // namespace

ThresholdResult threshold_search(const ThresholdProblem& p, std::pair<double, double> bracket,
                                 double step) {
    if (p.j < 1 || p.j > p.N)
        throw std::invalid_argument("threshold_search: prevailing index out of range");
    if (!(step > 0.0)) throw std::invalid_argument("threshold_search: step must be positive");
    if (!(bracket.first < bracket.second))
        throw std::invalid_argument("threshold_search: bracket must be a nonempty interval");

    ThresholdResult res;
    auto note = [&](double M, const StabilityVerdict& v) {
        res.evaluations.push_back({M, v});
        if (v.status == StabilityStatus::Indeterminate) {
            if (!res.indeterminate_band) res.indeterminate_band = {M, M};
            else {
                res.indeterminate_band->first = std::min(res.indeterminate_band->first, M);
                res.indeterminate_band->second = std::max(res.indeterminate_band->second, M);
            }
        }
    };

    double lo = bracket.first, hi = bracket.second;
    StabilityVerdict vlo = evaluate_amplitude(p, lo);
    note(lo, vlo);
    if (vlo.status != StabilityStatus::Stable)
        throw BracketError("threshold_search: low endpoint is not Stable (verdict " +
                           std::string(to_string(vlo.status)) + ")");
    StabilityVerdict vhi = evaluate_amplitude(p, hi);
    note(hi, vhi);
    if (vhi.status == StabilityStatus::Stable)
        throw BracketError("threshold_search: high endpoint is Stable, nothing to bracket");

    double best_unstable = std::numeric_limits<double>::infinity();
    auto record_witness = [&](double M, const StabilityVerdict& v) {
        if (v.status == StabilityStatus::Unstable && M < best_unstable) {
            best_unstable = M;
            res.witness_mode = v.witness_mode;
            res.witness_tau = v.witness_tau;
        }
    };
    record_witness(hi, vhi);

    while (hi - lo > step) {
        const double mid = 0.5 * (lo + hi);
        StabilityVerdict vm = evaluate_amplitude(p, mid);
        note(mid, vm);
        record_witness(mid, vm);
        if (vm.status == StabilityStatus::Stable) lo = mid;
        else hi = mid;
    }
    res.bracket = {lo, hi};
    res.threshold = 0.5 * (lo + hi);
    return res;
}

} // namespace beamlab
