#include "beamlab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace beamlab {

NonlinearitySpec NonlinearitySpec::positive_part(double mu) {
    if (!(mu > 0.0))
        throw std::invalid_argument("NonlinearitySpec: mu must be positive");
    return {NonlinearityKind::PositivePart, mu};
}

double NonlinearitySpec::f(double s) const {
    switch (kind) {
    case NonlinearityKind::PositivePart: return s > 0.0 ? mu * s : 0.0;
    case NonlinearityKind::Cubic: return s * s * s;
    case NonlinearityKind::PositiveCubic: return s > 0.0 ? s * s * s : 0.0;
    }
    return 0.0;
}

double NonlinearitySpec::F(double s) const {
    switch (kind) {
    case NonlinearityKind::PositivePart: return s > 0.0 ? 0.5 * mu * s * s : 0.0;
    case NonlinearityKind::Cubic: return 0.25 * s * s * s * s;
    case NonlinearityKind::PositiveCubic: return s > 0.0 ? 0.25 * s * s * s * s : 0.0;
    }
    return 0.0;
}

int max_mode_count() {
    static const int cap = [] {
        if (const char* env = std::getenv("BEAMLAB_MAX_N")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end && *end == '\0' && v >= 1 && v <= 100000) return static_cast<int>(v);
            throw ConfigError("BEAMLAB_MAX_N must be a positive integer");
        }
        return 64;
    }();
    return cap;
}

double quadruple_sine_integral(int p, int q, int r, int s) {
    if (p < 1 || q < 1 || r < 1 || s < 1)
        throw std::invalid_argument("quadruple_sine_integral: indices must be >= 1");
    std::array<int, 4> m{p, q, r, s};
    std::sort(m.begin(), m.end());
    const int a = m[0], b = m[1], c = m[2], d = m[3];

    if (a == d) return 3.0;          // sin⁴: all four equal
    if (a == b && c == d) return 2.0; // two distinct pairs

    if (b == c) {
        if (a == b || c == d) {
            // three equal, one different: sin³(px)sin(qx) is ±π/8 only at q=3p
            const int pp = (a == b) ? a : d;
            const int qq = (a == b) ? d : a;
            return qq == 3 * pp ? -1.0 : 0.0;
        }
        // middle pair: sin²(bx)sin(ax)sin(dx)
        if (a + d == 2 * b) return 1.0;
        if (d - a == 2 * b) return -1.0;
        return 0.0;
    }
    if (a == b) { // smallest pair repeated, c < d distinct
        if (c + d == 2 * a) return 1.0; // impossible for sorted input, kept for clarity
        if (d - c == 2 * a) return -1.0;
        return 0.0;
    }
    if (c == d) { // largest pair repeated, a < b distinct
        if (a + b == 2 * c) return 1.0;
        if (b - a == 2 * c) return -1.0; // impossible for sorted input
        return 0.0;
    }
    // all distinct, a < b < c < d: of q∓p = s∓r only two combinations can
    // occur once the indices are sorted
    if (b - a == d - c) return 1.0;
    if (a + b == d - c) return -1.0;
    return 0.0;
}

std::uint32_t CubicCouplingTensor::key(int p, int q, int r, int s) {
    std::array<int, 4> m{p, q, r, s};
    std::sort(m.begin(), m.end());
    return static_cast<std::uint32_t>(m[0]) | (static_cast<std::uint32_t>(m[1]) << 8) |
           (static_cast<std::uint32_t>(m[2]) << 16) | (static_cast<std::uint32_t>(m[3]) << 24);
}

double CubicCouplingTensor::value(int p, int q, int r, int s) const {
    auto it = entries.find(key(p, q, r, s));
    return it == entries.end() ? 0.0 : it->second;
}

CubicCouplingTensor build_cubic_tensor(int N) {
    if (N < 1) throw std::invalid_argument("build_cubic_tensor: N must be >= 1");
    if (N > max_mode_count())
        throw ResourceError("build_cubic_tensor: N = " + std::to_string(N) +
                            " exceeds the configured maximum " + std::to_string(max_mode_count()));
    CubicCouplingTensor t;
    t.N = N;
    for (int p = 1; p <= N; ++p)
        for (int q = p; q <= N; ++q)
            for (int r = q; r <= N; ++r)
                for (int s = r; s <= N; ++s) {
                    double v = quadruple_sine_integral(p, q, r, s);
                    if (v != 0.0) t.entries.emplace(CubicCouplingTensor::key(p, q, r, s), v);
                }
    return t;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev initial guess for the i-th root of P_n, refined by Newton
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

NonlinearProjector::NonlinearProjector(const NonlinearitySpec& f, int N, int panels)
    : f_(f), N_(N) {
    if (N < 1) throw std::invalid_argument("NonlinearProjector: N must be >= 1");
    if (N > max_mode_count())
        throw ResourceError("NonlinearProjector: N exceeds the configured maximum");

    if (f.kind == NonlinearityKind::Cubic) {
        CubicCouplingTensor t = build_cubic_tensor(N);
        plan_.resize(N);
        for (int n = 1; n <= N; ++n)
            for (int q = 1; q <= N; ++q)
                for (int r = q; r <= N; ++r)
                    for (int s = r; s <= N; ++s) {
                        double v = t.value(n, q, r, s);
                        if (v == 0.0) continue;
                        // ordered (q,r,s) permutations of the sorted triple
                        double mult = (q == s) ? 1.0 : (q == r || r == s) ? 3.0 : 6.0;
                        plan_[n - 1].push_back({q, r, s, mult * v * 0.25});
                    }
        for (auto& [k, v] : t.entries) {
            int p = k & 0xff, q = (k >> 8) & 0xff, r = (k >> 16) & 0xff, s = (k >> 24) & 0xff;
            // 4!/∏(multiplicities!) ordered arrangements of the sorted quadruple
            int counts[4] = {1, 0, 0, 0}, nc = 0;
            int vals[4] = {p, q, r, s};
            for (int i = 1; i < 4; ++i) {
                if (vals[i] == vals[i - 1]) ++counts[nc];
                else counts[++nc] = 1;
            }
            double fact[5] = {1, 1, 2, 6, 24};
            double mult = 24.0;
            for (int i = 0; i <= nc; ++i) mult /= fact[counts[i]];
            quartic_.push_back({p, q, r, s, mult * v * pi / 32.0});
        }
    } else {
        if (panels <= 0) panels = std::max(64, 8 * N);
        std::vector<double> gx, gw;
        gauss_legendre(8, gx, gw);
        const double h = pi / panels;
        for (int c = 0; c < panels; ++c) {
            double x0 = c * h;
            for (int k = 0; k < 8; ++k) {
                nodes_.push_back(x0 + 0.5 * h * (gx[k] + 1.0));
                weights_.push_back(0.5 * h * gw[k]);
            }
        }
        sin_table_.resize(static_cast<std::size_t>(N) * nodes_.size());
        for (int n = 1; n <= N; ++n)
            for (std::size_t k = 0; k < nodes_.size(); ++k)
                sin_table_[(n - 1) * nodes_.size() + k] = std::sin(n * nodes_[k]);
        scratch_.resize(nodes_.size());
    }
}

void NonlinearProjector::project(const double* u, double* out) const {
    if (f_.kind == NonlinearityKind::Cubic) {
        for (int n = 0; n < N_; ++n) {
            double acc = 0.0;
            for (const CubicTerm& t : plan_[n])
                acc += t.w * u[t.q - 1] * u[t.r - 1] * u[t.s - 1];
            out[n] = acc;
        }
        return;
    }
    const std::size_t m = nodes_.size();
    for (std::size_t k = 0; k < m; ++k) {
        double ux = 0.0;
        for (int n = 0; n < N_; ++n) ux += u[n] * sin_table_[n * m + k];
        scratch_[k] = weights_[k] * f_.f(ux);
    }
    for (int n = 0; n < N_; ++n) {
        double acc = 0.0;
        const double* row = &sin_table_[n * m];
        for (std::size_t k = 0; k < m; ++k) acc += scratch_[k] * row[k];
        out[n] = (2.0 / pi) * acc;
    }
}

ModeVector NonlinearProjector::project(const ModeVector& u) const {
    if (static_cast<int>(u.size()) != N_)
        throw std::invalid_argument("NonlinearProjector::project: size mismatch");
    ModeVector out(N_);
    project(u.data(), out.data());
    return out;
}

double NonlinearProjector::potential_integral(const double* u) const {
    if (f_.kind == NonlinearityKind::Cubic) {
        double acc = 0.0;
        for (const QuarticTerm& t : quartic_)
            acc += t.w * u[t.p - 1] * u[t.q - 1] * u[t.r - 1] * u[t.s - 1];
        return acc;
    }
    const std::size_t m = nodes_.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double ux = 0.0;
        for (int n = 0; n < N_; ++n) ux += u[n] * sin_table_[n * m + k];
        acc += weights_[k] * f_.F(ux);
    }
    return acc;
}

ModeVector project_nonlinearity(const NonlinearitySpec& f, const ModeVector& u) {
    if (u.empty()) throw std::invalid_argument("project_nonlinearity: empty mode vector");
    for (double v : u)
        if (!std::isfinite(v))
            throw std::invalid_argument("project_nonlinearity: non-finite coefficient");
    NonlinearProjector proj(f, static_cast<int>(u.size()));
    return proj.project(u);
}

std::vector<double> evaluate_field(const ModeVector& u, const std::vector<double>& xs) {
    for (double x : xs)
        if (!(x >= 0.0 && x <= pi))
            throw std::invalid_argument("evaluate_field: position outside [0,pi]");
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double acc = 0.0;
        for (std::size_t n = 0; n < u.size(); ++n) acc += u[n] * std::sin((n + 1.0) * xs[i]);
        out[i] = acc;
    }
    return out;
}

std::set<int> influence_set(const std::vector<int>& sources) {
    if (sources.empty() || sources.size() > 3)
        throw std::invalid_argument("influence_set: need one, two, or three source modes");
    for (int q : sources)
        if (q < 1) throw std::invalid_argument("influence_set: indices must be >= 1");
    std::vector<int> m = sources;
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
        throw std::invalid_argument("influence_set: source indices must be distinct");

    std::set<int> out;
    auto add = [&](int n) {
        if (n != 0) out.insert(std::abs(n));
    };
    if (m.size() == 1) {
        add(3 * m[0]);
    } else if (m.size() == 2) {
        const int q = m[0], r = m[1];
        add(2 * r + q);
        add(2 * r - q);
        add(r + 2 * q);
        add(r - 2 * q);
    } else {
        const int q = m[0], r = m[1], s = m[2];
        add(s + r + q);
        add(s + r - q);
        add(s - r + q);
        add(s - r - q);
    }
    for (int q : m) out.erase(q);
    return out;
}

} // namespace beamlab
