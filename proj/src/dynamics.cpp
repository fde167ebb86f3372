#include "beamlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace beamlab {

ModalForcing ModalForcing::single_mode(int j, double alpha, double gamma) {
    if (j < 1) throw std::invalid_argument("ModalForcing: j must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("ModalForcing: alpha must be positive");
    if (gamma == 0.0) throw std::invalid_argument("ModalForcing: gamma must be nonzero");
    ModalForcing g;
    g.present = true;
    g.j = j;
    g.alpha = alpha;
    g.gamma = gamma;
    return g;
}

double ModalForcing::modal_value(int n, double t) const {
    if (!present || n != j) return 0.0;
    return alpha * std::sin(gamma * t);
}

namespace {

// Right-hand side of the first-order system y = (φ, φ̇).
class GalerkinSystem {
public:
    GalerkinSystem(int N, const NonlinearitySpec& f, const ModalForcing& forcing, int panels)
        : N_(N), forcing_(forcing), proj_(f, N, panels), n4_(N), buf_(N) {
        for (int n = 1; n <= N; ++n) n4_[n - 1] = double(n) * n * n * n;
    }

    int dim() const { return 2 * N_; }

    void operator()(double t, const double* y, double* dy) const {
        proj_.project(y, buf_.data());
        for (int n = 0; n < N_; ++n) {
            dy[n] = y[N_ + n];
            dy[N_ + n] = -n4_[n] * y[n] - buf_[n];
        }
        if (forcing_.present && forcing_.j <= N_)
            dy[N_ + forcing_.j - 1] += forcing_.alpha * std::sin(forcing_.gamma * t);
    }

    double total_energy(const double* y) const {
        double quad = 0.0;
        for (int n = 0; n < N_; ++n)
            quad += y[N_ + n] * y[N_ + n] + n4_[n] * y[n] * y[n];
        return 0.25 * pi * quad + proj_.potential_integral(y);
    }

private:
    int N_;
    ModalForcing forcing_;
    NonlinearProjector proj_;
    std::vector<double> n4_;
    mutable std::vector<double> buf_;
};

// Dormand–Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double bh1 = 5179.0 / 57600, bh3 = 7571.0 / 16695, bh4 = 393.0 / 640,
                 bh5 = -92097.0 / 339200, bh6 = 187.0 / 2100, bh7 = 1.0 / 40;

// Cubic Hermite value on an accepted step (y0,f0) → (y1,f1), θ ∈ [0,1].
inline double hermite(double y0, double f0, double y1, double f1, double th, double h) {
    const double t2 = th * th, t3 = t2 * th;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + th) * h * f0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1;
}

} // namespace

ModeVector assemble_rhs(const ModalState& state, const NonlinearitySpec& f,
                        const ModalForcing& forcing) {
    const int N = state.modes();
    if (N < 1 || state.phidot.size() != state.phi.size())
        throw std::invalid_argument("assemble_rhs: phi and phidot must share a positive length");
    NonlinearProjector proj(f, N);
    ModeVector out(N);
    proj.project(state.phi.data(), out.data());
    for (int n = 1; n <= N; ++n) {
        double n4 = double(n) * n * n * n;
        out[n - 1] = -n4 * state.phi[n - 1] - out[n - 1] + forcing.modal_value(n, state.t);
    }
    return out;
}

double energy(const ModalState& state, const NonlinearitySpec& f) {
    const int N = state.modes();
    if (N < 1 || state.phidot.size() != state.phi.size())
        throw std::invalid_argument("energy: phi and phidot must share a positive length");
    NonlinearProjector proj(f, N);
    double quad = 0.0;
    for (int n = 1; n <= N; ++n) {
        double n4 = double(n) * n * n * n;
        quad += state.phidot[n - 1] * state.phidot[n - 1] + n4 * state.phi[n - 1] * state.phi[n - 1];
    }
    return 0.25 * pi * quad + proj.potential_integral(state.phi.data());
}

double explicit_first_mode_solution(double t, double mu) {
    if (mu != 3.0)
        throw std::invalid_argument("explicit_first_mode_solution: closed form requires mu = 3");
    if (t < 0.0) throw std::invalid_argument("explicit_first_mode_solution: t must be >= 0");
    const double period = 1.5 * pi;
    double tau = std::fmod(t, period);
    if (tau < 0.5 * pi) return 0.5 * std::sin(2.0 * tau);
    return std::sin(0.5 * pi - tau);
}

double remainder_bound(double E0, int N) {
    if (E0 < 0.0) throw std::invalid_argument("remainder_bound: E0 must be >= 0");
    if (N < 1) throw std::invalid_argument("remainder_bound: N must be >= 1");
    double np1 = N + 1.0;
    return 4.0 * E0 / (pi * np1 * np1 * np1 * np1);
}

Trajectory integrate(const ModalState& initial, const NonlinearitySpec& f,
                     const ModalForcing& forcing, double T, const SolverOptions& opt) {
    const int N = initial.modes();
    if (N < 1 || initial.phidot.size() != initial.phi.size())
        throw std::invalid_argument("integrate: phi and phidot must share a positive length");
    if (!(T > 0.0)) throw std::invalid_argument("integrate: horizon must be positive");
    if (!(opt.atol > 0.0) || !(opt.rtol > 0.0) || !(opt.dt_sample > 0.0))
        throw std::invalid_argument("integrate: tolerances and dt_sample must be positive");
    for (double v : initial.phi)
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite initial data");
    for (double v : initial.phidot)
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite initial data");

    GalerkinSystem sys(N, f, forcing, opt.quad_panels);
    const int dim = sys.dim();

    Trajectory traj;
    traj.N = N;
    traj.T = T;
    traj.f = f;
    traj.forcing = forcing;
    traj.u0 = initial.phi;
    traj.v0 = initial.phidot;
    traj.options = opt;

    std::vector<double> y(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim),
        ytmp(dim), y1(dim);
    std::copy(initial.phi.begin(), initial.phi.end(), y.begin());
    std::copy(initial.phidot.begin(), initial.phidot.end(), y.begin() + N);

    auto push_sample = [&](double ts, const double* ys, bool grid) {
        if (traj.t.size() >= opt.max_samples)
            throw ResourceError("integrate: sample count exceeds the configured cap");
        traj.t.push_back(ts);
        traj.phi.insert(traj.phi.end(), ys, ys + N);
        traj.phidot.insert(traj.phidot.end(), ys + N, ys + dim);
        traj.energy.push_back(sys.total_energy(ys));
        traj.on_grid.push_back(grid ? 1 : 0);
    };

    double t = 0.0;
    push_sample(0.0, y.data(), true);
    long next_grid = 1; // next uniform sample index to emit

    sys(t, y.data(), k1.data());

    // initial step size: curvature probe in the scaled norm
    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (int i = 0; i < dim; ++i) {
            double sc = opt.atol + opt.rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(k1[i]) / sc);
        }
        double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, T);
        for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h0 * k1[i];
        sys(t + h0, ytmp.data(), k2.data());
        double d2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            double sc = opt.atol + opt.rtol * std::abs(y[i]);
            d2 = std::max(d2, std::abs(k2[i] - k1[i]) / sc);
        }
        d2 /= h0;
        double dm = std::max(d1, d2);
        double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h0 * 1e-3);
        h = std::min({100.0 * h0, h1, T});
    }

    const double eps = std::numeric_limits<double>::epsilon();
    double errold = 1e-4;
    bool rejected = false;

    while (t < T) {
        if (h < 16.0 * eps * std::max(std::abs(t), 1.0))
            throw SolverError("integrate: step size underflow at t = " + std::to_string(t), t);
        bool last = false;
        if (t + h >= T) {
            h = T - t;
            last = true;
        }

        for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        sys(t + c2 * h, ytmp.data(), k2.data());
        for (int i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        sys(t + c3 * h, ytmp.data(), k3.data());
        for (int i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        sys(t + c4 * h, ytmp.data(), k4.data());
        for (int i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        sys(t + c5 * h, ytmp.data(), k5.data());
        for (int i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        sys(t + h, ytmp.data(), k6.data());
        for (int i = 0; i < dim; ++i)
            y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        sys(t + h, y1.data(), k7.data()); // FSAL stage

        double err = 0.0;
        for (int i = 0; i < dim; ++i) {
            double e = h * ((b1 - bh1) * k1[i] + (b3 - bh3) * k3[i] + (b4 - bh4) * k4[i] +
                            (b5 - bh5) * k5[i] + (b6 - bh6) * k6[i] - bh7 * k7[i]);
            double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / dim);

        if (err <= 1.0) {
            // dense output strictly inside the step, then the endpoint itself
            double t1 = last ? T : t + h;
            while (next_grid * opt.dt_sample < t1 - 1e-12 * std::max(1.0, t1)) {
                double tg = next_grid * opt.dt_sample;
                double th = (tg - t) / h;
                for (int i = 0; i < dim; ++i)
                    ytmp[i] = hermite(y[i], k1[i], y1[i], k7[i], th, h);
                push_sample(tg, ytmp.data(), true);
                ++next_grid;
            }
            bool on_grid = std::abs(next_grid * opt.dt_sample - t1) <= 1e-12 * std::max(1.0, t1);
            if (on_grid) ++next_grid;
            push_sample(t1, y1.data(), on_grid);

            t = t1;
            std::swap(y, y1);
            std::swap(k1, k7);
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(errold, 0.04);
            fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
            errold = std::max(err, 1e-4);
            rejected = false;
            h *= fac;
        } else {
            rejected = true;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
    return traj;
}

namespace {
void print_value(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}
} // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    std::string line = "t";
    for (int n = 1; n <= traj.N; ++n) line += ",phi_" + std::to_string(n);
    for (int n = 1; n <= traj.N; ++n) line += ",dphi_" + std::to_string(n);
    line += ",E\n";
    os << line;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        line.clear();
        print_value(line, traj.t[i]);
        for (int n = 0; n < traj.N; ++n) {
            line += ',';
            print_value(line, traj.phi[i * traj.N + n]);
        }
        for (int n = 0; n < traj.N; ++n) {
            line += ',';
            print_value(line, traj.phidot[i * traj.N + n]);
        }
        line += ',';
        print_value(line, traj.energy[i]);
        line += '\n';
        os << line;
    }
}

void write_energy_csv(const Trajectory& traj, std::ostream& os) {
    os << "t,E\n";
    std::string line;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        line.clear();
        print_value(line, traj.t[i]);
        line += ',';
        print_value(line, traj.energy[i]);
        line += '\n';
        os << line;
    }
}

} // namespace beamlab
