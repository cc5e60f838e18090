#include "drchain/time_simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "drchain/ddae_stability.hpp"

namespace drchain {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cubic Lagrange interpolation of the delayed coordinate on the uniform
// history grid. Queries always trail the integration front by at least
// tau >= 20 dt, so the four-point window is available.
class HistoryReader {
public:
    HistoryReader(const Eigen::MatrixXd& states, int column, double dt,
                  double initial_value)
        : states_(states), column_(column), dt_(dt), initial_(initial_value) {}

    double operator()(double t_query, int filled) const {
        if (t_query <= 0.0) return initial_;  // constant pre-start history
        int j = static_cast<int>(std::floor(t_query / dt_));
        int j0 = std::clamp(j - 1, 0, std::max(0, filled - 3));
        double value = 0.0;
        for (int a = 0; a < 4; ++a) {
            const int idx = j0 + a;
            double basis = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                basis *= (t_query - (j0 + b) * dt_) / (dt_ * (a - b));
            }
            value += states_(idx, column_) * basis;
        }
        return value;
    }

private:
    const Eigen::MatrixXd& states_;
    int column_;
    double dt_;
    double initial_;
};

}  // namespace

Trajectory simulate(const ChainModel& model, const AbsorberModel& absorber,
                    const DrFeedback& feedback, const SimulationConfig& config) {
    model.validate();
    absorber.validate();
    config.excitation.validate();
    if (!(config.t_end > 0.0)) {
        throw ValidationError("simulate: t_end must be positive");
    }
    if (config.switch_time < 0.0 || config.switch_time > config.t_end) {
        throw ValidationError("simulate: switch_time must lie in [0, t_end]");
    }

    const int d = model.d;
    const int n = 2 * d + 2;
    const int ixa = 2 * d;
    const double omega = config.excitation.omega;
    const double period = 2.0 * kPi / omega;
    const double tau = feedback.delay;
    const bool active_phase = config.switch_time < config.t_end && feedback.gain != 0.0;

    double dt = config.dt;
    if (dt <= 0.0) {
        dt = period / 200.0;
        if (active_phase && tau > 0.0) dt = std::min(dt, tau / 40.0);
    }
    if (active_phase && tau > 0.0 && dt > tau / 20.0) {
        std::ostringstream msg;
        msg << "simulate: dt=" << dt << " exceeds tau/20=" << tau / 20.0
            << "; the delay buffer cannot be resolved";
        throw ValidationError(msg.str());
    }

    const RetardedSystem rs = reduce_to_retarded(build_ddae(model, absorber, feedback));
    const Eigen::VectorXd a1_col = rs.A1.col(ixa);  // only delayed column in the model

    Eigen::VectorXd z0 = config.initial_state;
    if (z0.size() == 0) z0 = Eigen::VectorXd::Zero(n);
    if (z0.size() != n) {
        std::ostringstream msg;
        msg << "simulate: initial state must have " << n << " entries, got "
            << z0.size();
        throw ValidationError(msg.str());
    }

    const int steps = static_cast<int>(std::ceil(config.t_end / dt - 1e-9));
    Eigen::MatrixXd Z(steps + 1, n);
    Z.row(0) = z0.transpose();
    HistoryReader delayed_xa(Z, ixa, dt, z0(ixa));

    const double switch_time = config.switch_time;
    auto rhs = [&](double t, const Eigen::VectorXd& z, int filled) -> Eigen::VectorXd {
        Eigen::VectorXd dz = rs.A0 * z + rs.B * (config.excitation.amplitude * std::cos(omega * t));
        if (active_phase && t >= switch_time) {
            if (tau > 0.0) {
                dz += a1_col * delayed_xa(t - tau, filled);
            } else {
                dz += rs.A1 * z;  // delay-free gain feedback
            }
        }
        return dz;
    };

    Eigen::VectorXd z = z0;
    for (int i = 0; i < steps; ++i) {
        const double t = i * dt;
        const Eigen::VectorXd k1 = rhs(t, z, i);
        const Eigen::VectorXd k2 = rhs(t + 0.5 * dt, z + 0.5 * dt * k1, i);
        const Eigen::VectorXd k3 = rhs(t + 0.5 * dt, z + 0.5 * dt * k2, i);
        const Eigen::VectorXd k4 = rhs(t + dt, z + dt * k3, i);
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite()) {
            std::ostringstream msg;
            msg << "simulate: state became non-finite at t=" << t + dt << " s";
            throw NumericalError(msg.str());
        }
        Z.row(i + 1) = z.transpose();
    }

    Trajectory traj;
    traj.dt = dt;
    traj.omega = omega;
    traj.switch_time = switch_time;
    traj.time.resize(static_cast<std::size_t>(steps) + 1);
    traj.x = Z.leftCols(d);
    traj.v = Z.middleCols(d, d);
    traj.x_a = Z.col(ixa);
    traj.v_a = Z.col(ixa + 1);
    traj.f_a.resize(steps + 1);
    traj.u.resize(steps + 1);
    traj.link_energy.resize(steps + 1, d + 1);
    traj.absorber_energy.resize(steps + 1);
    traj.power.resize(steps + 1);

    for (int i = 0; i <= steps; ++i) {
        const double t = i * dt;
        traj.time[static_cast<std::size_t>(i)] = t;
        const double xp = traj.x(i, model.p - 1);
        const double vp = traj.v(i, model.p - 1);
        double u_i = 0.0;
        if (active_phase && t >= switch_time) {
            u_i = feedback.gain *
                  (tau > 0.0 ? delayed_xa(t - tau, steps) : traj.x_a(i));
        }
        traj.u(i) = u_i;
        traj.f_a(i) = u_i + absorber.stiffness * (xp - traj.x_a(i)) +
                      absorber.damping * (vp - traj.v_a(i));
        for (int link = 1; link <= d + 1; ++link) {
            const double xl = link <= d ? traj.x(i, link - 1) : 0.0;
            const double xlm = link >= 2 ? traj.x(i, link - 2) : 0.0;
            const double dx = xl - xlm;
            traj.link_energy(i, link - 1) =
                0.5 * model.stiffnesses[static_cast<std::size_t>(link) - 1] * dx * dx;
        }
        const double dxa = traj.x_a(i) - xp;
        traj.absorber_energy(i) = 0.5 * absorber.stiffness * dxa * dxa;
        traj.power(i) = u_i * (vp - traj.v_a(i));
    }
    return traj;
}

SteadyMetrics steady_metrics(const Trajectory& traj, const Eigen::VectorXd& signal,
                             double t0, double t1) {
    if (signal.size() != static_cast<Eigen::Index>(traj.time.size())) {
        throw ValidationError("steady_metrics: signal length does not match the trajectory");
    }
    if (!(t0 < t1) || t0 < traj.time.front() || t1 > traj.time.back() + 1e-12) {
        throw ValidationError("steady_metrics: window must lie inside the trajectory");
    }
    const double min_span = 3.0 * 2.0 * kPi / traj.omega;
    if (t1 - t0 < min_span - 1e-9) {
        std::ostringstream msg;
        msg << "steady_metrics: window of " << t1 - t0
            << " s is shorter than three periods (" << min_span << " s)";
        throw ValidationError(msg.str());
    }
    const int i0 = static_cast<int>(std::ceil((t0 - 1e-12) / traj.dt));
    const int i1 = static_cast<int>(std::floor((t1 + 1e-12) / traj.dt));
    SteadyMetrics m;
    double lo = signal(i0), hi = signal(i0), sum = 0.0;
    for (int i = i0; i <= i1; ++i) {
        lo = std::min(lo, signal(i));
        hi = std::max(hi, signal(i));
        sum += signal(i);
    }
    m.amplitude = 0.5 * (hi - lo);
    m.mean = sum / (i1 - i0 + 1);
    m.max = hi;
    return m;
}

}  // namespace drchain
