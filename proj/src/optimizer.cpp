#include "drchain/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "drchain/phasor_analysis.hpp"

namespace drchain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ParamRef {
    enum class Kind { kChainMass, kChainStiffness, kChainDamping, kAbsMass, kAbsDamping, kAbsStiffness };
    Kind kind;
    int index = 0;  // 1-based chain index, unused for absorber parameters
};

ParamRef parse_param_id(const std::string& id, int d) {
    if (id == "m_a") return {ParamRef::Kind::kAbsMass, 0};
    if (id == "c_a") return {ParamRef::Kind::kAbsDamping, 0};
    if (id == "k_a") return {ParamRef::Kind::kAbsStiffness, 0};
    if (id.size() >= 2 && (id[0] == 'm' || id[0] == 'c' || id[0] == 'k')) {
        int index = 0;
        try {
            std::size_t used = 0;
            index = std::stoi(id.substr(1), &used);
            if (used != id.size() - 1) index = 0;
        } catch (const std::exception&) {
            index = 0;
        }
        const int limit = id[0] == 'm' ? d : d + 1;
        if (index >= 1 && index <= limit) {
            switch (id[0]) {
                case 'm': return {ParamRef::Kind::kChainMass, index};
                case 'c': return {ParamRef::Kind::kChainDamping, index};
                default: return {ParamRef::Kind::kChainStiffness, index};
            }
        }
    }
    throw ValidationError("design problem: unknown parameter id '" + id + "'");
}

double read_param(const ChainModel& chain, const AbsorberModel& absorber,
                  const ParamRef& ref) {
    switch (ref.kind) {
        case ParamRef::Kind::kChainMass:
            return chain.masses[static_cast<std::size_t>(ref.index) - 1];
        case ParamRef::Kind::kChainStiffness:
            return chain.stiffnesses[static_cast<std::size_t>(ref.index) - 1];
        case ParamRef::Kind::kChainDamping:
            return chain.dampings[static_cast<std::size_t>(ref.index) - 1];
        case ParamRef::Kind::kAbsMass:
            return absorber.mass;
        case ParamRef::Kind::kAbsDamping:
            return absorber.damping;
        default:
            return absorber.stiffness;
    }
}

void write_param(ChainModel& chain, AbsorberModel& absorber, const ParamRef& ref,
                 double value) {
    switch (ref.kind) {
        case ParamRef::Kind::kChainMass:
            chain.masses[static_cast<std::size_t>(ref.index) - 1] = value;
            break;
        case ParamRef::Kind::kChainStiffness:
            chain.stiffnesses[static_cast<std::size_t>(ref.index) - 1] = value;
            break;
        case ParamRef::Kind::kChainDamping:
            chain.dampings[static_cast<std::size_t>(ref.index) - 1] = value;
            break;
        case ParamRef::Kind::kAbsMass:
            absorber.mass = value;
            break;
        case ParamRef::Kind::kAbsDamping:
            absorber.damping = value;
            break;
        default:
            absorber.stiffness = value;
    }
}

std::vector<ParamRef> parameter_refs(const DesignProblem& problem) {
    std::vector<ParamRef> refs;
    refs.reserve(problem.parameters.size());
    for (const auto& p : problem.parameters) {
        refs.push_back(parse_param_id(p.id, problem.chain.d));
    }
    return refs;
}

// Everything the solver needs at one theta. The spectrum is only computed
// when `with_alpha` is set; the tuning and phasor quantities are cheap.
struct Evaluation {
    bool tunable = false;
    double j = kInf;
    double w_max = kInf;
    double p_max = kInf;
    double wa_max = kInf;
    double alpha = kInf;
    DrFeedback feedback;
};

Evaluation evaluate_point(const DesignProblem& problem, const Eigen::VectorXd& theta,
                          bool with_alpha, const SpectrumOptions& spectrum_options) {
    Evaluation ev;
    ChainModel chain = problem.chain;
    AbsorberModel absorber = problem.absorber;
    apply_theta(problem, theta, chain, absorber);
    try {
        const TuningSet tuning = tune(chain, absorber, problem.excitation);
        ev.feedback = tuning.selected;
        const TargetStageState state = target_stage_state(chain, absorber, problem.excitation);
        const EnergyReport links = link_energy_maxima(chain, state.x_R, state.x_V);
        ev.w_max = 0.0;
        for (const auto& link : links.links) ev.w_max = std::max(ev.w_max, link.max);
        ev.wa_max = absorber_energy_max(chain, absorber, state.f_a, problem.excitation).max;
        const Phasor x_p = state.x_R(chain.p - 1);
        ev.p_max = actuation_power(state.u, x_p, state.x_a, problem.excitation.omega).max;
        ev.j = problem.gamma * ev.w_max / problem.w_nom +
               (1.0 - problem.gamma) * ev.p_max / problem.p_nom;
        ev.tunable = true;
        if (with_alpha) {
            const DdaeSystem sys = build_ddae(chain, absorber, ev.feedback);
            ev.alpha = spectral_abscissa(sys, spectrum_options);
        }
    } catch (const NumericalError&) {
        ev.tunable = false;  // untunable or unresolvable point: infeasible marker
    } catch (const ValidationError&) {
        ev.tunable = false;  // e.g. a perturbed parameter crossed zero
    }
    return ev;
}

Eigen::VectorXd linear_residuals(const DesignProblem& problem,
                                 const Eigen::VectorXd& theta) {
    const int n = static_cast<int>(problem.parameters.size());
    const int extra = static_cast<int>(problem.linear_constraints.size());
    Eigen::VectorXd res(2 * n + extra);
    for (int i = 0; i < n; ++i) {
        res(i) = theta(i) - problem.parameters[static_cast<std::size_t>(i)].upper;
        res(n + i) = problem.parameters[static_cast<std::size_t>(i)].lower - theta(i);
    }
    for (int c = 0; c < extra; ++c) {
        const auto& spec = problem.linear_constraints[static_cast<std::size_t>(c)];
        double value = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto it = spec.coefficients.find(problem.parameters[static_cast<std::size_t>(i)].id);
            if (it != spec.coefficients.end()) value += it->second * theta(i);
        }
        res(2 * n + c) = value - spec.bound;
    }
    return res;
}

// Total violation used by the penalty: nonlinear slacks plus the extra
// linear constraints. Box bounds are kept by projection.
double violation_of(const DesignProblem& problem, const Eigen::VectorXd& theta,
                    const Evaluation& ev) {
    double v = 0.0;
    v += std::max(0.0, ev.alpha - problem.xi_alpha);
    v += std::max(0.0, ev.wa_max - problem.xi_a);
    const int n = static_cast<int>(problem.parameters.size());
    const Eigen::VectorXd lin = linear_residuals(problem, theta);
    for (int c = 2 * n; c < lin.size(); ++c) v += std::max(0.0, lin(c));
    return v;
}

struct PenaltyValue {
    double phi = kInf;
    double j = kInf;
    double violation = kInf;
    bool tunable = false;
};

PenaltyValue penalty(const DesignProblem& problem, const Eigen::VectorXd& theta,
                     double mu, const SpectrumOptions& inner) {
    PenaltyValue out;
    const Evaluation ev = evaluate_point(problem, theta, /*with_alpha=*/true, inner);
    if (!ev.tunable) return out;
    out.tunable = true;
    out.j = ev.j;
    out.violation = violation_of(problem, theta, ev);
    out.phi = mu * ev.j + out.violation;
    return out;
}

struct LocalRun {
    Eigen::VectorXd theta;
    int iterations = 0;
    bool tunable = true;
};

// Projected quasi-Newton descent on the exact penalty. The steering rule
// halves mu whenever the iterate stays infeasible without progress on the
// violation, so feasibility eventually dominates the merit function.
LocalRun minimize_penalty(const DesignProblem& problem, const Eigen::VectorXd& start,
                          const SolverOptions& opt) {
    const int n = static_cast<int>(start.size());
    Eigen::VectorXd lb(n), ub(n);
    for (int i = 0; i < n; ++i) {
        lb(i) = problem.parameters[static_cast<std::size_t>(i)].lower;
        ub(i) = problem.parameters[static_cast<std::size_t>(i)].upper;
    }
    auto project = [&](Eigen::VectorXd t) {
        for (int i = 0; i < n; ++i) t(i) = std::clamp(t(i), lb(i), ub(i));
        return t;
    };

    LocalRun run;
    run.theta = project(start);
    double mu = opt.mu0;

    PenaltyValue current = penalty(problem, run.theta, mu, opt.inner_spectrum);
    if (!current.tunable) {
        run.tunable = false;
        return run;
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);  // inverse-Hessian estimate
    auto gradient = [&](const Eigen::VectorXd& theta, const PenaltyValue& at,
                        Eigen::VectorXd& out) -> bool {
        out.resize(n);
        for (int i = 0; i < n; ++i) {
            const double h = opt.fd_step * (1.0 + std::abs(theta(i)));
            Eigen::VectorXd probe = theta;
            probe(i) += h;
            const PenaltyValue forward = penalty(problem, probe, mu, opt.inner_spectrum);
            if (forward.tunable) {
                out(i) = (forward.phi - at.phi) / h;
            } else {
                probe(i) = theta(i) - h;  // one-sided fallback at a bad edge
                const PenaltyValue backward = penalty(problem, probe, mu, opt.inner_spectrum);
                if (!backward.tunable) return false;
                out(i) = (at.phi - backward.phi) / h;
            }
        }
        return true;
    };

    Eigen::VectorXd grad(n), grad_new(n);
    if (!gradient(run.theta, current, grad)) {
        run.tunable = false;
        return run;
    }

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        run.iterations = iter + 1;
        if (grad.lpNorm<Eigen::Infinity>() <= opt.opt_tol * (1.0 + std::abs(current.phi))) {
            break;
        }
        Eigen::VectorXd dir = -(H * grad);
        if (!dir.allFinite() || dir.dot(grad) >= 0.0) {
            H.setIdentity();
            dir = -grad;
        }

        // Backtracking line search with projection onto the box.
        double step = 1.0;
        Eigen::VectorXd theta_new;
        PenaltyValue next;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            theta_new = project(run.theta + step * dir);
            next = penalty(problem, theta_new, mu, opt.inner_spectrum);
            if (next.tunable &&
                next.phi <= current.phi - 1e-4 * step * std::abs(grad.dot(dir))) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // Stationary for this mu. If still infeasible, steer harder
            // toward feasibility and continue; otherwise stop.
            if (current.violation > opt.feas_tol && mu > 1e-4) {
                mu *= 0.5;
                current = penalty(problem, run.theta, mu, opt.inner_spectrum);
                H.setIdentity();
                if (!gradient(run.theta, current, grad)) break;
                continue;
            }
            break;
        }

        const Eigen::VectorXd s = theta_new - run.theta;
        const bool tiny_step = s.norm() <= opt.step_tol * (1.0 + run.theta.norm());

        // Steering: no violation progress while infeasible -> favor feasibility.
        bool mu_changed = false;
        if (next.violation > opt.feas_tol &&
            next.violation >= current.violation - 1e-12 && mu > 1e-4) {
            mu *= 0.5;
            mu_changed = true;
            next = penalty(problem, theta_new, mu, opt.inner_spectrum);
        }

        run.theta = theta_new;
        current = next;
        if (tiny_step) break;
        if (!gradient(run.theta, current, grad_new)) break;
        if (mu_changed) {
            H.setIdentity();
        } else {
            const Eigen::VectorXd y = grad_new - grad;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
                const Eigen::MatrixXd V = I - (s * y.transpose()) / sy;
                H = V * H * V.transpose() + (s * s.transpose()) / sy;
            }
        }
        grad = grad_new;
    }
    return run;
}

}  // namespace

void DesignProblem::validate() const {
    chain.validate();
    absorber.validate();
    excitation.validate();
    if (parameters.empty()) {
        throw ValidationError("design problem: no free parameters");
    }
    for (const auto& p : parameters) {
        parse_param_id(p.id, chain.d);
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower <= p.upper)) {
            throw ValidationError("design problem: bounds of '" + p.id +
                                  "' must be finite and ordered");
        }
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("design problem: gamma must lie in [0, 1]");
    }
    if (w_nom < 0.0 || p_nom < 0.0) {
        throw ValidationError("design problem: w_nom and p_nom must be positive (or 0 = auto)");
    }
    if (!(xi_alpha < 0.0)) {
        throw ValidationError("design problem: xi_alpha must be negative");
    }
    if (!(xi_a > 0.0)) {
        throw ValidationError("design problem: xi_a must be positive");
    }
}

Eigen::VectorXd nominal_theta(const DesignProblem& problem) {
    const auto refs = parameter_refs(problem);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(refs.size()));
    for (std::size_t i = 0; i < refs.size(); ++i) {
        theta(static_cast<Eigen::Index>(i)) =
            read_param(problem.chain, problem.absorber, refs[i]);
    }
    return theta;
}

void apply_theta(const DesignProblem& problem, const Eigen::VectorXd& theta,
                 ChainModel& chain, AbsorberModel& absorber) {
    const auto refs = parameter_refs(problem);
    if (theta.size() != static_cast<Eigen::Index>(refs.size())) {
        throw ValidationError("apply_theta: theta size does not match the parameter list");
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
        write_param(chain, absorber, refs[i], theta(static_cast<Eigen::Index>(i)));
    }
}

DesignProblem resolve_normalization(const DesignProblem& problem) {
    problem.validate();
    DesignProblem resolved = problem;
    if (resolved.w_nom > 0.0 && resolved.p_nom > 0.0) return resolved;
    resolved.w_nom = 1.0;
    resolved.p_nom = 1.0;
    const Evaluation nominal = evaluate_point(resolved, nominal_theta(resolved),
                                              /*with_alpha=*/false, resolved.spectrum_options);
    if (!nominal.tunable) {
        throw NumericalError("design problem: the nominal point is not tunable; "
                             "specify w_nom and p_nom explicitly");
    }
    if (problem.w_nom <= 0.0) resolved.w_nom = nominal.w_max;
    if (problem.p_nom <= 0.0) resolved.p_nom = nominal.p_max;
    if (!(resolved.w_nom > 0.0) || !(resolved.p_nom > 0.0)) {
        throw NumericalError("design problem: nominal normalization values are zero");
    }
    return resolved;
}

ObjectiveValue objective(const DesignProblem& problem, const Eigen::VectorXd& theta) {
    const DesignProblem resolved = resolve_normalization(problem);
    const Evaluation ev = evaluate_point(resolved, theta, /*with_alpha=*/false,
                                         resolved.spectrum_options);
    ObjectiveValue out;
    out.tunable = ev.tunable;
    out.j = ev.j;
    out.w_max = ev.w_max;
    out.p_max = ev.p_max;
    return out;
}

ConstraintValues constraints(const DesignProblem& problem, const Eigen::VectorXd& theta) {
    const DesignProblem resolved = resolve_normalization(problem);
    const Evaluation ev = evaluate_point(resolved, theta, /*with_alpha=*/true,
                                         resolved.spectrum_options);
    if (!ev.tunable) {
        throw NumericalError("constraints: the point is not tunable");
    }
    ConstraintValues out;
    out.linear = linear_residuals(resolved, theta);
    out.alpha = ev.alpha;
    out.wa_max = ev.wa_max;
    out.alpha_slack = ev.alpha - resolved.xi_alpha;
    out.wa_slack = ev.wa_max - resolved.xi_a;
    return out;
}

DesignResult solve(const DesignProblem& problem, int starts, std::uint64_t seed,
                   const SolverOptions& options) {
    if (starts < 1) {
        throw ValidationError("solve: at least one start is required");
    }
    const DesignProblem resolved = resolve_normalization(problem);
    const int n = static_cast<int>(resolved.parameters.size());

    // Starting points come from one sequential stream so the thread count
    // never changes the result.
    std::vector<Eigen::VectorXd> start_points;
    if (!options.explicit_starts.empty()) {
        start_points = options.explicit_starts;
        starts = static_cast<int>(start_points.size());
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        start_points.resize(static_cast<std::size_t>(starts));
        for (int sidx = 0; sidx < starts; ++sidx) {
            Eigen::VectorXd theta(n);
            for (int i = 0; i < n; ++i) {
                const auto& p = resolved.parameters[static_cast<std::size_t>(i)];
                theta(i) = p.lower + unit(rng) * (p.upper - p.lower);
            }
            start_points[static_cast<std::size_t>(sidx)] = theta;
        }
    }

    std::vector<StartLog> logs(static_cast<std::size_t>(starts));
    std::atomic<int> cursor{0};
    const int thread_count =
        std::max(1, std::min(starts, options.threads > 0
                                         ? options.threads
                                         : static_cast<int>(std::thread::hardware_concurrency())));
    auto worker = [&]() {
        for (int idx = cursor.fetch_add(1); idx < starts; idx = cursor.fetch_add(1)) {
            const LocalRun run =
                minimize_penalty(resolved, start_points[static_cast<std::size_t>(idx)], options);
            StartLog log;
            log.start = idx;
            log.iterations = run.iterations;
            log.tunable = run.tunable;
            log.theta = run.theta;
            if (run.tunable) {
                const Evaluation ev = evaluate_point(resolved, run.theta, true,
                                                     options.inner_spectrum);
                log.tunable = ev.tunable;
                if (ev.tunable) {
                    log.objective = ev.j;
                    log.violation = violation_of(resolved, run.theta, ev);
                    log.feasible = log.violation <= options.feas_tol;
                }
            }
            logs[static_cast<std::size_t>(idx)] = std::move(log);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Deterministic merge: walk the feasible finishes in ascending objective
    // order and accept the first that stays feasible under the full-fidelity
    // spectrum; the cheap inner settings never certify the final answer.
    std::vector<int> order;
    for (int idx = 0; idx < starts; ++idx) {
        if (logs[static_cast<std::size_t>(idx)].feasible) order.push_back(idx);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& la = logs[static_cast<std::size_t>(a)];
        const auto& lb = logs[static_cast<std::size_t>(b)];
        if (la.objective != lb.objective) return la.objective < lb.objective;
        return a < b;
    });

    DesignResult result;
    result.starts = logs;
    int best = -1;
    Evaluation best_eval;
    for (int idx : order) {
        const Evaluation ev = evaluate_point(resolved, logs[static_cast<std::size_t>(idx)].theta,
                                             true, resolved.spectrum_options);
        if (!ev.tunable) continue;
        const double v = violation_of(resolved, logs[static_cast<std::size_t>(idx)].theta, ev);
        if (v <= options.feas_tol) {
            best = idx;
            best_eval = ev;
            break;
        }
    }
    result.feasible = best >= 0;
    if (best < 0) {
        // No certified feasible start: report the least-violating tunable point.
        double least = kInf;
        for (int idx = 0; idx < starts; ++idx) {
            const auto& log = logs[static_cast<std::size_t>(idx)];
            if (log.tunable && log.violation < least) {
                least = log.violation;
                best = idx;
            }
        }
        if (best < 0) {
            throw NumericalError("solve: no start produced a tunable point");
        }
        best_eval = evaluate_point(resolved, logs[static_cast<std::size_t>(best)].theta,
                                   true, resolved.spectrum_options);
        if (!best_eval.tunable) {
            throw NumericalError("solve: winner re-evaluation failed");
        }
    }

    const auto& winner = logs[static_cast<std::size_t>(best)];
    result.start_index = best;
    result.theta = winner.theta;
    result.objective = best_eval.j;
    result.w_max = best_eval.w_max;
    result.p_max = best_eval.p_max;
    result.feedback = best_eval.feedback;
    result.alpha = best_eval.alpha;
    result.wa_max = best_eval.wa_max;
    result.linear_residuals = linear_residuals(resolved, result.theta);
    result.alpha_slack = best_eval.alpha - resolved.xi_alpha;
    result.wa_slack = best_eval.wa_max - resolved.xi_a;
    return result;
}

GridResult grid_search(const DesignProblem& problem, const SolverOptions& options) {
    const DesignProblem resolved = resolve_normalization(problem);
    const int n = static_cast<int>(resolved.parameters.size());
    if (n > 3) {
        throw ValidationError("grid_search: dense enumeration supports at most three parameters");
    }
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& p = resolved.parameters[static_cast<std::size_t>(i)];
        if (!(p.step > 0.0)) {
            throw ValidationError("grid_search: parameter '" + p.id +
                                  "' needs a positive step");
        }
        for (double v = p.lower; v <= p.upper + 1e-9 * p.step; v += p.step) {
            axes[static_cast<std::size_t>(i)].push_back(std::min(v, p.upper));
        }
    }
    std::size_t total = 1;
    for (const auto& axis : axes) total *= axis.size();

    std::vector<GridPoint> map(total);
    std::atomic<std::size_t> cursor{0};
    const int thread_count = std::max(
        1, options.threads > 0 ? options.threads
                               : static_cast<int>(std::thread::hardware_concurrency()));
    auto worker = [&]() {
        for (std::size_t idx = cursor.fetch_add(1); idx < total; idx = cursor.fetch_add(1)) {
            Eigen::VectorXd theta(n);
            std::size_t rest = idx;
            for (int i = n - 1; i >= 0; --i) {
                const auto& axis = axes[static_cast<std::size_t>(i)];
                theta(i) = axis[rest % axis.size()];
                rest /= axis.size();
            }
            GridPoint& point = map[idx];
            point.theta = theta;
            const Eigen::VectorXd lin = linear_residuals(resolved, theta);
            bool lin_ok = true;
            for (Eigen::Index c = 0; c < lin.size(); ++c) {
                if (lin(c) > options.feas_tol) lin_ok = false;
            }
            if (!lin_ok) {
                point.objective = kInf;
                point.feasible = false;
                continue;
            }
            const Evaluation ev = evaluate_point(resolved, theta, /*with_alpha=*/true,
                                                 options.inner_spectrum);
            if (!ev.tunable) {
                point.objective = kInf;
                point.feasible = false;
                continue;
            }
            point.objective = ev.j;
            point.w_max = ev.w_max;
            point.p_max = ev.p_max;
            point.alpha = ev.alpha;
            point.wa_max = ev.wa_max;
            point.feasible = ev.alpha - resolved.xi_alpha <= options.feas_tol &&
                             ev.wa_max - resolved.xi_a <= options.feas_tol;
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::size_t best = total;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!map[idx].feasible) continue;
        if (best == total || map[idx].objective < map[best].objective) best = idx;
    }
    GridResult result;
    result.map = std::move(map);
    if (best == total) {
        throw NumericalError("grid_search: the feasible grid is empty");
    }
    const GridPoint& winner = result.map[best];

    DesignResult& out = result.best;
    out.theta = winner.theta;
    const Evaluation ev = evaluate_point(resolved, winner.theta, true,
                                         resolved.spectrum_options);
    if (!ev.tunable) {
        throw NumericalError("grid_search: winner re-evaluation failed");
    }
    out.feasible = ev.alpha - resolved.xi_alpha <= options.feas_tol &&
                   ev.wa_max - resolved.xi_a <= options.feas_tol;
    out.objective = ev.j;
    out.w_max = ev.w_max;
    out.p_max = ev.p_max;
    out.feedback = ev.feedback;
    out.alpha = ev.alpha;
    out.wa_max = ev.wa_max;
    out.linear_residuals = linear_residuals(resolved, winner.theta);
    out.alpha_slack = ev.alpha - resolved.xi_alpha;
    out.wa_slack = ev.wa_max - resolved.xi_a;
    out.start_index = static_cast<int>(best);
    return result;
}

}  // namespace drchain
