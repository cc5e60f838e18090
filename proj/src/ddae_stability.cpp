#include "drchain/ddae_stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace drchain {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXcd pencil_at(const DdaeSystem& sys, std::complex<double> lambda) {
    const std::complex<double> shift = std::exp(-lambda * sys.tau);
    return lambda * sys.E.cast<std::complex<double>>() -
           sys.A0.cast<std::complex<double>>() -
           shift * sys.A1.cast<std::complex<double>>();
}

// Chebyshev extremal mesh on [-tau, 0] with theta_0 = 0, theta_N = -tau, and
// the differentiation matrix from the barycentric weights.
Eigen::MatrixXd chebyshev_differentiation(int N, double tau,
                                          Eigen::VectorXd& mesh) {
    mesh.resize(N + 1);
    Eigen::VectorXd w(N + 1);
    for (int j = 0; j <= N; ++j) {
        mesh(j) = -0.5 * tau * (1.0 - std::cos(j * kPi / N));
        w(j) = (j % 2 == 0) ? 1.0 : -1.0;
    }
    w(0) *= 0.5;
    w(N) *= 0.5;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j <= N; ++j) {
            if (i == j) continue;
            D(i, j) = (w(j) / w(i)) / (mesh(i) - mesh(j));
            row_sum += D(i, j);
        }
        D(i, i) = -row_sum;
    }
    return D;
}

// Eigenvalues of the collocated generator: block row 0 imposes the delay
// equation at theta = 0, the remaining block rows differentiate the history
// segment.
std::vector<std::complex<double>> generator_eigenvalues(const RetardedSystem& rs,
                                                        int N) {
    const int n = static_cast<int>(rs.A0.rows());
    Eigen::VectorXd mesh;
    const Eigen::MatrixXd D = chebyshev_differentiation(N, rs.tau, mesh);

    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * (N + 1), n * (N + 1));
    big.topLeftCorner(n, n) = rs.A0;
    big.topRightCorner(n, n) += rs.A1;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    for (int i = 1; i <= N; ++i) {
        for (int j = 0; j <= N; ++j) {
            if (D(i, j) != 0.0) big.block(i * n, j * n, n, n) = D(i, j) * eye;
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(big, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("spectrum: eigensolve of the collocation matrix failed");
    }
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Newton iteration on log det(lambda I - A0 - A1 e^{-lambda tau}); the
// derivative of the log-determinant is trace(M^{-1} M').
bool newton_refine(const RetardedSystem& rs, std::complex<double>& lambda,
                   double tol, int max_iter) {
    const int n = static_cast<int>(rs.A0.rows());
    const Eigen::MatrixXcd A0 = rs.A0.cast<std::complex<double>>();
    const Eigen::MatrixXcd A1 = rs.A1.cast<std::complex<double>>();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
    for (int it = 0; it < max_iter; ++it) {
        const std::complex<double> shift = std::exp(-lambda * rs.tau);
        const Eigen::MatrixXcd M = lambda * eye - A0 - shift * A1;
        const Eigen::MatrixXcd Mp = eye + rs.tau * shift * A1;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
        const std::complex<double> tr = lu.solve(Mp).trace();
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()) ||
            std::abs(tr) == 0.0) {
            return false;
        }
        const std::complex<double> step = -1.0 / tr;
        lambda += step;
        if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) return false;
        if (std::abs(step) <= tol * (1.0 + std::abs(lambda))) return true;
    }
    return false;
}

struct HalfPlaneScan {
    std::vector<std::complex<double>> roots;
    std::vector<double> residuals;
    int dropped = 0;
};

// One discretize-refine-gate pass at a fixed collocation order.
HalfPlaneScan scan_half_plane(const DdaeSystem& sys, const RetardedSystem& rs,
                              int N, const SpectrumOptions& opt) {
    HalfPlaneScan scan;
    const auto eigs = generator_eigenvalues(rs, N);

    std::vector<std::complex<double>> refined;
    for (const auto& seed : eigs) {
        if (seed.real() < opt.rhp_bound || seed.imag() < -1e-9) continue;
        if (std::abs(seed) > 1e8) continue;  // spurious far-field eigenvalue
        std::complex<double> root = seed;
        if (!newton_refine(rs, root, opt.newton_tol, opt.newton_max_iter)) {
            ++scan.dropped;
            continue;
        }
        if (root.real() < opt.rhp_bound) continue;  // refined out of the scan window
        refined.push_back(root);
    }

    // Deduplicate refinements that collapsed onto the same root.
    std::sort(refined.begin(), refined.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() < b.real();
                  return a.imag() < b.imag();
              });
    std::vector<std::complex<double>> unique_roots;
    for (const auto& r : refined) {
        const bool duplicate =
            std::any_of(unique_roots.begin(), unique_roots.end(),
                        [&](const std::complex<double>& q) {
                            return std::abs(q - r) < 1e-6 * (1.0 + std::abs(r));
                        });
        if (!duplicate) unique_roots.push_back(r);
    }

    for (const auto& r : unique_roots) {
        const double res = char_residual(sys, r);
        if (res >= opt.residual_tol) {
            ++scan.dropped;
            continue;
        }
        scan.roots.push_back(r);
        scan.residuals.push_back(res);
        if (r.imag() > 1e-9) {  // real matrices: mirror the conjugate partner
            const std::complex<double> rc = std::conj(r);
            scan.roots.push_back(rc);
            scan.residuals.push_back(char_residual(sys, rc));
        }
    }
    return scan;
}

void sort_spectrum(Spectrum& sp) {
    std::vector<std::size_t> order(sp.roots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sp.roots[a].real() != sp.roots[b].real())
            return sp.roots[a].real() > sp.roots[b].real();
        return sp.roots[a].imag() < sp.roots[b].imag();
    });
    std::vector<std::complex<double>> roots(order.size());
    std::vector<double> residuals(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        roots[i] = sp.roots[order[i]];
        residuals[i] = sp.residuals[order[i]];
    }
    sp.roots = std::move(roots);
    sp.residuals = std::move(residuals);
}

}  // namespace

DdaeSystem build_ddae(const ChainModel& model, const AbsorberModel& absorber,
                      const DrFeedback& feedback) {
    model.validate();
    absorber.validate();
    if (feedback.delay < 0.0) {
        throw ValidationError("build_ddae: feedback delay must be nonnegative");
    }
    const StructuralMatrices mats = assemble_matrices(model);
    const int d = model.d;
    const int n = 2 * d + 4;
    const int ix = 0, iv = d, ixa = 2 * d, iva = 2 * d + 1, ifa = 2 * d + 2,
              iu = 2 * d + 3;

    DdaeSystem sys;
    sys.d = d;
    sys.tau = feedback.delay;
    sys.E = Eigen::MatrixXd::Zero(n, n);
    sys.E.block(ix, ix, d, d).setIdentity();
    sys.E.block(iv, iv, d, d) = mats.M;
    sys.E(ixa, ixa) = 1.0;
    sys.E(iva, iva) = absorber.mass;
    // rows ifa and iu stay algebraic

    sys.A0 = Eigen::MatrixXd::Zero(n, n);
    sys.A0.block(ix, iv, d, d).setIdentity();
    sys.A0.block(iv, ix, d, d) = -mats.K;
    sys.A0.block(iv, iv, d, d) = -mats.C;
    sys.A0.block(iv, ifa, d, 1) = -mats.B_a;  // reaction of the link force
    sys.A0(ixa, iva) = 1.0;
    sys.A0(iva, ifa) = 1.0;  // m_a x_a'' = f_a
    // Link-force balance: 0 = k_a x_p + c_a x_p' - k_a x_a - c_a x_a' - f_a + u.
    sys.A0(ifa, ix + model.p - 1) = absorber.stiffness;
    sys.A0(ifa, iv + model.p - 1) = absorber.damping;
    sys.A0(ifa, ixa) = -absorber.stiffness;
    sys.A0(ifa, iva) = -absorber.damping;
    sys.A0(ifa, ifa) = -1.0;
    sys.A0(ifa, iu) = 1.0;
    // Feedback law: 0 = g x_a(t - tau) - u.
    sys.A0(iu, iu) = -1.0;

    sys.A1 = Eigen::MatrixXd::Zero(n, n);
    sys.A1(iu, ixa) = feedback.gain;

    sys.B = Eigen::VectorXd::Zero(n);
    sys.B.segment(iv, d) = mats.B_d;
    return sys;
}

RetardedSystem reduce_to_retarded(const DdaeSystem& sys) {
    const int n = sys.dim();
    std::vector<int> diff, alg;
    for (int i = 0; i < n; ++i) {
        (sys.E.row(i).isZero(0.0) ? alg : diff).push_back(i);
    }
    const int nd = static_cast<int>(diff.size());
    const int na = static_cast<int>(alg.size());

    auto slice = [](const Eigen::MatrixXd& M, const std::vector<int>& rows,
                    const std::vector<int>& cols) {
        Eigen::MatrixXd out(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    M(rows[i], cols[j]);
        return out;
    };

    // Supported pattern: the delayed term acts from differential states onto
    // algebraic rows only (the feedback law). Anything else would leave a
    // delayed derivative or a delayed algebraic variable behind.
    if (!slice(sys.A1, diff, diff).isZero(0.0) ||
        !slice(sys.A1, diff, alg).isZero(0.0) ||
        !slice(sys.A1, alg, alg).isZero(0.0)) {
        throw NumericalError("reduce_to_retarded: unsupported delay coupling pattern");
    }

    const Eigen::MatrixXd Edd = slice(sys.E, diff, diff);
    const Eigen::MatrixXd A0dd = slice(sys.A0, diff, diff);
    const Eigen::MatrixXd A0da = slice(sys.A0, diff, alg);
    const Eigen::MatrixXd A0ad = slice(sys.A0, alg, diff);
    const Eigen::MatrixXd A0aa = slice(sys.A0, alg, alg);
    const Eigen::MatrixXd A1ad = slice(sys.A1, alg, diff);

    Eigen::FullPivLU<Eigen::MatrixXd> lu_aa(A0aa);
    if (!lu_aa.isInvertible()) {
        throw NumericalError("reduce_to_retarded: algebraic block is not invertible");
    }
    const Eigen::MatrixXd W0 = lu_aa.solve(A0ad);   // w = -W0 z - W1 z(t-tau)
    const Eigen::MatrixXd W1 = lu_aa.solve(A1ad);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu_dd(Edd);
    RetardedSystem rs;
    rs.tau = sys.tau;
    rs.A0 = lu_dd.solve(A0dd - A0da * W0);
    rs.A1 = lu_dd.solve(-A0da * W1);
    Eigen::VectorXd Bd(nd);
    for (int i = 0; i < nd; ++i) Bd(i) = sys.B(diff[static_cast<std::size_t>(i)]);
    for (int i = 0; i < na; ++i) {
        if (sys.B(alg[static_cast<std::size_t>(i)]) != 0.0) {
            throw NumericalError("reduce_to_retarded: forcing on an algebraic row");
        }
    }
    rs.B = lu_dd.solve(Bd);
    return rs;
}

double char_residual(const DdaeSystem& sys, std::complex<double> lambda) {
    Eigen::MatrixXcd M = pencil_at(sys, lambda);
    // One row/column equilibration pass keeps the measure meaningful for the
    // descriptor pencil: the differential rows grow like |lambda| and the
    // force-balance row mixes stiffness-sized and unit entries, both of which
    // would otherwise mask how close the pencil is to singularity. Scaling by
    // nonsingular diagonals preserves exact singularity.
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const double norm = M.row(i).norm();
        if (norm > 0.0) M.row(i) /= norm;
    }
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double norm = M.col(j).norm();
        if (norm > 0.0) M.col(j) /= norm;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax == 0.0) return 0.0;
    return sv(sv.size() - 1) / smax;
}

Spectrum compute_spectrum(const DdaeSystem& sys, const SpectrumOptions& options) {
    const RetardedSystem rs = reduce_to_retarded(sys);
    const bool delay_free = sys.tau == 0.0 || rs.A1.isZero(0.0);

    Spectrum sp;
    if (delay_free) {
        // Finitely many roots: eigenvalues of the (possibly closed-loop)
        // state matrix; the residual gate still runs against the pencil.
        Eigen::MatrixXd A = rs.A0;
        if (sys.tau == 0.0) A += rs.A1;
        Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
        if (es.info() != Eigen::Success) {
            throw NumericalError("spectrum: delay-free eigensolve failed");
        }
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const std::complex<double> r = es.eigenvalues()(i);
            sp.roots.push_back(r);
            sp.residuals.push_back(char_residual(sys, r));
        }
        sp.grid_size_used = 0;
        sp.abscissa = -std::numeric_limits<double>::infinity();
        for (const auto& r : sp.roots) sp.abscissa = std::max(sp.abscissa, r.real());
        sort_spectrum(sp);
        return sp;
    }

    SpectrumOptions opt = options;
    int N = std::max(4, opt.grid_size);
    const int max_N = std::max(4, opt.grid_size) * 8;
    double previous_abscissa = std::numeric_limits<double>::quiet_NaN();
    HalfPlaneScan scan;
    while (true) {
        scan = scan_half_plane(sys, rs, N, opt);
        int widenings = 0;
        while (scan.roots.empty() && widenings < 4) {
            // Nothing right of the bound: widen the scan window.
            opt.rhp_bound *= 2.0;
            ++widenings;
            scan = scan_half_plane(sys, rs, N, opt);
        }
        if (scan.roots.empty()) {
            throw NumericalError(
                "spectrum: no characteristic root could be certified right of the "
                "scan bound (all candidates failed refinement)");
        }
        double abscissa = scan.roots.front().real();
        for (const auto& r : scan.roots) abscissa = std::max(abscissa, r.real());
        if (!opt.adaptive || (std::isfinite(previous_abscissa) &&
                              std::abs(abscissa - previous_abscissa) < 1e-6)) {
            sp.abscissa = abscissa;
            break;
        }
        if (2 * N > max_N) {
            std::ostringstream msg;
            msg << "spectrum: abscissa did not stabilize to 1e-6 up to N=" << N;
            throw NumericalError(msg.str());
        }
        previous_abscissa = abscissa;
        N *= 2;
    }
    sp.roots = std::move(scan.roots);
    sp.residuals = std::move(scan.residuals);
    sp.dropped = scan.dropped;
    sp.grid_size_used = N;
    sort_spectrum(sp);
    return sp;
}

double spectral_abscissa(const DdaeSystem& sys, const SpectrumOptions& options) {
    return compute_spectrum(sys, options).abscissa;
}

}  // namespace drchain
