#include "painttrap/trap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "painttrap/errors.hpp"

namespace painttrap {

namespace {

constexpr double kPi = 3.14159265358979323846;

double min_waist(const TrapConfig& cfg) {
    double w = std::numeric_limits<double>::infinity();
    for (const PaintedBeam& pb : cfg.beams)
        w = std::min({w, pb.beam.waist_x_m, pb.beam.waist_y_m});
    return w;
}

double hessian_step(const TrapConfig& cfg) {
    return std::max(50e-9, min_waist(cfg) / 200.0);
}

} // namespace

void TrapConfig::validate() const {
    for (const PaintedBeam& pb : beams) {
        pb.beam.validate();
        pb.paint.validate();
    }
    if (gradient_Tpm < 0.0)
        throw std::invalid_argument("trap: gradient must be non-negative");
    constants.validate();
}

double total_potential(const TrapConfig& cfg, const Eigen::Vector3d& point, SpinState spin) {
    double u = 0.0;
    for (const PaintedBeam& pb : cfg.beams)
        u += cfg.constants.dipole_coefficient * painted_intensity(pb.beam, pb.paint, point);
    if (cfg.gravity)
        u += cfg.constants.atom_mass_kg * cfg.constants.gravity_m_per_s2 * point.z();
    if (spin != SpinState::zero && cfg.gradient_Tpm > 0.0)
        u += cfg.constants.lande_gf_abs * bohr_magneton * cfg.gradient_Tpm * point.z();
    return u;
}

double trap_extent(const TrapConfig& cfg) {
    double e = 0.0;
    for (const PaintedBeam& pb : cfg.beams)
        e = std::max(e, pb.paint.stroke_m + std::max(pb.beam.waist_x_m, pb.beam.waist_y_m));
    return e;
}

namespace {

Eigen::Vector3d fd_gradient(const TrapConfig& cfg, SpinState spin, const Eigen::Vector3d& p,
                            double h) {
    Eigen::Vector3d g;
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[i] = h;
        g[i] = (total_potential(cfg, p + e, spin) - total_potential(cfg, p - e, spin)) /
               (2.0 * h);
    }
    return g;
}

Eigen::Matrix3d fd_hessian(const TrapConfig& cfg, SpinState spin, const Eigen::Vector3d& p,
                           double h) {
    Eigen::Matrix3d m;
    const double u0 = total_potential(cfg, p, spin);
    std::array<Eigen::Vector3d, 3> e{Eigen::Vector3d::UnitX() * h, Eigen::Vector3d::UnitY() * h,
                                     Eigen::Vector3d::UnitZ() * h};
    for (int i = 0; i < 3; ++i)
        m(i, i) = (total_potential(cfg, p + e[static_cast<size_t>(i)], spin) - 2.0 * u0 +
                   total_potential(cfg, p - e[static_cast<size_t>(i)], spin)) /
                  (h * h);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const Eigen::Vector3d& ei = e[static_cast<size_t>(i)];
            const Eigen::Vector3d& ej = e[static_cast<size_t>(j)];
            const double v = (total_potential(cfg, p + ei + ej, spin) -
                              total_potential(cfg, p + ei - ej, spin) -
                              total_potential(cfg, p - ei + ej, spin) +
                              total_potential(cfg, p - ei - ej, spin)) /
                             (4.0 * h * h);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

} // namespace

Eigen::Matrix3d potential_hessian(const TrapConfig& cfg, SpinState spin,
                                  const Eigen::Vector3d& at) {
    const double h = hessian_step(cfg);
    const Eigen::Matrix3d coarse = fd_hessian(cfg, spin, at, 2.0 * h);
    const Eigen::Matrix3d fine = fd_hessian(cfg, spin, at, h);
    return (4.0 * fine - coarse) / 3.0;
}

Eigen::Vector3d find_minimum(const TrapConfig& cfg, SpinState spin,
                             const Eigen::Vector3d& seed_point, const MinimizeOptions& opts) {
    cfg.validate();
    const double escape = 20.0 * trap_extent(cfg);
    const double scale =
        opts.initial_scale_m > 0.0 ? opts.initial_scale_m : 0.25 * min_waist(cfg);

    auto f = [&](const Eigen::Vector3d& p) { return total_potential(cfg, p, spin); };

    // Nelder-Mead on the 3-D potential.
    std::array<Eigen::Vector3d, 4> pts;
    std::array<double, 4> val;
    pts[0] = seed_point;
    for (int i = 0; i < 3; ++i) {
        pts[static_cast<size_t>(i) + 1] = seed_point;
        pts[static_cast<size_t>(i) + 1][i] += scale;
    }
    for (int i = 0; i < 4; ++i) val[static_cast<size_t>(i)] = f(pts[static_cast<size_t>(i)]);

    auto order = [&]() {
        for (int i = 1; i < 4; ++i)
            for (int j = i; j > 0 && val[static_cast<size_t>(j)] < val[static_cast<size_t>(j) - 1]; --j) {
                std::swap(val[static_cast<size_t>(j)], val[static_cast<size_t>(j) - 1]);
                std::swap(pts[static_cast<size_t>(j)], pts[static_cast<size_t>(j) - 1]);
            }
    };
    order();

    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        if ((pts[0] - seed_point).norm() > escape) {
            throw UntrappedError("no bounded potential minimum: descent left the trap region",
                                 {pts[0].x(), pts[0].y(), pts[0].z()});
        }
        double diameter = 0.0;
        for (int i = 1; i < 4; ++i)
            diameter = std::max(diameter, (pts[static_cast<size_t>(i)] - pts[0]).norm());
        if (diameter < opts.simplex_diameter_m) break;

        const Eigen::Vector3d centroid = (pts[0] + pts[1] + pts[2]) / 3.0;
        const Eigen::Vector3d reflected = centroid + (centroid - pts[3]);
        const double fr = f(reflected);
        if (fr < val[0]) {
            const Eigen::Vector3d expanded = centroid + 2.0 * (centroid - pts[3]);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[3] = expanded;
                val[3] = fe;
            } else {
                pts[3] = reflected;
                val[3] = fr;
            }
        } else if (fr < val[2]) {
            pts[3] = reflected;
            val[3] = fr;
        } else {
            const bool outside = fr < val[3];
            const Eigen::Vector3d contracted =
                centroid + 0.5 * ((outside ? reflected : pts[3]) - centroid);
            const double fc = f(contracted);
            if (fc < (outside ? fr : val[3])) {
                pts[3] = contracted;
                val[3] = fc;
            } else {
                for (int i = 1; i < 4; ++i) {
                    pts[static_cast<size_t>(i)] = pts[0] + 0.5 * (pts[static_cast<size_t>(i)] - pts[0]);
                    val[static_cast<size_t>(i)] = f(pts[static_cast<size_t>(i)]);
                }
            }
        }
        order();
    }
    if (iter >= opts.max_iters)
        throw MinimizationError("potential minimization did not converge",
                                {pts[0].x(), pts[0].y(), pts[0].z()});

    // Newton polish: drives the residual gradient well below the simplex
    // resolution when the local Hessian is positive definite.
    Eigen::Vector3d best = pts[0];
    double fbest = val[0];
    const double h = hessian_step(cfg);
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d g = fd_gradient(cfg, spin, best, h);
        const Eigen::Matrix3d m = fd_hessian(cfg, spin, best, h);
        Eigen::LDLT<Eigen::Matrix3d> ldlt(m);
        if (ldlt.info() != Eigen::Success) break;
        const Eigen::Vector3d step = ldlt.solve(g);
        if (!step.allFinite() || step.norm() > 10e-6) break;
        const Eigen::Vector3d cand = best - step;
        const double fcand = f(cand);
        if (fcand <= fbest) {
            best = cand;
            fbest = fcand;
        }
        if (step.norm() < 1e-12) break;
    }

    // Stationarity check: residual force must be small on the scale of
    // gravity (the weakest force that always acts).
    const double gnorm = fd_gradient(cfg, spin, best, h).norm();
    const double gravity_force = cfg.constants.atom_mass_kg * cfg.constants.gravity_m_per_s2;
    if (gnorm > 0.2 * gravity_force)
        throw MinimizationError("potential minimization stalled away from a stationary point",
                                {best.x(), best.y(), best.z()});
    return best;
}

std::array<double, 3> trap_frequencies(const TrapConfig& cfg, SpinState spin,
                                       const Eigen::Vector3d& minimum) {
    const Eigen::Matrix3d hess = potential_hessian(cfg, spin, minimum);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(hess);
    const Eigen::Vector3d lambda = solver.eigenvalues();
    const Eigen::Matrix3d vecs = solver.eigenvectors();

    const double lmax = lambda.maxCoeff();
    if (lmax <= 0.0)
        throw SaddlePointError("potential has no trapping curvature at the minimum");
    for (int i = 0; i < 3; ++i)
        if (lambda[i] < -1e-6 * lmax)
            throw SaddlePointError("negative curvature at the reported minimum: saddle point");

    // Assign eigenpairs to lab axes: the permutation with the largest total
    // axis overlap. A painted flat direction can carry curvature ~0; it is
    // clamped to frequency 0 rather than treated as a saddle.
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    int best_perm = 0;
    double best_score = -1.0;
    for (int p = 0; p < 6; ++p) {
        double score = 0.0;
        for (int axis = 0; axis < 3; ++axis)
            score += std::abs(vecs(axis, perms[p][axis]));
        if (score > best_score) {
            best_score = score;
            best_perm = p;
        }
    }

    std::array<double, 3> f{};
    for (int axis = 0; axis < 3; ++axis) {
        const double l = std::max(lambda[perms[best_perm][axis]], 0.0);
        f[static_cast<size_t>(axis)] =
            std::sqrt(l / cfg.constants.atom_mass_kg) / (2.0 * kPi);
    }
    return f;
}

double trap_depth(const TrapConfig& cfg, SpinState spin, const Eigen::Vector3d& minimum) {
    // Rays must reach past both the painted extent and the axial decay of
    // the beams (the Rayleigh ranges dwarf the waists), otherwise the
    // barrier along a beam axis is truncated.
    double reach = 20.0 * trap_extent(cfg);
    for (const PaintedBeam& pb : cfg.beams)
        if (pb.beam.power_W > 0.0)
            reach = std::max({reach, 30.0 * pb.beam.rayleigh_x_m(), 30.0 * pb.beam.rayleigh_y_m()});
    const double s_max = reach;
    const double u_min = total_potential(cfg, minimum, spin);

    // Ray directions: +- Hessian principal axes plus +- vertical.
    std::vector<Eigen::Vector3d> dirs;
    {
        const Eigen::Matrix3d hess = potential_hessian(cfg, spin, minimum);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(hess);
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector3d v = solver.eigenvectors().col(i);
            dirs.push_back(v);
            dirs.push_back(-v);
        }
    }
    dirs.push_back(Eigen::Vector3d::UnitZ());
    dirs.push_back(-Eigen::Vector3d::UnitZ());

    auto u_along = [&](const Eigen::Vector3d& d, double s) {
        return total_potential(cfg, minimum + s * d, spin);
    };

    double depth = std::numeric_limits<double>::infinity();
    for (const Eigen::Vector3d& d : dirs) {
        // Geometric scan for the highest barrier along the ray.
        std::vector<double> ss;
        for (double s = 50e-9; s < s_max; s *= 1.15) ss.push_back(s);
        ss.push_back(s_max);

        double barrier = -std::numeric_limits<double>::infinity();
        size_t at = 0;
        for (size_t i = 0; i < ss.size(); ++i) {
            const double u = u_along(d, ss[i]);
            if (u > barrier) {
                barrier = u;
                at = i;
            }
        }
        // Golden-section refinement of an interior maximum.
        if (at > 0 && at + 1 < ss.size()) {
            double a = ss[at - 1];
            double b = ss[at + 1];
            constexpr double inv_phi = 0.6180339887498949;
            double x1 = b - inv_phi * (b - a);
            double x2 = a + inv_phi * (b - a);
            double f1 = u_along(d, x1);
            double f2 = u_along(d, x2);
            for (int k = 0; k < 40 && (b - a) > 1e-9; ++k) {
                if (f1 > f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    f1 = u_along(d, x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    f2 = u_along(d, x2);
                }
            }
            barrier = std::max(barrier, std::max(f1, f2));
        }
        depth = std::min(depth, barrier - u_min);
    }
    return std::max(depth, 0.0);
}

TrapCharacterization characterize_trap(const TrapConfig& cfg, const Eigen::Vector3d& seed_point) {
    TrapCharacterization out;
    out.minimum = find_minimum(cfg, SpinState::zero, seed_point);
    out.potential_min_J = total_potential(cfg, out.minimum, SpinState::zero);
    out.freq_Hz = trap_frequencies(cfg, SpinState::zero, out.minimum);
    out.mean_angular_freq =
        2.0 * kPi * std::cbrt(out.freq_Hz[0] * out.freq_Hz[1] * out.freq_Hz[2]);

    const double depth0 = trap_depth(cfg, SpinState::zero, out.minimum);
    out.depth_J = {depth0, depth0, depth0};
    if (cfg.gradient_Tpm > 0.0) {
        double depth_pm = 0.0; // spilled unless a bounded minimum exists
        try {
            const Eigen::Vector3d min_pm = find_minimum(cfg, SpinState::plus_one, out.minimum);
            depth_pm = trap_depth(cfg, SpinState::plus_one, min_pm);
        } catch (const UntrappedError&) {
        } catch (const MinimizationError&) {
        }
        out.depth_J[0] = depth_pm;
        out.depth_J[2] = depth_pm;
    }
    return out;
}

} // namespace painttrap
