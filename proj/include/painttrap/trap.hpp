#ifndef PAINTTRAP_TRAP_HPP
#define PAINTTRAP_TRAP_HPP

#include <Eigen/Dense>
#include <array>

#include "painttrap/optics.hpp"
#include "painttrap/painting.hpp"

namespace painttrap {

// F = 1 Zeeman sublevel
enum class SpinState : int { minus_one = -1, zero = 0, plus_one = 1 };

inline int spin_index(SpinState s) { return static_cast<int>(s) + 1; }

inline constexpr std::array<SpinState, 3> all_spins{SpinState::minus_one, SpinState::zero,
                                                    SpinState::plus_one};

struct PaintedBeam {
    Beam beam;
    PaintProfile paint;
};

struct TrapConfig {
    std::array<PaintedBeam, 2> beams;
    double gradient_Tpm = 0.0; // vertical field gradient Bp (spin distillation)
    bool gravity = true;
    PhysicalConstants constants;

    void validate() const;
};

// Optical + gravitational + magnetic-gradient potential energy. The
// gradient term |m_F g_F| mu_B Bp z pulls m_F = +-1 downward, weakening
// their trap; m_F = 0 is unaffected.
double total_potential(const TrapConfig& cfg, const Eigen::Vector3d& point, SpinState spin);

struct MinimizeOptions {
    double simplex_diameter_m = 1e-8;
    int max_iters = 600;
    double initial_scale_m = 0.0; // 0: quarter of the smallest waist
};

// Locate the potential minimum by Nelder-Mead descent followed by Newton
// polish. Throws UntrappedError when the descent escapes the trap region
// (no bounded minimum, e.g. gravity overwhelming a weak beam) and
// MinimizationError when the iteration budget is exhausted.
Eigen::Vector3d find_minimum(const TrapConfig& cfg, SpinState spin,
                             const Eigen::Vector3d& seed_point,
                             const MinimizeOptions& opts = {});

// Richardson-extrapolated central-difference Hessian of the potential.
Eigen::Matrix3d potential_hessian(const TrapConfig& cfg, SpinState spin,
                                  const Eigen::Vector3d& at);

// Curvature frequencies at the minimum, reported along the lab axes
// (eigenpairs matched to the closest axes). Throws SaddlePointError on a
// genuinely negative eigenvalue; near-zero curvature along a flat painted
// direction clamps to 0 Hz.
std::array<double, 3> trap_frequencies(const TrapConfig& cfg, SpinState spin,
                                       const Eigen::Vector3d& minimum);

// Escape barrier: minimum over 8 rays (+- principal axes, +- vertical) of
// the highest potential along the ray within s_max = 20x the largest
// painted extent. 0 means the trap has spilled along some ray.
double trap_depth(const TrapConfig& cfg, SpinState spin, const Eigen::Vector3d& minimum);

// Largest painted extent (stroke + waist) over the beams; sets ray range
// and escape detection radius.
double trap_extent(const TrapConfig& cfg);

struct TrapCharacterization {
    Eigen::Vector3d minimum = Eigen::Vector3d::Zero(); // of the m_F = 0 potential
    std::array<double, 3> freq_Hz{0.0, 0.0, 0.0};      // lab x, y, z
    std::array<double, 3> depth_J{0.0, 0.0, 0.0};      // indexed by m_F + 1
    double mean_angular_freq = 0.0;                    // 2 pi (fx fy fz)^(1/3)
    double potential_min_J = 0.0;

    double depth(SpinState s) const { return depth_J[static_cast<size_t>(spin_index(s))]; }
};

// Full characterization: m_F = 0 minimum, frequencies, and per-m_F depths
// (each spin's depth from its own sagged minimum; an untrapped spin gets
// depth 0). With Bp = 0 all depths coincide.
TrapCharacterization characterize_trap(const TrapConfig& cfg, const Eigen::Vector3d& seed_point);

} // namespace painttrap

#endif
