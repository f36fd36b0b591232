#ifndef PAINTTRAP_PAINTING_HPP
#define PAINTTRAP_PAINTING_HPP

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "painttrap/optics.hpp"

namespace painttrap {

// AOD drive description. The beam position responds to the drive frequency
// as x = kappa * (f - central_freq); the painting stroke is the movement
// AMPLITUDE x_s = kappa * mod_amplitude (half of the full swept width).
struct PaintingSpec {
    double central_freq_Hz = 80e6;  // f_c
    double mod_amplitude_Hz = 0.0;  // f_s, FM amplitude
    double painting_freq_Hz = 0.0;  // f_p, sweep repetition rate
    double kappa_m_per_Hz = 1e-11;  // deflection calibration

    double stroke_m() const { return kappa_m_per_Hz * mod_amplitude_Hz; }

    static PaintingSpec from_stroke(double stroke_m, double painting_freq_Hz,
                                    double kappa_m_per_Hz, double central_freq_Hz = 80e6);

    void validate() const; // throws std::invalid_argument
};

// Probability density of the beam position over one painting period,
// piecewise constant on a uniform cell grid over [-stroke, +stroke].
// A zero stroke denotes a point mass at x = 0 (no painting).
struct DwellDensity {
    double stroke_m = 0.0;
    std::vector<double> weights; // unit integral: sum(w) * cell_width == 1

    bool is_delta() const { return stroke_m <= 0.0; }
    int cells() const { return static_cast<int>(weights.size()); }
    double cell_width() const { return 2.0 * stroke_m / static_cast<double>(cells()); }
    double position(int i) const { return -stroke_m + (i + 0.5) * cell_width(); }
    // mean of the density (time-averaged beam position)
    double mean() const;

    static DwellDensity delta();
    static DwellDensity uniform(double stroke_m, int cells);
    // truncated parabola rho(x) = 3/(4 xs) (1 - x^2/xs^2): paints a
    // harmonic time-averaged potential across the stroke
    static DwellDensity parabolic(double stroke_m, int cells);
    // weights proportional to `shape` (non-negative), renormalized
    static DwellDensity from_shape(double stroke_m, std::span<const double> shape);

    void validate() const;
};

// Parametric dwell shapes with closed-form blurred profiles. The schedule
// engine evaluates millions of painted-potential samples; the closed forms
// avoid per-cell quadrature while staying exactly consistent with the
// discretized densities above.
struct PaintProfile {
    enum class Kind { del, uniform, parabolic, general };
    Kind kind = Kind::del;
    double stroke_m = 0.0;
    DwellDensity density; // Kind::general only

    static PaintProfile delta();
    static PaintProfile uniform(double stroke_m);
    static PaintProfile parabolic(double stroke_m);
    static PaintProfile general(DwellDensity d);

    // discretized equivalent (waveform synthesis, histograms)
    DwellDensity to_density(int cells = 256) const;
    void validate() const;
};

struct DeconvOptions {
    double tolerance = 1e-3; // max |forward - target| / max(target)
    int max_iters = 500;
};

struct DeconvResult {
    DwellDensity density;
    double residual = 0.0; // of the returned iterate
    int iterations = 0;
    bool converged = false;
    bool clipped = false; // deconvolution demanded negative dwell
};

// Solve for the dwell density whose blurred image (convolution with the
// static 1-D beam profile of the given waist) matches `target`, a
// non-negative profile sampled on the dwell grid over [-stroke, +stroke].
// Damped multiplicative fixed-point updates; the reported residual is
// non-increasing across iterations.
DeconvResult dwell_density_for_profile(std::span<const double> target, double stroke_m,
                                       double beam_waist_m, const DeconvOptions& opts = {});

// Forward model used by the deconvolution: blur of a dwell density with the
// static profile exp(-2 u^2 / w^2), evaluated on the dwell grid (peak of the
// result normalized to the same scale as unit-integral densities).
std::vector<double> blur_with_beam(const DwellDensity& d, double beam_waist_m);

// One period of the AOD drive: instantaneous frequency samples and the
// accumulated phase (trapezoidal integral of 2 pi f). period_phase_rad is
// the total phase advance over one full period, used when the period is
// repeated phase-continuously.
struct Waveform {
    double sample_rate_Hz = 0.0;
    double painting_freq_Hz = 0.0;
    std::vector<double> freq_Hz;
    std::vector<double> phase_rad;
    double period_phase_rad = 0.0;
    bool zero_dwell = false; // density had empty cells (traversed instantly)

    int samples_per_period() const { return static_cast<int>(freq_Hz.size()); }
};

// Position sweep over one period: forward then backward across the stroke,
// local speed inversely proportional to the dwell density. The requested
// sample rate is snapped to an integer number of samples per period.
Waveform frequency_trajectory(const DwellDensity& d, const PaintingSpec& spec,
                              double sample_rate_Hz);

// Constant-frequency waveform (no painting); n_samples at the given rate.
Waveform constant_waveform(double freq_Hz, double sample_rate_Hz, int n_samples);

// Beam position samples x(t_i) over one period implied by a waveform.
std::vector<double> position_samples(const Waveform& w, const PaintingSpec& spec);

// Complex unit-amplitude drive signal exp(i phi) over n_periods periods,
// phase-continuous across period boundaries.
std::vector<std::complex<double>> waveform_signal(const Waveform& w, int n_periods);

struct Spectrum {
    double bin_Hz = 0.0;
    std::vector<double> freq_Hz;   // bin centers, 0 .. sample_rate
    std::vector<double> amplitude; // |DFT|/N of the unit signal
};

// DFT magnitude of exp(i phi) over n_periods periods. Frequency resolution
// painting_freq / n_periods. Sum of amplitude^2 equals the mean signal
// power (Parseval).
Spectrum rf_spectrum(const Waveform& w, int n_periods);

// Indices of local maxima of the amplitude above `threshold` * max.
std::vector<int> spectral_peaks(const Spectrum& s, double threshold = 1e-3);

// Time-averaged intensity of a painted beam: the static intensity convolved
// with the dwell density along the beam's paint axis. Piecewise-constant
// cells are integrated against the Gaussian exactly (erf), so this matches
// the brute-force time average to quadrature precision.
double time_averaged_intensity(const Beam& beam, const DwellDensity& d,
                               const Eigen::Vector3d& point);
std::vector<double> time_averaged_intensity(const Beam& beam, const DwellDensity& d,
                                            std::span<const Eigen::Vector3d> points);

// Painted intensity for a parametric profile; closed forms for uniform and
// parabolic dwell, cell quadrature for general densities.
double painted_intensity(const Beam& beam, const PaintProfile& profile,
                         const Eigen::Vector3d& point);

struct Fragmentation {
    double well_spacing_m = 0.0; // kappa * f_p
    double corrugation = 0.0;    // (max-min)/max over the central half stroke
};

// Discrete-sideband model of the painted potential: Gaussian wells of the
// given waist at spacing kappa*f_p, weighted by the RF sideband powers of a
// uniform sweep. Exposes the painting-frequency tradeoff: resolved wells at
// large kappa*f_p, a smooth profile when the comb is dense.
Fragmentation sideband_fragmentation(const PaintingSpec& spec, double beam_waist_m);

// The comb-model painted profile itself, evaluated at positions x_m along
// the paint axis (relative intensity; a static beam gives the plain
// Gaussian). Shares the sideband weights with sideband_fragmentation.
std::vector<double> comb_profile(const PaintingSpec& spec, double beam_waist_m,
                                 std::span<const double> x_m);

struct PaintingCheck {
    bool ok = true;
    std::vector<std::string> warnings;
};

// Warn when the painting frequency is not well above the trap frequencies
// (atoms would be dragged along) or when sidebands corrugate the potential.
PaintingCheck validate_painting(const PaintingSpec& spec, double beam_waist_m,
                                const std::array<double, 3>& trap_freqs_Hz,
                                double margin = 10.0, double corrugation_threshold = 0.05);

} // namespace painttrap

#endif
