#include "painttrap/painting.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace painttrap {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sum_weights(const std::vector<double>& w) {
    return std::accumulate(w.begin(), w.end(), 0.0);
}

} // namespace

PaintingSpec PaintingSpec::from_stroke(double stroke_m, double painting_freq_Hz,
                                       double kappa_m_per_Hz, double central_freq_Hz) {
    if (kappa_m_per_Hz <= 0.0)
        throw std::invalid_argument("painting: kappa must be positive");
    PaintingSpec s;
    s.central_freq_Hz = central_freq_Hz;
    s.mod_amplitude_Hz = stroke_m / kappa_m_per_Hz;
    s.painting_freq_Hz = painting_freq_Hz;
    s.kappa_m_per_Hz = kappa_m_per_Hz;
    s.validate();
    return s;
}

void PaintingSpec::validate() const {
    if (kappa_m_per_Hz <= 0.0)
        throw std::invalid_argument("painting: kappa must be positive");
    if (central_freq_Hz < 0.0)
        throw std::invalid_argument("painting: central frequency must be non-negative");
    if (mod_amplitude_Hz < 0.0)
        throw std::invalid_argument("painting: modulation amplitude must be non-negative");
    if (mod_amplitude_Hz > 0.0 && painting_freq_Hz <= 0.0)
        throw std::invalid_argument("painting: painting frequency must be positive when painting");
    if (painting_freq_Hz < 0.0)
        throw std::invalid_argument("painting: painting frequency must be non-negative");
}

double DwellDensity::mean() const {
    if (is_delta()) return 0.0;
    const double cw = cell_width();
    double m = 0.0;
    for (int i = 0; i < cells(); ++i) m += weights[i] * cw * position(i);
    return m;
}

DwellDensity DwellDensity::delta() {
    return DwellDensity{};
}

DwellDensity DwellDensity::uniform(double stroke_m, int cells) {
    if (stroke_m <= 0.0)
        throw std::invalid_argument("dwell density: uniform stroke must be positive");
    if (cells < 1)
        throw std::invalid_argument("dwell density: need at least one cell");
    DwellDensity d;
    d.stroke_m = stroke_m;
    d.weights.assign(static_cast<size_t>(cells), 1.0 / (2.0 * stroke_m));
    return d;
}

DwellDensity DwellDensity::parabolic(double stroke_m, int cells) {
    if (stroke_m <= 0.0)
        throw std::invalid_argument("dwell density: parabolic stroke must be positive");
    if (cells < 3)
        throw std::invalid_argument("dwell density: parabolic needs at least three cells");
    std::vector<double> shape(static_cast<size_t>(cells));
    for (int i = 0; i < cells; ++i) {
        const double x = (-stroke_m + (i + 0.5) * 2.0 * stroke_m / cells) / stroke_m;
        shape[static_cast<size_t>(i)] = 1.0 - x * x;
    }
    return from_shape(stroke_m, shape);
}

DwellDensity DwellDensity::from_shape(double stroke_m, std::span<const double> shape) {
    if (stroke_m <= 0.0)
        throw std::invalid_argument("dwell density: stroke must be positive");
    if (shape.empty())
        throw std::invalid_argument("dwell density: empty shape");
    DwellDensity d;
    d.stroke_m = stroke_m;
    d.weights.assign(shape.begin(), shape.end());
    double total = 0.0;
    for (double v : d.weights) {
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("dwell density: shape values must be non-negative");
        total += v;
    }
    if (total <= 0.0)
        throw std::invalid_argument("dwell density: shape must have positive mass");
    const double cw = d.cell_width();
    for (double& v : d.weights) v /= total * cw;
    return d;
}

void DwellDensity::validate() const {
    if (stroke_m < 0.0)
        throw std::invalid_argument("dwell density: negative stroke");
    if (is_delta()) {
        if (!weights.empty())
            throw std::invalid_argument("dwell density: delta density carries no weights");
        return;
    }
    if (weights.empty())
        throw std::invalid_argument("dwell density: no cells");
    for (double v : weights)
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("dwell density: weights must be non-negative");
    const double integral = sum_weights(weights) * cell_width();
    if (std::abs(integral - 1.0) > 1e-6)
        throw std::invalid_argument("dwell density: weights must integrate to one");
    if (*std::max_element(weights.begin(), weights.end()) <= 0.0)
        throw std::invalid_argument("dwell density: all-zero weights");
}

PaintProfile PaintProfile::delta() {
    return PaintProfile{};
}

PaintProfile PaintProfile::uniform(double stroke_m) {
    if (stroke_m <= 0.0)
        throw std::invalid_argument("paint profile: uniform stroke must be positive");
    PaintProfile p;
    p.kind = Kind::uniform;
    p.stroke_m = stroke_m;
    return p;
}

PaintProfile PaintProfile::parabolic(double stroke_m) {
    if (stroke_m <= 0.0)
        throw std::invalid_argument("paint profile: parabolic stroke must be positive");
    PaintProfile p;
    p.kind = Kind::parabolic;
    p.stroke_m = stroke_m;
    return p;
}

PaintProfile PaintProfile::general(DwellDensity d) {
    d.validate();
    PaintProfile p;
    p.kind = d.is_delta() ? Kind::del : Kind::general;
    p.stroke_m = d.stroke_m;
    p.density = std::move(d);
    return p;
}

DwellDensity PaintProfile::to_density(int cells) const {
    switch (kind) {
        case Kind::del: return DwellDensity::delta();
        case Kind::uniform: return DwellDensity::uniform(stroke_m, cells);
        case Kind::parabolic: return DwellDensity::parabolic(stroke_m, cells);
        case Kind::general: return density;
    }
    throw std::logic_error("paint profile: unknown kind");
}

void PaintProfile::validate() const {
    if (kind == Kind::general) {
        density.validate();
        if (density.is_delta())
            throw std::invalid_argument("paint profile: general profile with delta density");
    } else if (kind != Kind::del && stroke_m <= 0.0) {
        throw std::invalid_argument("paint profile: stroke must be positive");
    }
}

// Exact integral of exp(-2 (x - x')^2 / w^2) over x' in [a, b].
static double gauss_cell_integral(double x, double a, double b, double w) {
    const double s = std::sqrt(2.0) / w;
    return w * std::sqrt(kPi / 8.0) * (std::erf(s * (x - a)) - std::erf(s * (x - b)));
}

std::vector<double> blur_with_beam(const DwellDensity& d, double beam_waist_m) {
    if (beam_waist_m <= 0.0)
        throw std::invalid_argument("blur: waist must be positive");
    d.validate();
    if (d.is_delta()) return {1.0};
    const int n = d.cells();
    const double cw = d.cell_width();
    std::vector<double> out(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double x = d.position(i);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (d.weights[j] == 0.0) continue;
            const double a = -d.stroke_m + j * cw;
            acc += d.weights[j] * gauss_cell_integral(x, a, a + cw, beam_waist_m);
        }
        out[static_cast<size_t>(i)] = acc;
    }
    return out;
}

DeconvResult dwell_density_for_profile(std::span<const double> target, double stroke_m,
                                       double beam_waist_m, const DeconvOptions& opts) {
    const int n = static_cast<int>(target.size());
    if (n < 2)
        throw std::invalid_argument("deconvolution: need at least two target samples");
    if (stroke_m <= 0.0)
        throw std::invalid_argument("deconvolution: stroke must be positive");
    if (beam_waist_m <= 0.0)
        throw std::invalid_argument("deconvolution: waist must be positive");
    double tmax = 0.0;
    for (double v : target) {
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("deconvolution: target must be non-negative");
        tmax = std::max(tmax, v);
    }
    if (tmax <= 0.0)
        throw std::invalid_argument("deconvolution: target must have positive mass");

    std::vector<double> that(target.begin(), target.end());
    for (double& v : that) v /= tmax;

    auto normalize = [&](std::vector<double>& w) {
        const double cw = 2.0 * stroke_m / n;
        const double s = sum_weights(w) * cw;
        for (double& v : w) v /= s;
    };
    auto residual_of = [&](const std::vector<double>& fwd) {
        const double fmax = *std::max_element(fwd.begin(), fwd.end());
        double r = 0.0;
        for (int i = 0; i < n; ++i)
            r = std::max(r, std::abs(fwd[static_cast<size_t>(i)] / fmax - that[static_cast<size_t>(i)]));
        return r;
    };

    DwellDensity d = DwellDensity::from_shape(stroke_m, that);
    std::vector<double> fwd = blur_with_beam(d, beam_waist_m);
    double res = residual_of(fwd);

    DeconvResult out;
    out.iterations = 0;
    bool stalled = false;
    while (res > opts.tolerance && out.iterations < opts.max_iters && !stalled) {
        // Gold's ratio update, damped so the residual never increases.
        const double fmax = *std::max_element(fwd.begin(), fwd.end());
        std::vector<double> proposal = d.weights;
        for (int i = 0; i < n; ++i) {
            const double f = std::max(fwd[static_cast<size_t>(i)] / fmax, 1e-12);
            proposal[static_cast<size_t>(i)] *= that[static_cast<size_t>(i)] / f;
        }
        normalize(proposal);

        double alpha = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 24; ++halvings) {
            std::vector<double> blended(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i)
                blended[static_cast<size_t>(i)] = (1.0 - alpha) * d.weights[static_cast<size_t>(i)] +
                                                  alpha * proposal[static_cast<size_t>(i)];
            normalize(blended);
            DwellDensity cand;
            cand.stroke_m = stroke_m;
            cand.weights = std::move(blended);
            std::vector<double> cand_fwd = blur_with_beam(cand, beam_waist_m);
            const double cand_res = residual_of(cand_fwd);
            if (cand_res < res) {
                d = std::move(cand);
                fwd = std::move(cand_fwd);
                res = cand_res;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++out.iterations;
        if (!accepted) stalled = true;
    }

    out.density = std::move(d);
    out.residual = res;
    out.converged = res <= opts.tolerance;
    // A stall above tolerance means the non-negativity constraint is active:
    // no non-negative dwell reproduces the target (it is narrower or has
    // sharper features than the beam allows).
    out.clipped = stalled && !out.converged;
    return out;
}

Waveform frequency_trajectory(const DwellDensity& d, const PaintingSpec& spec,
                              double sample_rate_Hz) {
    d.validate();
    if (spec.kappa_m_per_Hz <= 0.0)
        throw std::invalid_argument("painting: kappa must be positive");
    if (spec.painting_freq_Hz <= 0.0)
        throw std::invalid_argument("painting: painting frequency must be positive");
    if (sample_rate_Hz < 100.0 * spec.painting_freq_Hz)
        throw std::invalid_argument("painting: sample rate below 100 samples per period");

    const int n = static_cast<int>(std::llround(sample_rate_Hz / spec.painting_freq_Hz));
    Waveform w;
    w.painting_freq_Hz = spec.painting_freq_Hz;
    w.sample_rate_Hz = n * spec.painting_freq_Hz; // snapped
    w.freq_Hz.resize(static_cast<size_t>(n));
    w.phase_rad.resize(static_cast<size_t>(n));

    if (d.is_delta()) {
        std::fill(w.freq_Hz.begin(), w.freq_Hz.end(), spec.central_freq_Hz);
    } else {
        const int cells = d.cells();
        const double cw = d.cell_width();
        std::vector<double> cdf(static_cast<size_t>(cells) + 1, 0.0);
        for (int i = 0; i < cells; ++i)
            cdf[static_cast<size_t>(i) + 1] = cdf[static_cast<size_t>(i)] + d.weights[static_cast<size_t>(i)] * cw;
        for (double& c : cdf) c /= cdf.back();
        for (int i = 0; i < cells; ++i)
            if (d.weights[static_cast<size_t>(i)] == 0.0) w.zero_dwell = true;

        auto inv_cdf = [&](double s) {
            if (s <= 0.0) return -d.stroke_m;
            if (s >= 1.0) return d.stroke_m;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), s);
            int cell = static_cast<int>(it - cdf.begin()) - 1;
            cell = std::clamp(cell, 0, cells - 1);
            const double c0 = cdf[static_cast<size_t>(cell)];
            const double c1 = cdf[static_cast<size_t>(cell) + 1];
            const double frac = c1 > c0 ? (s - c0) / (c1 - c0) : 0.0;
            return -d.stroke_m + (cell + frac) * cw;
        };

        for (int k = 0; k < n; ++k) {
            const double u = static_cast<double>(k) / n; // position in period
            const double s = u < 0.5 ? 2.0 * u : 2.0 * (1.0 - u);
            const double x = inv_cdf(s);
            w.freq_Hz[static_cast<size_t>(k)] = spec.central_freq_Hz + x / spec.kappa_m_per_Hz;
        }
    }

    const double dt = 1.0 / w.sample_rate_Hz;
    w.phase_rad[0] = 0.0;
    for (int k = 1; k < n; ++k)
        w.phase_rad[static_cast<size_t>(k)] =
            w.phase_rad[static_cast<size_t>(k) - 1] +
            kPi * (w.freq_Hz[static_cast<size_t>(k) - 1] + w.freq_Hz[static_cast<size_t>(k)]) * dt;
    w.period_phase_rad = w.phase_rad[static_cast<size_t>(n) - 1] +
                         kPi * (w.freq_Hz[static_cast<size_t>(n) - 1] + w.freq_Hz[0]) * dt;
    return w;
}

Waveform constant_waveform(double freq_Hz, double sample_rate_Hz, int n_samples) {
    if (sample_rate_Hz <= 0.0 || n_samples < 1)
        throw std::invalid_argument("painting: invalid constant waveform request");
    Waveform w;
    w.sample_rate_Hz = sample_rate_Hz;
    w.painting_freq_Hz = sample_rate_Hz / n_samples;
    w.freq_Hz.assign(static_cast<size_t>(n_samples), freq_Hz);
    w.phase_rad.resize(static_cast<size_t>(n_samples));
    const double dphi = 2.0 * kPi * freq_Hz / sample_rate_Hz;
    for (int k = 0; k < n_samples; ++k) w.phase_rad[static_cast<size_t>(k)] = k * dphi;
    w.period_phase_rad = n_samples * dphi;
    return w;
}

std::vector<double> position_samples(const Waveform& w, const PaintingSpec& spec) {
    std::vector<double> x(w.freq_Hz.size());
    for (size_t k = 0; k < x.size(); ++k)
        x[k] = spec.kappa_m_per_Hz * (w.freq_Hz[k] - spec.central_freq_Hz);
    return x;
}

std::vector<std::complex<double>> waveform_signal(const Waveform& w, int n_periods) {
    if (n_periods < 1)
        throw std::invalid_argument("painting: need at least one period");
    const int n = w.samples_per_period();
    std::vector<std::complex<double>> s(static_cast<size_t>(n) * n_periods);
    for (int p = 0; p < n_periods; ++p) {
        const double offset = p * w.period_phase_rad;
        for (int k = 0; k < n; ++k)
            s[static_cast<size_t>(p) * n + k] = std::polar(1.0, w.phase_rad[static_cast<size_t>(k)] + offset);
    }
    return s;
}

namespace {
std::mutex fftw_plan_mutex;
}

Spectrum rf_spectrum(const Waveform& w, int n_periods) {
    const auto signal = waveform_signal(w, n_periods);
    const int n = static_cast<int>(signal.size());

    std::vector<std::complex<double>> out(static_cast<size_t>(n));
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_plan plan = fftw_plan_dft_1d(
            n,
            reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(signal.data())),
            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    Spectrum s;
    s.bin_Hz = w.sample_rate_Hz / n;
    s.freq_Hz.resize(static_cast<size_t>(n));
    s.amplitude.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        s.freq_Hz[static_cast<size_t>(k)] = k * s.bin_Hz;
        s.amplitude[static_cast<size_t>(k)] = std::abs(out[static_cast<size_t>(k)]) / n;
    }
    return s;
}

std::vector<int> spectral_peaks(const Spectrum& s, double threshold) {
    std::vector<int> peaks;
    if (s.amplitude.size() < 3) return peaks;
    const double amax = *std::max_element(s.amplitude.begin(), s.amplitude.end());
    const double floor = threshold * amax;
    for (size_t i = 1; i + 1 < s.amplitude.size(); ++i)
        if (s.amplitude[i] >= floor && s.amplitude[i] > s.amplitude[i - 1] &&
            s.amplitude[i] >= s.amplitude[i + 1])
            peaks.push_back(static_cast<int>(i));
    return peaks;
}

namespace {

// Beam-local evaluation context: spot sizes at the axial position, peak
// intensity, and the paint-transverse Gaussian factor.
struct LocalFrame {
    double x;          // along paint axis
    double wx;         // spot size along paint axis
    double envelope;   // peak(z) * exp(-2 y^2 / wy^2)
};

LocalFrame local_frame(const Beam& beam, const Eigen::Vector3d& point) {
    const Eigen::Vector3d local = beam_local(beam, point);
    const double z = local.z();
    const double zrx = beam.rayleigh_x_m();
    const double zry = beam.rayleigh_y_m();
    const double wx = beam.waist_x_m * std::sqrt(1.0 + (z / zrx) * (z / zrx));
    const double wy = beam.waist_y_m * std::sqrt(1.0 + (z / zry) * (z / zry));
    const double peak = 2.0 * beam.power_W / (kPi * wx * wy);
    return {local.x(), wx,
            peak * std::exp(-2.0 * local.y() * local.y() / (wy * wy))};
}

} // namespace

double time_averaged_intensity(const Beam& beam, const DwellDensity& d,
                               const Eigen::Vector3d& point) {
    if (d.is_delta()) return gaussian_intensity(beam, point);
    const LocalFrame f = local_frame(beam, point);

    const int n = d.cells();
    const double cw = d.cell_width();
    double acc = 0.0;
    const double sf = std::sqrt(2.0) / f.wx;
    double erf_prev = std::erf(sf * (f.x + d.stroke_m)); // left edge of cell 0
    const double norm = f.wx * std::sqrt(kPi / 8.0);
    for (int j = 0; j < n; ++j) {
        const double b = -d.stroke_m + (j + 1) * cw;
        const double erf_next = std::erf(sf * (f.x - b));
        acc += d.weights[static_cast<size_t>(j)] * norm * (erf_prev - erf_next);
        erf_prev = erf_next;
    }
    return f.envelope * acc;
}

double painted_intensity(const Beam& beam, const PaintProfile& profile,
                         const Eigen::Vector3d& point) {
    switch (profile.kind) {
        case PaintProfile::Kind::del:
            return gaussian_intensity(beam, point);
        case PaintProfile::Kind::general:
            return time_averaged_intensity(beam, profile.density, point);
        case PaintProfile::Kind::uniform: {
            const LocalFrame f = local_frame(beam, point);
            const double xs = profile.stroke_m;
            return f.envelope / (2.0 * xs) *
                   gauss_cell_integral(f.x, -xs, xs, f.wx);
        }
        case PaintProfile::Kind::parabolic: {
            // rho(x') = a + c x'^2 against the Gaussian: moments of
            // exp(-k u^2) over u = x - x' in [x - xs, x + xs].
            const LocalFrame f = local_frame(beam, point);
            const double xs = profile.stroke_m;
            const double a = 3.0 / (4.0 * xs);
            const double c = -3.0 / (4.0 * xs * xs * xs);
            const double k = 2.0 / (f.wx * f.wx);
            const double lo = f.x - xs;
            const double hi = f.x + xs;
            const double elo = std::exp(-k * lo * lo);
            const double ehi = std::exp(-k * hi * hi);
            const double g0 = gauss_cell_integral(f.x, -xs, xs, f.wx);
            const double g1 = (elo - ehi) / (2.0 * k);
            const double g2 = (lo * elo - hi * ehi) / (2.0 * k) + g0 / (2.0 * k);
            const double conv = (a + c * f.x * f.x) * g0 - 2.0 * c * f.x * g1 + c * g2;
            return f.envelope * std::max(conv, 0.0);
        }
    }
    throw std::logic_error("paint profile: unknown kind");
}

std::vector<double> time_averaged_intensity(const Beam& beam, const DwellDensity& d,
                                            std::span<const Eigen::Vector3d> points) {
    std::vector<double> out(points.size());
    for (size_t i = 0; i < points.size(); ++i)
        out[i] = time_averaged_intensity(beam, d, points[i]);
    return out;
}

namespace {

struct CombWell {
    double x;
    double power;
};

// Sideband powers of one painting period of the baseband drive
// (instantaneous frequency in [-f_s, f_s]). One-period DFT bins fall
// exactly on the comb at multiples of f_p; the sample rate leaves
// headroom above the FM bandwidth so aliasing is negligible.
std::vector<CombWell> comb_wells(const PaintingSpec& spec) {
    const double xs = spec.stroke_m();
    const double spacing = spec.kappa_m_per_Hz * spec.painting_freq_Hz;
    if (xs <= 0.0 || spec.painting_freq_Hz <= 0.0) return {{0.0, 1.0}}; // static beam

    const double ratio = spec.mod_amplitude_Hz / spec.painting_freq_Hz;
    int n = 128;
    while (n < 8.0 * (ratio + 4.0)) n *= 2;

    PaintingSpec base = spec;
    base.central_freq_Hz = 0.0;
    const DwellDensity uniform = DwellDensity::uniform(xs, 256);
    const Waveform w = frequency_trajectory(uniform, base, n * spec.painting_freq_Hz);
    const Spectrum s = rf_spectrum(w, 1);

    std::vector<CombWell> wells;
    for (int k = 0; k < n; ++k) {
        const double p = s.amplitude[static_cast<size_t>(k)] * s.amplitude[static_cast<size_t>(k)];
        if (p < 1e-12) continue;
        const int offset = k <= n / 2 ? k : k - n;
        wells.push_back({offset * spacing, p});
    }
    return wells;
}

double comb_value(const std::vector<CombWell>& wells, double beam_waist_m, double x) {
    double v = 0.0;
    for (const CombWell& well : wells) {
        const double u = (x - well.x) / beam_waist_m;
        v += well.power * std::exp(-2.0 * u * u);
    }
    return v;
}

} // namespace

std::vector<double> comb_profile(const PaintingSpec& spec, double beam_waist_m,
                                 std::span<const double> x_m) {
    spec.validate();
    if (beam_waist_m <= 0.0)
        throw std::invalid_argument("comb profile: waist must be positive");
    const std::vector<CombWell> wells = comb_wells(spec);
    std::vector<double> out(x_m.size());
    for (size_t i = 0; i < x_m.size(); ++i) out[i] = comb_value(wells, beam_waist_m, x_m[i]);
    return out;
}

Fragmentation sideband_fragmentation(const PaintingSpec& spec, double beam_waist_m) {
    spec.validate();
    if (beam_waist_m <= 0.0)
        throw std::invalid_argument("fragmentation: waist must be positive");
    if (spec.painting_freq_Hz <= 0.0)
        throw std::invalid_argument("fragmentation: painting frequency must be positive");

    Fragmentation frag;
    frag.well_spacing_m = spec.kappa_m_per_Hz * spec.painting_freq_Hz;
    const double xs = spec.stroke_m();
    if (xs <= 0.0) return frag; // static beam: no corrugation

    const std::vector<CombWell> wells = comb_wells(spec);

    // Corrugation of the modelled time-averaged profile over the central
    // half of the stroke (edges roll off even for a perfect sweep).
    const int samples = 2001;
    double imin = std::numeric_limits<double>::infinity();
    double imax = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = -0.5 * xs + i * xs / (samples - 1);
        const double v = comb_value(wells, beam_waist_m, x);
        imin = std::min(imin, v);
        imax = std::max(imax, v);
    }
    frag.corrugation = imax > 0.0 ? (imax - imin) / imax : 0.0;
    return frag;
}

PaintingCheck validate_painting(const PaintingSpec& spec, double beam_waist_m,
                                const std::array<double, 3>& trap_freqs_Hz,
                                double margin, double corrugation_threshold) {
    PaintingCheck check;
    if (spec.mod_amplitude_Hz <= 0.0) return check; // static beam

    const double fmax = std::max({trap_freqs_Hz[0], trap_freqs_Hz[1], trap_freqs_Hz[2]});
    if (spec.painting_freq_Hz < margin * fmax) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "painting frequency %.3g Hz below %.0fx the highest trap frequency %.3g Hz; "
                      "atoms will follow the sweep",
                      spec.painting_freq_Hz, margin, fmax);
        check.warnings.emplace_back(buf);
    }
    const Fragmentation frag = sideband_fragmentation(spec, beam_waist_m);
    if (frag.corrugation > corrugation_threshold) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "sideband spacing %.3g m corrugates the painted potential by %.1f%%; "
                      "lower the painting frequency or enlarge the waist",
                      frag.well_spacing_m, 100.0 * frag.corrugation);
        check.warnings.emplace_back(buf);
    }
    check.ok = check.warnings.empty();
    return check;
}

} // namespace painttrap
