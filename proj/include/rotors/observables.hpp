#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotors/lattice.hpp"
#include "rotors/spin_state.hpp"
#include "rotors/trajectory.hpp"

namespace rotors {

using complex = std::complex<double>;

namespace detail {

// rounding can push the mean of unit vectors a few ulps past the unit circle
inline complex clamp_unit(complex m) {
    const double r = std::abs(m);
    return r > 1.0 ? m / r : m;
}

}  // namespace detail

inline complex magnetization(std::span<const double> angles) {
    complex sum{0.0, 0.0};
    for (double a : angles) sum += complex(std::cos(a), std::sin(a));
    return angles.empty() ? sum : detail::clamp_unit(sum / static_cast<double>(angles.size()));
}

inline complex magnetization(const SpinState& state) { return magnetization(state.angles()); }

// ---------------------------------------------------------------------------
// Phase unwrapping and angular velocity

struct UnwrappedPhase {
    std::vector<double> phase;
    std::vector<long> turns;  // phase[i] = wrapped[i] + 2*pi*turns[i]
    bool undersampled = false;
};

/// Continuous phase from wrapped samples. Consecutive true increments must be
/// below pi; increments of at least pi - 0.1 set `undersampled`.
inline UnwrappedPhase unwrap_phase(std::span<const double> wrapped) {
    UnwrappedPhase out;
    out.phase.reserve(wrapped.size());
    out.turns.reserve(wrapped.size());
    long turns = 0;
    for (std::size_t i = 0; i < wrapped.size(); ++i) {
        if (i > 0) {
            const double jump = wrapped[i] - wrapped[i - 1];
            const double step = std::remainder(jump, two_pi);
            if (std::abs(step) >= std::numbers::pi - 0.1) out.undersampled = true;
            turns += std::lround((step - jump) / two_pi);
        }
        out.turns.push_back(turns);
        out.phase.push_back(wrapped[i] + two_pi * static_cast<double>(turns));
    }
    return out;
}

inline UnwrappedPhase unwrap_phase(std::span<const MagnetizationSample> samples) {
    std::vector<double> wrapped;
    wrapped.reserve(samples.size());
    for (const auto& s : samples) wrapped.push_back(std::arg(s.m));
    return unwrap_phase(wrapped);
}

struct TimeWindow {
    double t_start = 0.0;
    double t_end = std::numeric_limits<double>::infinity();

    bool contains(double t) const { return t >= t_start && t <= t_end; }
};

struct LinearFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    std::size_t count = 0;
};

/// Ordinary least squares y = intercept + slope * t over the samples inside the window.
inline LinearFit fit_line(std::span<const double> t, std::span<const double> y,
                          const TimeWindow& window, std::size_t min_samples = 10) {
    if (t.size() != y.size()) throw std::invalid_argument("fit: time and value lengths differ");
    double st = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!window.contains(t[i])) continue;
        st += t[i];
        sy += y[i];
        ++n;
    }
    if (n < min_samples) {
        throw std::invalid_argument("fit: " + std::to_string(n) + " samples in window, need " +
                                    std::to_string(min_samples));
    }
    const double tm = st / n, ym = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!window.contains(t[i])) continue;
        sxx += (t[i] - tm) * (t[i] - tm);
        sxy += (t[i] - tm) * (y[i] - ym);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit: window has no spread in time");
    LinearFit fit;
    fit.count = n;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * tm;
    double ssr = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!window.contains(t[i])) continue;
        const double r = y[i] - (fit.intercept + fit.slope * t[i]);
        ssr += r * r;
        fit.max_residual = std::max(fit.max_residual, std::abs(r));
    }
    fit.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    return fit;
}

/// Least-squares slope of the unwrapped phase against time, with its standard error.
inline LinearFit fit_angular_velocity(std::span<const double> times,
                                      std::span<const double> unwrapped,
                                      const TimeWindow& window) {
    return fit_line(times, unwrapped, window, 10);
}

// ---------------------------------------------------------------------------
// Rotation detection

struct RotationThresholds {
    double m_min = 0.1;
    double omega_min = 1e-3;       // absolute floor on |omega|
    double omega_stderrs = 5.0;    // |omega| must also exceed this many standard errors
    double residual_max = 0.5;     // radians
};

struct RotationVerdict {
    bool rotating = false;
    double omega = 0.0;
    double omega_stderr = 0.0;
    double m_floor = 0.0;
    double phase_residual = 0.0;
    double phase_intercept = 0.0;
    bool undersampled = false;
};

inline RotationVerdict detect_rotation(const Trajectory& trajectory, const TimeWindow& window,
                                       const RotationThresholds& thresholds = {}) {
    const auto unwrapped = unwrap_phase(trajectory.samples);
    std::vector<double> times;
    times.reserve(trajectory.samples.size());
    RotationVerdict v;
    v.m_floor = 1.0;
    for (const auto& s : trajectory.samples) {
        times.push_back(s.t);
        if (window.contains(s.t)) v.m_floor = std::min(v.m_floor, std::abs(s.m));
    }
    v.m_floor = std::clamp(v.m_floor, 0.0, 1.0);
    const LinearFit fit = fit_angular_velocity(times, unwrapped.phase, window);
    v.omega = fit.slope;
    v.omega_stderr = fit.slope_stderr;
    v.phase_residual = fit.max_residual;
    v.phase_intercept = fit.intercept;
    v.undersampled = unwrapped.undersampled;
    const double omega_floor =
        std::max(thresholds.omega_min, thresholds.omega_stderrs * v.omega_stderr);
    v.rotating = v.m_floor >= thresholds.m_min && std::abs(v.omega) > omega_floor &&
                 v.phase_residual <= thresholds.residual_max;
    return v;
}

// ---------------------------------------------------------------------------
// Correlations

struct CorrelationPoint {
    int r = 0;
    double corr = 0.0;
    double truncated = 0.0;
};

/// <cos(phi_x - phi_{x + r e_axis})>, averaged over origins and the ensemble, for
/// r = 0..max_r. The truncated value subtracts |<m>|^2 of the same ensemble.
inline std::vector<CorrelationPoint> correlation_curve(std::span<const SpinState> ensemble,
                                                       const Lattice& lattice, int max_r,
                                                       int axis = 0) {
    if (ensemble.empty()) throw std::invalid_argument("correlation: empty ensemble");
    if (axis < 0 || axis > 2) throw std::invalid_argument("correlation: axis must be 0, 1 or 2");
    const int extent = lattice.dims()[axis];
    if (max_r < 0 || max_r > extent / 2) {
        throw std::invalid_argument("correlation: max_r " + std::to_string(max_r) +
                                    " exceeds half the extent " + std::to_string(extent));
    }
    const bool wraps = lattice.periodic_along(axis);

    complex m_mean{0.0, 0.0};
    for (const auto& s : ensemble) m_mean += magnetization(s);
    m_mean /= static_cast<double>(ensemble.size());
    const double m2 = std::norm(m_mean);

    std::vector<CorrelationPoint> curve;
    for (int r = 0; r <= max_r; ++r) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& s : ensemble) {
            for (std::size_t x = 0; x < lattice.size(); ++x) {
                if (!wraps && lattice.coords(x)[axis] + r >= extent) continue;
                const std::size_t y = lattice.shifted(x, axis, r);
                sum += std::cos(s.angle(x) - s.angle(y));
                ++count;
            }
        }
        const double c = count ? sum / static_cast<double>(count) : 0.0;
        curve.push_back({r, r == 0 ? 1.0 : c, (r == 0 ? 1.0 : c) - m2});
    }
    return curve;
}

enum class DecayKind { exponential, algebraic, flat, undetermined };

inline const char* to_string(DecayKind k) {
    switch (k) {
        case DecayKind::exponential: return "exponential";
        case DecayKind::algebraic: return "algebraic";
        case DecayKind::flat: return "flat";
        case DecayKind::undetermined: return "undetermined";
    }
    return "undetermined";
}

struct DecayFit {
    DecayKind kind = DecayKind::undetermined;
    double rate = 0.0;       // c ~ exp(-rate * r)
    double exponent = 0.0;   // c ~ r^(-exponent)
    double r2_exponential = 0.0;
    double r2_algebraic = 0.0;
};

/// Compare log(c) vs r against log(c) vs log(r) on r in [r_min, r_max].
inline DecayFit classify_decay(std::span<const double> r, std::span<const double> c, double r_min,
                               double r_max) {
    DecayFit out;
    std::vector<double> rs, logr, logc;
    double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin, csum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < r_min || r[i] > r_max) continue;
        if (!(c[i] > 0.0) || !(r[i] > 0.0)) return out;
        rs.push_back(r[i]);
        logr.push_back(std::log(r[i]));
        logc.push_back(std::log(c[i]));
        cmin = std::min(cmin, c[i]);
        cmax = std::max(cmax, c[i]);
        csum += c[i];
    }
    if (rs.size() < 3) return out;
    if ((cmax - cmin) / (csum / rs.size()) < 0.1) {
        out.kind = DecayKind::flat;
        return out;
    }
    auto r_squared = [&](std::span<const double> x, const LinearFit& f) {
        double mean = 0.0;
        for (double v : logc) mean += v;
        mean /= logc.size();
        double ss_tot = 0.0, ss_res = 0.0;
        for (std::size_t i = 0; i < logc.size(); ++i) {
            const double e = logc[i] - (f.intercept + f.slope * x[i]);
            ss_res += e * e;
            ss_tot += (logc[i] - mean) * (logc[i] - mean);
        }
        return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    };
    const TimeWindow all{-std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
    const LinearFit exp_fit = fit_line(rs, logc, all, 3);
    const LinearFit alg_fit = fit_line(logr, logc, all, 3);
    out.rate = -exp_fit.slope;
    out.exponent = -alg_fit.slope;
    out.r2_exponential = r_squared(rs, exp_fit);
    out.r2_algebraic = r_squared(logr, alg_fit);
    if (std::abs(out.r2_exponential - out.r2_algebraic) < 0.05) {
        out.kind = DecayKind::undetermined;
    } else {
        out.kind = out.r2_exponential > out.r2_algebraic ? DecayKind::exponential
                                                         : DecayKind::algebraic;
    }
    return out;
}

inline DecayFit classify_decay(std::span<const CorrelationPoint> curve, double r_min,
                               double r_max, bool truncated = true) {
    std::vector<double> r, c;
    for (const auto& p : curve) {
        r.push_back(p.r);
        c.push_back(truncated ? p.truncated : p.corr);
    }
    return classify_decay(r, c, r_min, r_max);
}

// ---------------------------------------------------------------------------
// Layer profile and period averaging

/// Mean of e^{i phi} over each plane x1 = const, ordered by x1.
inline std::vector<complex> layer_profile(const SpinState& state, const Lattice& lattice) {
    const int l1 = lattice.dims()[0];
    std::vector<complex> planes(l1, complex{0.0, 0.0});
    std::vector<std::size_t> counts(l1, 0);
    for (std::size_t x = 0; x < lattice.size(); ++x) {
        const int c = lattice.coords(x)[0];
        planes[c] += std::polar(1.0, state.angle(x));
        ++counts[c];
    }
    for (int i = 0; i < l1; ++i) planes[i] = detail::clamp_unit(planes[i] / static_cast<double>(counts[i]));
    return planes;
}

struct PeriodAverage {
    double t_start = 0.0;
    double t_end = 0.0;
    complex m;
    double abs_m = 0.0;
    double energy_per_site = 0.0;
};

/// Trapezoidal time average over [t_start, t_start + 2pi/|omega|], with linear
/// interpolation of the samples at both ends of the interval.
inline PeriodAverage period_average(const Trajectory& trajectory, double omega, double t_start) {
    if (omega == 0.0 || !std::isfinite(omega)) {
        throw std::invalid_argument("period_average: omega must be finite and nonzero");
    }
    const auto& s = trajectory.samples;
    const double t_end = t_start + two_pi / std::abs(omega);
    if (s.size() < 2 || s.front().t > t_start || s.back().t < t_end) {
        throw std::invalid_argument("period_average: trajectory does not cover one period");
    }
    struct Point {
        double t;
        complex m;
        double abs_m;
        double e;
    };
    auto at = [&](double t) {
        auto hi = std::lower_bound(s.begin(), s.end(), t,
                                   [](const MagnetizationSample& a, double v) { return a.t < v; });
        if (hi == s.begin()) return Point{t, hi->m, std::abs(hi->m), hi->energy_per_site};
        auto lo = hi - 1;
        const double w = (t - lo->t) / (hi->t - lo->t);
        return Point{t, lo->m + w * (hi->m - lo->m),
                     std::abs(lo->m) + w * (std::abs(hi->m) - std::abs(lo->m)),
                     lo->energy_per_site + w * (hi->energy_per_site - lo->energy_per_site)};
    };
    std::vector<Point> pts;
    pts.push_back(at(t_start));
    for (const auto& x : s) {
        if (x.t > t_start && x.t < t_end) pts.push_back({x.t, x.m, std::abs(x.m), x.energy_per_site});
    }
    pts.push_back(at(t_end));

    PeriodAverage out;
    out.t_start = t_start;
    out.t_end = t_end;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double h = 0.5 * (pts[i].t - pts[i - 1].t);
        out.m += h * (pts[i].m + pts[i - 1].m);
        out.abs_m += h * (pts[i].abs_m + pts[i - 1].abs_m);
        out.energy_per_site += h * (pts[i].e + pts[i - 1].e);
    }
    const double span = t_end - t_start;
    out.m /= span;
    out.abs_m /= span;
    out.energy_per_site /= span;
    return out;
}

/// Plain sample means over a window, used for summaries.
struct WindowMeans {
    double abs_m = 0.0;
    double energy_per_site = 0.0;
    complex m;
    std::size_t count = 0;
};

inline WindowMeans window_means(const Trajectory& trajectory, const TimeWindow& window) {
    WindowMeans w;
    for (const auto& s : trajectory.samples) {
        if (!window.contains(s.t)) continue;
        w.abs_m += std::abs(s.m);
        w.energy_per_site += s.energy_per_site;
        w.m += s.m;
        ++w.count;
    }
    if (w.count) {
        w.abs_m /= w.count;
        w.energy_per_site /= w.count;
        w.m /= static_cast<double>(w.count);
    }
    return w;
}

}  // namespace rotors
