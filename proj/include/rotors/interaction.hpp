#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rotors {

/// Nearest-neighbor coupling u(delta) with pair energy -u(delta).
///   cosine:          u = cos(delta)
///   very-nonlinear:  u = ((1 + cos(delta)) / 2)^p,  p >= 1
class Interaction {
public:
    enum class Kind { cosine, very_nonlinear };

    static Interaction cosine() { return Interaction(Kind::cosine, 1.0); }

    static Interaction very_nonlinear(double p) {
        if (!(p >= 1.0)) throw std::invalid_argument("very-nonlinear exponent p must be >= 1");
        return Interaction(Kind::very_nonlinear, p);
    }

    Kind kind() const { return kind_; }
    double exponent() const { return p_; }

    double coupling(double delta) const {
        const double c = std::cos(delta);
        if (kind_ == Kind::cosine) return c;
        return std::pow(0.5 * (1.0 + c), p_);
    }

    double pair_energy(double delta) const { return -coupling(delta); }

    /// d(pair_energy)/d(delta).
    double torque(double delta) const {
        const double s = std::sin(delta);
        if (kind_ == Kind::cosine) return s;
        return p_ * std::pow(0.5 * (1.0 + std::cos(delta)), p_ - 1.0) * 0.5 * s;
    }

    /// Upper bound on |u(theta + step) - u(theta)| over all theta.
    /// Exact 2|sin(step/2)| for the cosine; for very-nonlinear the Lipschitz
    /// bound |step| * max|u'| capped at 1 (u takes values in [0, 1]).
    double max_coupling_change(double step) const {
        if (kind_ == Kind::cosine) return 2.0 * std::abs(std::sin(0.5 * step));
        // u(theta) = cos^{2p}(theta/2); |u'| = p cos^{2p-1}(x) sin(x), x = theta/2,
        // maximal at tan^2 x = 1 / (2p - 1).
        const double x = std::atan(1.0 / std::sqrt(2.0 * p_ - 1.0));
        const double lip = p_ * std::pow(std::cos(x), 2.0 * p_ - 1.0) * std::sin(x);
        return std::min(1.0, std::abs(step) * lip);
    }

    bool operator==(const Interaction&) const = default;

private:
    Interaction(Kind k, double p) : kind_(k), p_(p) {}

    Kind kind_;
    double p_;
};

}  // namespace rotors
