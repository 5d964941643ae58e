#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Position on the unit circle (circumference 1), kept in [0, 1).
struct CirclePoint {
    double x = 0.0;

    static CirclePoint wrap(double v) {
        double r = v - std::floor(v);
        if (r >= 1.0) r = 0.0;  // guards v = -1e-17 style roundoff
        return CirclePoint{r};
    }
};

/// Shortest signed arc from a to b, in (-1/2, 1/2].
inline double circle_diff(double a, double b) {
    double d = b - a;
    d -= std::round(d);
    if (d <= -0.5) d += 1.0;
    return d;
}

struct TrigTerm {
    int k = 1;       // spatial frequency
    double a = 0.0;  // amplitude
    double phi = 0.0;
};

enum class Family : std::uint8_t { Mechanical, Rotation };

/// One of the two built-in Hamiltonian families on the circle.
///
/// Mechanical: H(x,p) = p^2/2 + V(x),        V a finite trig sum.
/// Rotation:   H(x,p) = (p + eta(x))^2 / 2,  eta(x) = omega + A sin(2 pi x).
///
/// Both are strictly convex and superlinear in p, so the Legendre transform
/// is classical and closed-form.
struct ModelSpec {
    Family family = Family::Mechanical;
    std::vector<TrigTerm> potential;  // Mechanical only
    double rotation_mean = 0.0;       // omega
    double rotation_amplitude = 0.0;  // A

    static ModelSpec mechanical(std::vector<TrigTerm> terms) {
        ModelSpec m;
        m.family = Family::Mechanical;
        m.potential = std::move(terms);
        return m;
    }
    static ModelSpec rotation(double omega, double amplitude) {
        ModelSpec m;
        m.family = Family::Rotation;
        m.rotation_mean = omega;
        m.rotation_amplitude = amplitude;
        return m;
    }

    double potential_at(double x) const {
        double v = 0.0;
        for (const auto& t : potential) v += t.a * std::cos(kTwoPi * t.k * x + t.phi);
        return v;
    }
    double eta_at(double x) const {
        return rotation_mean + rotation_amplitude * std::sin(kTwoPi * x);
    }
};

inline double eval_H(const ModelSpec& m, CirclePoint x, double p) {
    if (m.family == Family::Mechanical) return 0.5 * p * p + m.potential_at(x.x);
    double q = p + m.eta_at(x.x);
    return 0.5 * q * q;
}

inline double eval_L(const ModelSpec& m, CirclePoint x, double v) {
    if (m.family == Family::Mechanical) return 0.5 * v * v - m.potential_at(x.x);
    return 0.5 * v * v - m.eta_at(x.x) * v;
}

/// L(x,v) + H(x,p) - p*v. Nonnegative, zero exactly on the Legendre graph.
inline double fenchel_gap(const ModelSpec& m, CirclePoint x, double v, double p) {
    return eval_L(m, x, v) + eval_H(m, x, p) - p * v;
}

// ---------------------------------------------------------------------------
// Discount-weight profiles
// ---------------------------------------------------------------------------

enum class AlphaKind : std::uint8_t { Constant, PositiveSinusoid, VanishingBand };

/// The nonnegative weight alpha multiplying the discount term.
/// Invalid parameter sets (anything that could make alpha negative, or a
/// sinusoid that touches zero) are rejected at construction.
class AlphaProfile {
  public:
    static AlphaProfile constant(double level) {
        if (level < 0.0) throw std::invalid_argument("alpha constant level must be >= 0");
        AlphaProfile a;
        a.kind_ = AlphaKind::Constant;
        a.p0_ = level;
        return a;
    }

    /// alpha(x) = base + amp * sin(2 pi x + phase), required strictly positive.
    static AlphaProfile positive_sinusoid(double base, double amp, double phase) {
        if (base <= std::abs(amp))
            throw std::invalid_argument("positive sinusoid requires base > |amplitude|");
        AlphaProfile a;
        a.kind_ = AlphaKind::PositiveSinusoid;
        a.p0_ = base;
        a.p1_ = amp;
        a.p2_ = phase;
        return a;
    }

    /// alpha = 0 on the arc [start, end], level h0 elsewhere, linear ramps of
    /// width ramp on both sides of the band. All arcs are circular.
    static AlphaProfile vanishing_band(double start, double end, double level, double ramp) {
        if (level < 0.0) throw std::invalid_argument("vanishing band level must be >= 0");
        if (ramp <= 0.0) throw std::invalid_argument("vanishing band ramp must be > 0");
        double len = start == end ? 0.0 : positive_fract(end - start);
        if (len + 2.0 * ramp >= 1.0)
            throw std::invalid_argument("vanishing band plus ramps covers the whole circle");
        AlphaProfile a;
        a.kind_ = AlphaKind::VanishingBand;
        a.p0_ = positive_fract(start);
        a.p1_ = positive_fract(end);
        a.p2_ = level;
        a.p3_ = ramp;
        return a;
    }

    AlphaKind kind() const { return kind_; }

    double operator()(CirclePoint x) const { return eval(x.x); }

    double eval(double x) const {
        switch (kind_) {
            case AlphaKind::Constant:
                return p0_;
            case AlphaKind::PositiveSinusoid:
                return p0_ + p1_ * std::sin(kTwoPi * x + p2_);
            case AlphaKind::VanishingBand: {
                double s = p0_, e = p1_, h0 = p2_, r = p3_;
                double t = positive_fract(x);
                double band_len = s == e ? 0.0 : positive_fract(e - s);
                double from_s = positive_fract(t - s);
                if (from_s <= band_len) return 0.0;
                double after_e = positive_fract(t - e);
                if (after_e <= r) return h0 * (after_e / r);
                double before_s = positive_fract(s - t);
                if (before_s <= r) return h0 * (before_s / r);
                return h0;
            }
        }
        return 0.0;
    }

  private:
    AlphaProfile() = default;
    static double positive_fract(double v) {
        double r = v - std::floor(v);
        return r >= 1.0 ? 0.0 : r;
    }

    AlphaKind kind_ = AlphaKind::Constant;
    double p0_ = 1.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
};

inline double eval_alpha(const AlphaProfile& a, CirclePoint x) { return a(x); }

// ---------------------------------------------------------------------------
// Analytic ground truth for the built-in families
// ---------------------------------------------------------------------------

namespace detail {

/// Adaptive Simpson with interval halving. The integrands below have
/// square-root vanishing at isolated points; the splitting absorbs that,
/// with a hard cap on the number of subintervals.
class AdaptiveSimpson {
  public:
    AdaptiveSimpson(double tol, std::size_t max_intervals)
        : tol_(tol), budget_(max_intervals) {}

    template <typename F>
    double integrate(const F& f, double a, double b) {
        double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        double r = recurse(f, a, b, fa, fm, fb, whole, tol_, 40);
        if (budget_ == 0)
            throw std::runtime_error("oracle quadrature did not converge to tolerance");
        return r;
    }

  private:
    template <typename F>
    double recurse(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = f(lm), frm = f(rm);
        double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        double delta = left + right - whole;
        if (depth <= 0 || budget_ == 0) {
            budget_ = 0;
            return left + right;
        }
        if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
        budget_ = budget_ > 2 ? budget_ - 2 : 0;
        return recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }

    double tol_;
    std::size_t budget_;
};

/// Golden-section maximization of f on [lo, hi] to the given x-tolerance.
template <typename F>
double golden_max(const F& f, double lo, double hi, double xtol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Analytic reference data used by the verification suite.
///
/// Mechanical: c = max V, Aubry = argmax V, and the barrier comes from the
/// one-dimensional minimal-action integral sqrt(2 (c - V)) routed through an
/// Aubry point. Rotation: c = omega^2/2, the Aubry set is the whole circle,
/// and the barrier is the increment of w(x) = (A / 2 pi) cos(2 pi x).
struct OracleData {
    double c_analytic = 0.0;
    std::vector<CirclePoint> aubry_points;  // empty when the whole circle is Aubry
    bool aubry_whole_circle = false;

    ModelSpec model;
    double quad_tol = 1e-8;

    /// Minimal-action integral from y to x, minimum over the two arcs.
    double mane_potential(double y, double x) const {
        if (model.family == Family::Rotation)
            throw std::logic_error("mane_potential is a mechanical-family oracle");
        auto integrand = [&](double s) {
            double g = c_analytic - model.potential_at(s);
            return std::sqrt(2.0 * std::max(0.0, g));
        };
        double d = x - y;
        d -= std::floor(d);
        detail::AdaptiveSimpson quad_fwd(quad_tol, std::size_t{1} << 20);
        double fwd = quad_fwd.integrate(integrand, y, y + d);
        detail::AdaptiveSimpson quad_bwd(quad_tol, std::size_t{1} << 20);
        double bwd = quad_bwd.integrate(integrand, x, x + (1.0 - d));
        return std::min(fwd, bwd);
    }

    double rotation_w(double x) const {
        return model.rotation_amplitude / kTwoPi * std::cos(kTwoPi * x);
    }

    /// Analytic Peierls barrier h(y, x).
    double barrier(double y, double x) const {
        if (model.family == Family::Rotation) return rotation_w(x) - rotation_w(y);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : aubry_points)
            best = std::min(best, mane_potential(y, a.x) + mane_potential(a.x, x));
        return best;
    }

    /// Dense barrier table over the given positions; the Aubry-leg integrals
    /// are computed once per (position, Aubry point) pair.
    std::vector<double> barrier_table(const std::vector<double>& xs) const {
        std::size_t n = xs.size();
        std::vector<double> h(n * n);
        if (model.family == Family::Rotation) {
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = rotation_w(xs[i]);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < n; ++i) h[j * n + i] = w[i] - w[j];
            return h;
        }
        std::size_t na = aubry_points.size();
        std::vector<double> to_a(n * na), from_a(na * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t q = 0; q < na; ++q)
                to_a[j * na + q] = mane_potential(xs[j], aubry_points[q].x);
        for (std::size_t q = 0; q < na; ++q)
            for (std::size_t i = 0; i < n; ++i)
                from_a[q * n + i] = mane_potential(aubry_points[q].x, xs[i]);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t q = 0; q < na; ++q)
                    best = std::min(best, to_a[j * na + q] + from_a[q * n + i]);
                h[j * n + i] = best;
            }
        return h;
    }
};

/// Build the analytic oracle for a built-in model.
/// Mechanical argmax-of-V detection: dense scan, golden-section refinement to
/// 1e-10, then collection of every global maximizer up to that resolution.
inline OracleData oracle(const ModelSpec& m) {
    OracleData o;
    o.model = m;
    if (m.family == Family::Rotation) {
        o.c_analytic = 0.5 * m.rotation_mean * m.rotation_mean;
        o.aubry_whole_circle = true;
        return o;
    }
    const int samples = 100000;
    double vmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i)
        vmax = std::max(vmax, m.potential_at(static_cast<double>(i) / samples));
    // refine every sample-level near-maximum, then dedup
    const double window = 2.0 / samples;
    std::vector<double> args;
    double refined_max = vmax;
    for (int i = 0; i < samples; ++i) {
        double x = static_cast<double>(i) / samples;
        if (m.potential_at(x) < vmax - 1e-6) continue;
        double xs = detail::golden_max([&](double t) { return m.potential_at(t); },
                                       x - window, x + window, 1e-12);
        refined_max = std::max(refined_max, m.potential_at(xs));
        args.push_back(xs);
    }
    o.c_analytic = refined_max;
    std::vector<double> kept;
    for (double a : args) {
        if (m.potential_at(a) < refined_max - 1e-10) continue;
        double w = CirclePoint::wrap(a).x;
        bool dup = false;
        for (double k : kept)
            if (std::abs(circle_diff(k, w)) < 1e-7) dup = true;
        if (!dup) kept.push_back(w);
    }
    std::sort(kept.begin(), kept.end());
    for (double k : kept) {
        // snap near-integer grid artifacts like 0.9999999999 to 0
        if (std::abs(k - 1.0) < 1e-9) k = 0.0;
        o.aubry_points.push_back(CirclePoint::wrap(k));
    }
    return o;
}

}  // namespace hjlab
