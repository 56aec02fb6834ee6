#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace hardy {

/// Maximum ambient dimension supported by the built-in scenarios.
inline constexpr std::size_t kMaxDim = 8;

/// Small fixed-capacity vector for ambient points and gradients.
/// Dimension is a runtime value (scenarios carry N in their config),
/// storage is inline so Vec is a cheap value type.
class Vec {
public:
    Vec() = default;
    explicit Vec(std::size_t n) : n_(n) {
        if (n > kMaxDim) throw std::length_error("Vec: dimension exceeds kMaxDim");
        v_.fill(0.0);
    }
    Vec(std::initializer_list<double> xs) : n_(xs.size()) {
        if (n_ > kMaxDim) throw std::length_error("Vec: dimension exceeds kMaxDim");
        std::size_t i = 0;
        for (double x : xs) v_[i++] = x;
    }

    std::size_t size() const { return n_; }
    double& operator[](std::size_t i) { assert(i < n_); return v_[i]; }
    double operator[](std::size_t i) const { assert(i < n_); return v_[i]; }

    std::span<const double> span() const { return {v_.data(), n_}; }

    Vec& operator+=(const Vec& o) {
        assert(n_ == o.n_);
        for (std::size_t i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        assert(n_ == o.n_);
        for (std::size_t i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (std::size_t i = 0; i < n_; ++i) v_[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }

private:
    std::array<double, kMaxDim> v_{};
    std::size_t n_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Unit basis vector e_i in dimension n.
inline Vec unit(std::size_t n, std::size_t i) {
    Vec e(n);
    e[i] = 1.0;
    return e;
}

/// Deterministic low-discrepancy sequence (Halton). Used for sign sweeps
/// and validation sampling; a nonzero seed applies a fixed rotation per
/// axis so shuffled runs stay reproducible.
class Halton {
public:
    explicit Halton(std::size_t dim, std::uint64_t seed = 0) : dim_(dim) {
        static constexpr std::array<int, 8> primes{2, 3, 5, 7, 11, 13, 17, 19};
        if (dim > primes.size()) throw std::length_error("Halton: dimension too large");
        for (std::size_t i = 0; i < dim; ++i) {
            base_[i] = primes[i];
            // splitmix-style fixed rotation in [0,1)
            std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (i + 1);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            z ^= z >> 31;
            shift_[i] = seed == 0 ? 0.0 : double(z % 1000000007ull) / 1000000007.0;
        }
    }

    /// i-th point of the sequence (i >= 0), each coordinate in (0,1).
    Vec point(std::uint64_t i) const {
        Vec p(dim_);
        for (std::size_t d = 0; d < dim_; ++d) {
            double f = 1.0, r = 0.0;
            std::uint64_t n = i + 1;  // skip the origin
            while (n > 0) {
                f /= base_[d];
                r += f * double(n % base_[d]);
                n /= base_[d];
            }
            r += shift_[d];
            p[d] = r - std::floor(r);
            if (p[d] == 0.0) p[d] = 0.5 / double(base_[d]);
        }
        return p;
    }

private:
    std::size_t dim_;
    std::array<std::uint64_t, 8> base_{};
    std::array<double, 8> shift_{};
};

/// Least-squares slope of log(y) against log(x); used by local-exponent
/// fits and convergence-order estimates.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need >= 2 matched samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::domain_error("loglog_slope: nonpositive sample");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw std::domain_error("loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace hardy
