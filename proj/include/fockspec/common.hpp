#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fockspec {

inline constexpr const char* kVersion = "0.3.0";

using cdouble = std::complex<double>;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& msg, double achieved)
        : Error(msg), achieved_error(achieved) {}
    double achieved_error;
};

class BracketError : public Error {
public:
    explicit BracketError(const std::string& msg) : Error(msg) {}
};

class TruncationError : public Error {
public:
    TruncationError(const std::string& msg, double estimate)
        : Error(msg), trunc_estimate(estimate) {}
    double trunc_estimate;
};

// Pairwise reduction; error grows like log(n) in ulps instead of n.
template <typename T>
T pairwise_sum(std::span<const T> v) {
    const std::size_t n = v.size();
    if (n == 0) return T{};
    if (n <= 8) {
        T s = v[0];
        for (std::size_t i = 1; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(std::span<const T>(v));
}

class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Least squares y = a + b x with the usual residual-based stderr on b.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

std::string format_g17(double v);

}  // namespace fockspec
