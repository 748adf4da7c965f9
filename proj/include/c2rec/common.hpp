#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace c2rec {

inline constexpr const char* kVersion = "c2rec 0.1.0";

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG wrapper. mt19937_64 output is fixed by the standard;
// all derived draws below avoid std::*_distribution, whose sequences are
// implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw Error("Rng::below: n must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // standard normal via Box-Muller, second value cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Row-major dense matrix of doubles.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    std::size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// y = W x + b, W is (out x in) row-major
inline void affine(const Mat& w, std::span<const double> b, std::span<const double> x,
                   std::span<double> out) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        double s = b.empty() ? 0.0 : b[r];
        for (std::size_t c = 0; c < w.cols; ++c) s += wr[c] * x[c];
        out[r] = s;
    }
}

// x_grad += W^T g
inline void add_transposed(const Mat& w, std::span<const double> g, std::span<double> x_grad) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        const double gr = g[r];
        if (gr == 0.0) continue;
        for (std::size_t c = 0; c < w.cols; ++c) x_grad[c] += gr * wr[c];
    }
}

inline double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// Log verbosity from CCREC_LOG: 0/quiet, 1/info (default), 2/debug.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace c2rec
