#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gtsim {

// Exit-code conventions shared by the library and the CLI:
//   1 invalid input, 2 verification failure, 3 divergence.
struct SimError : std::runtime_error {
    int code;
    SimError(int code_, const std::string& what_) : std::runtime_error(what_), code(code_) {}
};

inline SimError invalid_input(const std::string& msg) { return SimError(1, msg); }
inline SimError verification_failure(const std::string& msg) { return SimError(2, msg); }
inline SimError divergence(const std::string& msg) { return SimError(3, msg); }

// --- Counter-based RNG -------------------------------------------------------
//
// Gradient noise must be a pure function of (seed, worker, step, index) so that
// streams are reproducible and independent of evaluation order.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Key for one (seed, stream, step) tuple; draw values by hashing key + counter.
inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
    std::uint64_t k = splitmix64(seed ^ 0x8f462907e7314a4dULL);
    k = splitmix64(k ^ splitmix64(stream ^ 0x2545f4914f6cdd1dULL));
    k = splitmix64(k ^ splitmix64(step ^ 0x9e6c63d0a16e3ad9ULL));
    return k;
}

// Uniform in (0, 1]: suitable as the log argument in Box-Muller.
inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

// Counter-based standard-normal stream. Box-Muller produces values in pairs;
// the pair index selects the cos/sin branch so that normal(k) is still a pure
// function of (key, k).
struct NormalStream {
    std::uint64_t key;
    explicit NormalStream(std::uint64_t key_) : key(key_) {}

    double operator()(std::uint64_t k) const {
        const std::uint64_t pair = k >> 1;
        const double u1 = u64_to_unit(splitmix64(key + 2 * pair));
        const double u2 = u64_to_unit(splitmix64(key + 2 * pair + 1));
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        return (k & 1) ? r * std::sin(a) : r * std::cos(a);
    }

    // Fill len consecutive values starting at counter 0 (one log/sincos per pair).
    void fill(double* out, std::uint64_t len) const {
        std::uint64_t k = 0;
        while (k + 1 < len) {
            const double u1 = u64_to_unit(splitmix64(key + k));
            const double u2 = u64_to_unit(splitmix64(key + k + 1));
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double a = 2.0 * M_PI * u2;
            out[k] = r * std::cos(a);
            out[k + 1] = r * std::sin(a);
            k += 2;
        }
        if (k < len) out[k] = (*this)(k);
    }
};

// Fixed-width float formatting (17 significant digits) used everywhere CSV is
// emitted, so identical configs produce byte-identical files.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace gtsim
