#pragma once

// Seeded generator of synthetic run logs.
//
// Combinations sit on a grid over base_lr x max_lr (decimal ladder
// 0.0001, 0.0005, 0.001, 0.005, ...) crossed with cyclic_mode. The accuracy
// of a (combination, task, fold) at epoch e is
//
//   A * (1 - exp(-e / tau)) + task_offset + noise_sd * N(0, 1)
//
// clamped to [0, 1], with
//   A           = 0.55 + 0.4 * exp(-(x + 2.5)^2 / 2 - (y + 3)^2 / 4) + mode_gain
//   tau         = (1 + 4 / (1 + 10^(x + 3))) * mode_tau
//   task_offset = 0.04 * (t / (n_tasks - 1) - 0.5), 0 for a single task
// where x = log10(base_lr) and y = log10(max_lr).
//
// Every (combination, task, fold) owns an independent random stream: a
// std::mt19937_64 seeded with splitmix64(seed, c, t, f). Gaussians come from
// Box-Muller over 53-bit uniforms, so output is identical across standard
// libraries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "mtmc/error.hpp"
#include "mtmc/evaluation.hpp"

namespace mtmc {

struct SynthConfig {
    long n_combinations = 100;
    long n_folds = 10;
    long n_epochs = 15;
    long n_tasks = 5;
    std::uint64_t seed = 42;
    double noise_sd = 0.02;

    void validate() const {
        if (n_combinations < 1) throw Error(ErrorKind::config, "n_combinations must be >= 1");
        if (n_folds < 2) throw Error(ErrorKind::config, "n_folds must be >= 2 (sample variance needs two folds)");
        if (n_epochs < 1) throw Error(ErrorKind::config, "n_epochs must be >= 1");
        if (n_tasks < 1) throw Error(ErrorKind::config, "n_tasks must be >= 1");
        if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw Error(ErrorKind::config, "noise_sd must be >= 0");
    }
};

struct SynthData {
    std::vector<CombinationSpec> specs;
    std::vector<RunRecord> records;
};

namespace synth_detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, long c, long t, long f) {
    std::uint64_t state = seed;
    std::uint64_t h = splitmix64(state);
    for (long part : {c, t, f}) {
        state = h ^ static_cast<std::uint64_t>(part);
        h = splitmix64(state);
    }
    return h;
}

class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Decimal ladder 0.0001, 0.0005, 0.001, 0.005, 0.01, ... as exact strings.
inline std::string ladder_value(long level) {
    const char digit = level % 2 == 0 ? '1' : '5';
    const long exponent = -4 + level / 2;
    if (exponent < 0) return "0." + std::string(static_cast<std::size_t>(-exponent - 1), '0') + digit;
    return digit + std::string(static_cast<std::size_t>(exponent), '0');
}

inline std::string padded(const char* prefix, long value, long count) {
    std::size_t width = 1;
    for (long v = count - 1; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(value);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

struct Mode {
    const char* name;
    double gain;
    double tau_scale;
};

inline constexpr std::array<Mode, 3> modes{{
    {"triangular", 0.0, 1.0},
    {"triangular2", 0.01, 1.25},
    {"exp_range", -0.01, 0.8},
}};

} // namespace synth_detail

inline SynthData generate(const SynthConfig& config) {
    using namespace synth_detail;
    config.validate();

    const long cells = (config.n_combinations + 2) / 3;
    long side = 1;
    while (side * side < cells) ++side;

    SynthData out;
    out.specs.reserve(static_cast<std::size_t>(config.n_combinations));
    out.records.reserve(static_cast<std::size_t>(config.n_combinations * config.n_tasks * config.n_folds *
                                                 config.n_epochs));

    for (long c = 0; c < config.n_combinations; ++c) {
        const Mode& mode = modes[static_cast<std::size_t>(c % 3)];
        const long cell = c / 3;
        const std::string base_lr = ladder_value(cell % side);
        const std::string max_lr = ladder_value(cell / side);

        CombinationSpec spec;
        spec.combination_id = padded("c", c, config.n_combinations);
        spec.hyperparameters = {{"base_lr", base_lr}, {"max_lr", max_lr}, {"cyclic_mode", mode.name}};

        const double x = std::log10(std::strtod(base_lr.c_str(), nullptr));
        const double y = std::log10(std::strtod(max_lr.c_str(), nullptr));
        const double amplitude =
            0.55 + 0.4 * std::exp(-(x + 2.5) * (x + 2.5) / 2.0 - (y + 3.0) * (y + 3.0) / 4.0) + mode.gain;
        const double tau = (1.0 + 4.0 / (1.0 + std::pow(10.0, x + 3.0))) * mode.tau_scale;

        for (long t = 0; t < config.n_tasks; ++t) {
            const double offset =
                config.n_tasks > 1 ? 0.04 * (static_cast<double>(t) / static_cast<double>(config.n_tasks - 1) - 0.5)
                                   : 0.0;
            const std::string task_id = padded("task", t, config.n_tasks);
            for (long f = 0; f < config.n_folds; ++f) {
                const std::string fold_id = padded("fold", f, config.n_folds);
                Gaussian noise(stream_seed(config.seed, c, t, f));
                for (long e = 1; e <= config.n_epochs; ++e) {
                    double acc = amplitude * (1.0 - std::exp(-static_cast<double>(e) / tau)) + offset;
                    if (config.noise_sd > 0.0) acc += config.noise_sd * noise();
                    acc = std::clamp(acc, 0.0, 1.0);
                    out.records.push_back({spec.combination_id, task_id, fold_id, e, acc});
                }
            }
        }
        out.specs.push_back(std::move(spec));
    }
    return out;
}

} // namespace mtmc
