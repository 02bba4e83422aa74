#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace femnn {

// Invalid user-supplied parameters (mesh sizes, config files, CLI values).
struct ConfigError : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

// Inconsistent objects passed together (non-nested meshes, size mismatches).
struct StructuralError : std::logic_error {
	using std::logic_error::logic_error;
};

// Iterative solver failed to reach the requested tolerance.
struct SolveError : std::runtime_error {
	SolveError(const std::string& what, double rel_residual, int iterations)
	    : std::runtime_error(what), rel_residual(rel_residual), iterations(iterations) {}

	double rel_residual;
	int iterations;
};

// splitmix64 step; used to derive independent child seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
	std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
	return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
	return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n); plain modulo, bias is irrelevant for shuffling.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
	return rng() % n;
}

}  // namespace femnn
