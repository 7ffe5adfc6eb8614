#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace lsttn {

/// Deterministic RNG with stable stream derivation. Derived streams depend only
/// on (base seed, label), not on creation order, so parameter initialization is
/// reproducible regardless of module construction sequence.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	std::mt19937_64& engine() { return engine_; }

	double uniform(double lo, double hi) {
		std::uniform_real_distribution<double> d(lo, hi);
		return d(engine_);
	}

	double normal(double mean, double stddev) {
		std::normal_distribution<double> d(mean, stddev);
		return d(engine_);
	}

	std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) { // inclusive
		std::uniform_int_distribution<std::int64_t> d(lo, hi);
		return d(engine_);
	}

	static std::uint64_t derive(std::uint64_t base, const std::string& label) {
		// FNV-1a over the label, mixed with the base seed.
		std::uint64_t h = 14695981039346656037ull ^ base;
		for (unsigned char c : label) {
			h ^= c;
			h *= 1099511628211ull;
		}
		h ^= h >> 33;
		h *= 0xff51afd7ed558ccdull;
		h ^= h >> 33;
		return h;
	}

	static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
		return derive(base, "stream:" + std::to_string(stream));
	}

private:
	std::mt19937_64 engine_;
};

} // namespace lsttn
