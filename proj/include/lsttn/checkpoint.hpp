#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include "lsttn/params.hpp"
#include "lsttn/tensor.hpp"

namespace lsttn {

/// Self-describing binary container (CBOR) holding the config snapshot,
/// normalizer statistics, named parameter tensors, and optimizer state.
/// Doubles are stored bit-exact.
struct Checkpoint {
	static constexpr int kVersion = 1;

	int version = kVersion;
	std::string stage;       // "pretrain" or "forecast"
	std::string config_text; // verbatim pipeline config
	double norm_mean = 0.0;
	double norm_std = 1.0;

	// layout metadata for compatibility checks
	std::int64_t L = 0, S = 0, F = 0, steps_per_day = 0;
	std::int64_t d_repr = 0, n_layers = 0, n_heads = 0;

	std::string stgnn;   // forecast stage
	std::string variant; // forecast stage

	std::map<std::string, Tensor> tensors;

	// Adam state
	std::map<std::string, Tensor> opt_m, opt_v;
	std::int64_t opt_t = 0;

	std::int64_t epoch = 0;
	double best_val = std::numeric_limits<double>::infinity();

	void save(const std::string& path) const;
	static Checkpoint load(const std::string& path);

	void store_params(const ParamStore& store);
	/// Copies stored tensors into matching parameters; throws on shape mismatch
	/// or missing names.
	void restore_params(ParamStore& store, const std::string& prefix = "") const;
};

} // namespace lsttn
