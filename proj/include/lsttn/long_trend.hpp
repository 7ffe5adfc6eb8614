#pragma once

#include <cstdint>
#include <vector>

#include "lsttn/autodiff.hpp"
#include "lsttn/params.hpp"

namespace lsttn {

struct LongTrendConfig {
	std::int64_t n_sub = 336;
	std::int64_t d_repr = 64;
	std::int64_t channels = 4;
	std::int64_t kernel = 2;
};

/// Stacked dilated 1D convolutions (gelu + max pooling) over the subseries
/// axis, collapsing the temporal length to 1. Layer i uses dilation 2^i
/// (1-based); when the doubled dilation no longer fits the remaining length,
/// it is capped to the largest power of two that does.
class LongTrendExtractor {
public:
	struct LayerPlan {
		std::int64_t dilation;
		std::int64_t in_len;
		std::int64_t conv_len;
		std::int64_t out_len;
	};

	LongTrendExtractor(LongTrendConfig cfg, std::uint64_t seed);

	/// S [V, N_sub, d_repr] -> H_long [V, channels]
	ad::Var forward(const ad::Var& s) const;

	const std::vector<LayerPlan>& plan() const { return plan_; }
	const LongTrendConfig& config() const { return cfg_; }
	ParamStore& params() { return params_; }
	const ParamStore& params() const { return params_; }

	static std::vector<LayerPlan> make_plan(std::int64_t n_sub, std::int64_t kernel);

private:
	LongTrendConfig cfg_;
	std::vector<LayerPlan> plan_;
	ParamStore params_;
};

} // namespace lsttn
