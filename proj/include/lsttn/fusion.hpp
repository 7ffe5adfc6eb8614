#pragma once

#include <cstdint>
#include <string>

#include "lsttn/autodiff.hpp"
#include "lsttn/params.hpp"

namespace lsttn {

/// Table-3 ablation variants: which feature families feed the fusion head.
enum class AblationVariant { Full, NoLt, NoP, NoSt, StOnly };

AblationVariant parse_variant(const std::string& name);
std::string variant_name(AblationVariant v);
bool variant_uses_long(AblationVariant v);
bool variant_uses_periodicity(AblationVariant v);
bool variant_uses_short(AblationVariant v);

struct FusionConfig {
	std::int64_t c = 4;       // width of H_long / H_week / H_day
	std::int64_t d_short = 64;
	std::int64_t F = 12;
	std::int64_t h1 = 32;
	std::int64_t h2 = 32;
	std::int64_t h3 = 128;
	AblationVariant variant = AblationVariant::Full;

	std::int64_t inner_width() const {
		std::int64_t w = 0;
		if (variant_uses_long(variant)) w += c;
		if (variant_uses_periodicity(variant)) w += 2 * c;
		return w;
	}
	std::int64_t outer_width() const {
		std::int64_t w = variant == AblationVariant::StOnly ? 0 : h2;
		if (variant_uses_short(variant)) w += d_short;
		return w;
	}
};

/// Two-stage MLP fusion of the long-term, periodic and short-term features
/// into the per-node multi-horizon forecast. Variants shrink the concatenation
/// and instantiate only the parameters they use.
class FusionHead {
public:
	FusionHead(FusionConfig cfg, std::uint64_t seed);

	/// Unused inputs (per variant) must be null. Returns Y_hat [F, V], normalized.
	ad::Var forward(const ad::Var& h_long, const ad::Var& h_week, const ad::Var& h_day,
	                const ad::Var& h_short) const;

	const FusionConfig& config() const { return cfg_; }
	ParamStore& params() { return params_; }
	const ParamStore& params() const { return params_; }

private:
	FusionConfig cfg_;
	ParamStore params_;
};

/// Mean absolute error over valid target entries (normalized values).
ad::Var forecast_loss(const ad::Var& y_hat, const Tensor& y, const std::vector<std::uint8_t>& y_mask);

} // namespace lsttn
