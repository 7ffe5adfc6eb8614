#include "lsttn/long_trend.hpp"

namespace lsttn {

std::vector<LongTrendExtractor::LayerPlan> LongTrendExtractor::make_plan(std::int64_t n_sub, std::int64_t kernel) {
	if (n_sub < 2) throw LayoutError("long trend: need at least 2 subseries");
	if (kernel < 2) throw ValidationError("long trend: kernel must be >= 2");
	std::vector<LayerPlan> plan;
	std::int64_t len = n_sub;
	std::int64_t i = 1;
	while (len > 1) {
		std::int64_t d = std::int64_t{1} << i; // 2^i, 1-based layer index
		while (d > 1 && (kernel - 1) * d >= len) d >>= 1;
		if ((kernel - 1) * d >= len) throw LayoutError("long trend: cannot shrink length " + std::to_string(len));
		std::int64_t conv_len = len - (kernel - 1) * d;
		std::int64_t out_len = conv_len == 1 ? 1 : conv_len / 2;
		plan.push_back({d, len, conv_len, out_len});
		len = out_len;
		++i;
		if (plan.size() > 64) throw LayoutError("long trend: layer plan does not terminate");
	}
	return plan;
}

LongTrendExtractor::LongTrendExtractor(LongTrendConfig cfg, std::uint64_t seed) : cfg_(cfg) {
	plan_ = make_plan(cfg_.n_sub, cfg_.kernel);
	for (std::size_t i = 0; i < plan_.size(); ++i) {
		std::int64_t cin = i == 0 ? cfg_.d_repr : cfg_.channels;
		std::string name = "lt.conv" + std::to_string(i) + ".w";
		params_.add(name, xavier_init({cfg_.kernel, cin, cfg_.channels}, seed, name));
	}
}

ad::Var LongTrendExtractor::forward(const ad::Var& s) const {
	if (s->value.rank() != 3 || s->value.dim(1) != cfg_.n_sub || s->value.dim(2) != cfg_.d_repr)
		throw LayoutError("long trend: input shape " + s->value.shape_str() + " does not match layout");
	auto x = s;
	for (std::size_t i = 0; i < plan_.size(); ++i) {
		auto w = params_.get("lt.conv" + std::to_string(i) + ".w");
		x = ad::maxpool1d(ad::gelu(ad::dilated_conv1d(x, w, plan_[i].dilation)));
	}
	std::int64_t V = s->value.dim(0);
	return ad::reshape(x, {V, cfg_.channels});
}

} // namespace lsttn
