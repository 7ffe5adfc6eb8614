#include "lsttn/fusion.hpp"

namespace lsttn {

using ad::Var;

AblationVariant parse_variant(const std::string& name) {
	if (name == "full") return AblationVariant::Full;
	if (name == "no_lt") return AblationVariant::NoLt;
	if (name == "no_p") return AblationVariant::NoP;
	if (name == "no_st") return AblationVariant::NoSt;
	if (name == "st_only") return AblationVariant::StOnly;
	throw ConfigError("unknown ablation variant '" + name + "' (full, no_lt, no_p, no_st, st_only)");
}

std::string variant_name(AblationVariant v) {
	switch (v) {
		case AblationVariant::Full: return "full";
		case AblationVariant::NoLt: return "no_lt";
		case AblationVariant::NoP: return "no_p";
		case AblationVariant::NoSt: return "no_st";
		case AblationVariant::StOnly: return "st_only";
	}
	throw ValidationError("bad variant enum");
}

bool variant_uses_long(AblationVariant v) {
	return v == AblationVariant::Full || v == AblationVariant::NoP || v == AblationVariant::NoSt;
}
bool variant_uses_periodicity(AblationVariant v) {
	return v == AblationVariant::Full || v == AblationVariant::NoLt || v == AblationVariant::NoSt;
}
bool variant_uses_short(AblationVariant v) { return v != AblationVariant::NoSt; }

FusionHead::FusionHead(FusionConfig cfg, std::uint64_t seed) : cfg_(cfg) {
	if (cfg_.F < 1) throw ValidationError("fusion: F must be positive");
	if (cfg_.variant != AblationVariant::StOnly) {
		std::int64_t in = cfg_.inner_width();
		if (in < 1) throw ValidationError("fusion: variant leaves no inner features");
		params_.add("fuse.inner.w1", xavier_init({in, cfg_.h1}, seed, "fuse.inner.w1"));
		params_.add("fuse.inner.b1", Tensor::zeros({cfg_.h1}));
		params_.add("fuse.inner.w2", xavier_init({cfg_.h1, cfg_.h2}, seed, "fuse.inner.w2"));
		params_.add("fuse.inner.b2", Tensor::zeros({cfg_.h2}));
	}
	params_.add("fuse.outer.w1", xavier_init({cfg_.outer_width(), cfg_.h3}, seed, "fuse.outer.w1"));
	params_.add("fuse.outer.b1", Tensor::zeros({cfg_.h3}));
	params_.add("fuse.outer.w2", xavier_init({cfg_.h3, cfg_.F}, seed, "fuse.outer.w2"));
	params_.add("fuse.outer.b2", Tensor::zeros({cfg_.F}));
}

Var FusionHead::forward(const Var& h_long, const Var& h_week, const Var& h_day, const Var& h_short) const {
	auto expect = [](const Var& v, bool used, const char* what) {
		if (used && !v) throw ValidationError(std::string("fusion: missing input ") + what);
		if (!used && v) throw ValidationError(std::string("fusion: unexpected input ") + what + " for this variant");
	};
	expect(h_long, variant_uses_long(cfg_.variant), "H_long");
	expect(h_week, variant_uses_periodicity(cfg_.variant), "H_week");
	expect(h_day, variant_uses_periodicity(cfg_.variant), "H_day");
	expect(h_short, variant_uses_short(cfg_.variant), "H_short");

	std::vector<Var> outer_in;
	if (cfg_.variant != AblationVariant::StOnly) {
		std::vector<Var> inner_in;
		if (h_long) inner_in.push_back(h_long);
		if (h_week) inner_in.push_back(h_week);
		if (h_day) inner_in.push_back(h_day);
		auto cat = inner_in.size() == 1 ? inner_in[0] : ad::concat_lastdim(inner_in);
		auto z1 = ad::gelu(ad::linear(cat, params_.get("fuse.inner.w1"), params_.get("fuse.inner.b1")));
		auto z2 = ad::gelu(ad::linear(z1, params_.get("fuse.inner.w2"), params_.get("fuse.inner.b2")));
		outer_in.push_back(z2);
	}
	if (h_short) outer_in.push_back(h_short);
	auto cat2 = outer_in.size() == 1 ? outer_in[0] : ad::concat_lastdim(outer_in);
	auto z3 = ad::gelu(ad::linear(cat2, params_.get("fuse.outer.w1"), params_.get("fuse.outer.b1")));
	auto y_vf = ad::linear(z3, params_.get("fuse.outer.w2"), params_.get("fuse.outer.b2")); // [V, F]
	return ad::transpose2d(y_vf);                                                           // [F, V]
}

Var forecast_loss(const Var& y_hat, const Tensor& y, const std::vector<std::uint8_t>& y_mask) {
	if (y_hat->value.shape != y.shape) throw LayoutError("forecast_loss: shape mismatch");
	if (y_mask.size() != y.data.size()) throw LayoutError("forecast_loss: mask size mismatch");
	Tensor m(y.shape);
	for (std::int64_t i = 0; i < y.size(); ++i) m.at(i) = y_mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
	auto diff = ad::sub(y_hat, ad::constant(y));
	return ad::masked_abs_mean(diff, std::move(m));
}

} // namespace lsttn
