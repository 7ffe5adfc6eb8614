#include "lsttn/mst.hpp"

#include <cmath>

namespace lsttn {

using ad::Var;

Var dropout(const Var& x, double p, Rng* rng) {
	if (!rng || p <= 0.0) return x;
	if (p >= 1.0) throw ValidationError("dropout rate must be < 1");
	Tensor m(x->value.shape);
	double keep = 1.0 - p;
	for (auto& v : m.data) v = rng->uniform(0.0, 1.0) < p ? 0.0 : 1.0 / keep;
	return ad::mul(x, ad::constant(std::move(m)));
}

Tensor transpose01(const Tensor& t) {
	if (t.rank() != 3) throw LayoutError("transpose01: expected rank-3 tensor");
	std::int64_t A = t.dim(0), B = t.dim(1), C = t.dim(2);
	Tensor out({B, A, C});
	for (std::int64_t a = 0; a < A; ++a)
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t c = 0; c < C; ++c) out.at(b, a, c) = t.at(a, b, c);
	return out;
}

MST::MST(MSTConfig cfg, std::uint64_t seed) : cfg_(cfg) {
	cfg_.validate();
	const std::int64_t d = cfg_.d_repr, ff = cfg_.ff_dim();
	params_.add("mst.proj.w", xavier_init({cfg_.S, d}, seed, "mst.proj.w"));
	params_.add("mst.pos", normal_init({cfg_.n_sub, d}, seed, "mst.pos", 0.02));
	params_.add("mst.mask_token", normal_init({d}, seed, "mst.mask_token", 0.02));
	auto add_layer = [&](const std::string& p) {
		params_.add(p + ".ln1.g", Tensor::full({d}, 1.0));
		params_.add(p + ".ln1.b", Tensor::zeros({d}));
		params_.add(p + ".wq", xavier_init({d, d}, seed, p + ".wq"));
		params_.add(p + ".bq", Tensor::zeros({d}));
		params_.add(p + ".wk", xavier_init({d, d}, seed, p + ".wk"));
		params_.add(p + ".bk", Tensor::zeros({d}));
		params_.add(p + ".wv", xavier_init({d, d}, seed, p + ".wv"));
		params_.add(p + ".bv", Tensor::zeros({d}));
		params_.add(p + ".wo", xavier_init({d, d}, seed, p + ".wo"));
		params_.add(p + ".bo", Tensor::zeros({d}));
		params_.add(p + ".ln2.g", Tensor::full({d}, 1.0));
		params_.add(p + ".ln2.b", Tensor::zeros({d}));
		params_.add(p + ".ff.w1", xavier_init({d, ff}, seed, p + ".ff.w1"));
		params_.add(p + ".ff.b1", Tensor::zeros({ff}));
		params_.add(p + ".ff.w2", xavier_init({ff, d}, seed, p + ".ff.w2"));
		params_.add(p + ".ff.b2", Tensor::zeros({d}));
	};
	for (std::int64_t i = 0; i < cfg_.n_layers; ++i) add_layer("mst.enc" + std::to_string(i));
	params_.add("mst.lnf.g", Tensor::full({d}, 1.0));
	params_.add("mst.lnf.b", Tensor::zeros({d}));
	add_layer("mst.head");
	params_.add("mst.head.lnf.g", Tensor::full({d}, 1.0));
	params_.add("mst.head.lnf.b", Tensor::zeros({d}));
	params_.add("mst.head.out.w", xavier_init({d, cfg_.S}, seed, "mst.head.out.w"));
	params_.add("mst.head.out.b", Tensor::zeros({cfg_.S}));
}

Var MST::embed_subseries(const Tensor& tokens) const {
	if (tokens.rank() != 3 || tokens.dim(0) != cfg_.n_sub || tokens.dim(2) != cfg_.S)
		throw LayoutError("embed_subseries: token shape " + tokens.shape_str() + " does not match layout");
	return embed_subseries(ad::constant(transpose01(tokens)));
}

Var MST::embed_subseries(const Var& tokens_vns) const {
	auto e = ad::linear(tokens_vns, params_.get("mst.proj.w"));
	return ad::add_broadcast0(e, params_.get("mst.pos"));
}

Var MST::encoder_layer(const Var& x, const std::string& prefix, Rng* dropout_rng) const {
	const std::int64_t H = cfg_.n_heads;
	const std::int64_t dh = cfg_.d_repr / H;
	auto h = ad::layer_norm(x, params_.get(prefix + ".ln1.g"), params_.get(prefix + ".ln1.b"));
	auto q = ad::split_heads(ad::linear(h, params_.get(prefix + ".wq"), params_.get(prefix + ".bq")), H);
	auto k = ad::split_heads(ad::linear(h, params_.get(prefix + ".wk"), params_.get(prefix + ".bk")), H);
	auto v = ad::split_heads(ad::linear(h, params_.get(prefix + ".wv"), params_.get(prefix + ".bv")), H);
	auto att = ad::softmax_lastdim(ad::scale(ad::bmm(q, ad::transpose_last2(k)), 1.0 / std::sqrt(static_cast<double>(dh))));
	att = dropout(att, cfg_.dropout, dropout_rng);
	auto o = ad::merge_heads(ad::bmm(att, v), H);
	o = dropout(ad::linear(o, params_.get(prefix + ".wo"), params_.get(prefix + ".bo")), cfg_.dropout, dropout_rng);
	auto x1 = ad::add(x, o);
	auto h2 = ad::layer_norm(x1, params_.get(prefix + ".ln2.g"), params_.get(prefix + ".ln2.b"));
	auto f = ad::gelu(ad::linear(h2, params_.get(prefix + ".ff.w1"), params_.get(prefix + ".ff.b1")));
	f = dropout(ad::linear(f, params_.get(prefix + ".ff.w2"), params_.get(prefix + ".ff.b2")), cfg_.dropout, dropout_rng);
	auto x2 = ad::add(x1, f);
	if (!ad::all_finite(x2->value)) throw NumericError("non-finite activation in " + prefix);
	return x2;
}

Var MST::strl_forward(const Var& x, Rng* dropout_rng) const {
	if (x->value.dim(1) < 1) throw LayoutError("strl_forward: need at least one token");
	auto h = x;
	for (std::int64_t i = 0; i < cfg_.n_layers; ++i)
		h = encoder_layer(h, "mst.enc" + std::to_string(i), dropout_rng);
	return ad::layer_norm(h, params_.get("mst.lnf.g"), params_.get("mst.lnf.b"));
}

Var MST::task_head(const Var& s_unmasked, const MaskSets& sets, Rng* dropout_rng) const {
	const std::int64_t N = cfg_.n_sub;
	const std::int64_t V = s_unmasked->value.dim(0);
	if (static_cast<std::int64_t>(sets.masked.size() + sets.unmasked.size()) != N)
		throw ValidationError("task_head: mask sets do not partition the subseries index range");
	if (s_unmasked->value.dim(1) != static_cast<std::int64_t>(sets.unmasked.size()))
		throw LayoutError("task_head: unmasked representation count mismatch");
	auto placed_u = ad::scatter_axis1(s_unmasked, sets.unmasked, N);
	// masked slots get the mask token plus the positional embedding of the slot
	auto pos_m = ad::gather_rows(params_.get("mst.pos"), sets.masked);
	auto mask_rows = ad::add_vec(pos_m, params_.get("mst.mask_token"));
	auto placed_m = ad::scatter_axis1(ad::tile0(mask_rows, V), sets.masked, N);
	auto full = ad::add(placed_u, placed_m);
	auto h = encoder_layer(full, "mst.head", dropout_rng);
	h = ad::layer_norm(h, params_.get("mst.head.lnf.g"), params_.get("mst.head.lnf.b"));
	return ad::linear(h, params_.get("mst.head.out.w"), params_.get("mst.head.out.b"));
}

Var MST::pretrain_loss(const Var& x_hat, const Tensor& tokens, const MaskSets& sets,
                       const std::vector<std::uint8_t>& x_mask) const {
	const std::int64_t N = cfg_.n_sub, S = cfg_.S;
	const std::int64_t V = tokens.dim(1);
	if (x_hat->value.shape != std::vector<std::int64_t>{V, N, S})
		throw LayoutError("pretrain_loss: reconstruction shape mismatch");
	auto target = ad::constant(transpose01(tokens)); // [V,N,S]
	auto diff = ad::sub(x_hat, target);
	Tensor m({V, N, S});
	for (auto j : sets.masked)
		for (std::int64_t v = 0; v < V; ++v)
			for (std::int64_t s = 0; s < S; ++s) {
				std::int64_t t = j * S + s;
				m.at(v, j, s) = x_mask[static_cast<std::size_t>(t * V + v)] ? 1.0 : 0.0;
			}
	return ad::masked_abs_mean(diff, std::move(m));
}

Var MST::reconstruct(const Tensor& tokens, const MaskSets& sets, Rng* dropout_rng) const {
	Tensor tv = transpose01(tokens); // [V,N,S]
	auto all = ad::constant(std::move(tv));
	auto emb = embed_subseries(all);
	auto unmasked = ad::gather_axis1(emb, sets.unmasked);
	auto s_unmasked = strl_forward(unmasked, dropout_rng);
	return task_head(s_unmasked, sets, dropout_rng);
}

Tensor MST::encode_all(const Tensor& tokens) const {
	auto s = encode_all_var(tokens);
	return transpose01(s->value); // [N,V,d]
}

Var MST::encode_all_var(const Tensor& tokens) const {
	auto emb = embed_subseries(tokens);
	return strl_forward(emb, nullptr);
}

} // namespace lsttn
