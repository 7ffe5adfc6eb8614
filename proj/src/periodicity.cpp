#include "lsttn/periodicity.hpp"

namespace lsttn {

using ad::Var;

Var adaptive_adjacency(const Var& e1, const Var& e2) {
	auto logits = ad::relu(ad::matmul(e1, ad::transpose2d(e2)));
	return ad::softmax_lastdim(logits);
}

Var diffusion_graph_conv(const Var& sx, const Tensor* P_f, const Tensor* P_b, const Var& A_adp,
                         const std::vector<std::array<Var, 3>>& weights, std::int64_t K) {
	if (K < 0) throw ValidationError("diffusion depth K must be >= 0");
	if (static_cast<std::int64_t>(weights.size()) != K + 1)
		throw ValidationError("diffusion: expected K+1 weight triples");
	Var pf_const = P_f ? ad::constant(*P_f) : nullptr;
	Var pb_const = P_b ? ad::constant(*P_b) : nullptr;
	Var xf = sx, xb = sx, xa = sx;
	Var h = nullptr;
	auto accumulate = [&h](const Var& term) { h = h ? ad::add(h, term) : term; };
	for (std::int64_t k = 0; k <= K; ++k) {
		if (k > 0) {
			if (pf_const) xf = ad::matmul(pf_const, xf);
			if (pb_const) xb = ad::matmul(pb_const, xb);
			xa = ad::matmul(A_adp, xa);
		}
		if (weights[static_cast<std::size_t>(k)][0]) accumulate(ad::linear(xf, weights[static_cast<std::size_t>(k)][0]));
		if (weights[static_cast<std::size_t>(k)][1]) accumulate(ad::linear(xb, weights[static_cast<std::size_t>(k)][1]));
		accumulate(ad::linear(xa, weights[static_cast<std::size_t>(k)][2]));
	}
	return h;
}

Var diffusion_graph_conv_seq(const Var& x, const Tensor* P_f, const Tensor* P_b, const Var& A_adp,
                             const std::vector<std::array<Var, 3>>& weights, std::int64_t K) {
	std::int64_t V = x->value.dim(0), T = x->value.dim(1), c = x->value.dim(2);
	auto flat = ad::reshape(x, {V, T * c});
	if (K < 0) throw ValidationError("diffusion depth K must be >= 0");
	Var pf_const = P_f ? ad::constant(*P_f) : nullptr;
	Var pb_const = P_b ? ad::constant(*P_b) : nullptr;
	Var xf = flat, xb = flat, xa = flat;
	Var h = nullptr;
	auto term = [&](const Var& src, const Var& w) {
		return ad::linear(ad::reshape(src, {V, T, c}), w);
	};
	auto accumulate = [&h](const Var& t) { h = h ? ad::add(h, t) : t; };
	for (std::int64_t k = 0; k <= K; ++k) {
		if (k > 0) {
			if (pf_const) xf = ad::matmul(pf_const, xf);
			if (pb_const) xb = ad::matmul(pb_const, xb);
			xa = ad::matmul(A_adp, xa);
		}
		if (weights[static_cast<std::size_t>(k)][0]) accumulate(term(xf, weights[static_cast<std::size_t>(k)][0]));
		if (weights[static_cast<std::size_t>(k)][1]) accumulate(term(xb, weights[static_cast<std::size_t>(k)][1]));
		accumulate(term(xa, weights[static_cast<std::size_t>(k)][2]));
	}
	return h;
}

PeriodicityExtractor::PeriodicityExtractor(PeriodicityConfig cfg, std::uint64_t seed) : cfg_(cfg) {
	if (cfg_.num_nodes < 1) throw ValidationError("periodicity: num_nodes must be positive");
	if (cfg_.K < 0) throw ValidationError("periodicity: K must be >= 0");
	params_.add("per.e1", normal_init({cfg_.num_nodes, cfg_.d_emb}, seed, "per.e1", 0.1));
	params_.add("per.e2", normal_init({cfg_.num_nodes, cfg_.d_emb}, seed, "per.e2", 0.1));
	for (const char* path : {"week", "day"})
		for (std::int64_t k = 0; k <= cfg_.K; ++k) {
			std::string base = std::string("per.") + path + ".k" + std::to_string(k);
			if (cfg_.use_graph) {
				params_.add(base + ".f", xavier_init({cfg_.d_repr, cfg_.channels}, seed, base + ".f"));
				params_.add(base + ".b", xavier_init({cfg_.d_repr, cfg_.channels}, seed, base + ".b"));
			}
			params_.add(base + ".a", xavier_init({cfg_.d_repr, cfg_.channels}, seed, base + ".a"));
		}
}

std::vector<std::array<Var, 3>> PeriodicityExtractor::weight_set(const std::string& path) const {
	std::vector<std::array<Var, 3>> w;
	for (std::int64_t k = 0; k <= cfg_.K; ++k) {
		std::string base = "per." + path + ".k" + std::to_string(k);
		Var f = cfg_.use_graph ? params_.get(base + ".f") : nullptr;
		Var b = cfg_.use_graph ? params_.get(base + ".b") : nullptr;
		w.push_back({f, b, params_.get(base + ".a")});
	}
	return w;
}

Var PeriodicityExtractor::adaptive() const {
	return adaptive_adjacency(params_.get("per.e1"), params_.get("per.e2"));
}

std::pair<Var, Var> PeriodicityExtractor::forward(const Var& s, const PeriodicIndices& idx,
                                                  const TrafficGraph* graph) const {
	std::int64_t V = s->value.dim(0), N = s->value.dim(1), d = s->value.dim(2);
	if (V != cfg_.num_nodes || d != cfg_.d_repr) throw LayoutError("periodicity: input shape mismatch");
	if (idx.week < 0 || idx.week >= N || idx.day < 0 || idx.day >= N)
		throw ValidationError("periodicity: periodic index out of range");
	auto a_adp = adaptive();
	const Tensor* pf = (cfg_.use_graph && graph) ? &graph->P_f : nullptr;
	const Tensor* pb = (cfg_.use_graph && graph) ? &graph->P_b : nullptr;
	auto s_week = ad::reshape(ad::gather_axis1(s, {idx.week}), {V, d});
	auto s_day = ad::reshape(ad::gather_axis1(s, {idx.day}), {V, d});
	auto h_week = diffusion_graph_conv(s_week, pf, pb, a_adp, weight_set("week"), cfg_.K);
	auto h_day = diffusion_graph_conv(s_day, pf, pb, a_adp, weight_set("day"), cfg_.K);
	return {h_week, h_day};
}

} // namespace lsttn
