#include "lsttn/short_trend.hpp"

#include <map>

#include "lsttn/mst.hpp" // dropout
#include "lsttn/periodicity.hpp"

namespace lsttn {

using ad::Var;

namespace {

std::map<std::string, ShortTrendFactory>& registry() {
	static std::map<std::string, ShortTrendFactory> r;
	return r;
}

struct RegisterBuiltins {
	RegisterBuiltins() {
		registry()["ref_gwnet"] = [](const ShortTrendConfig& cfg, std::uint64_t seed) {
			return std::make_unique<RefGWNet>(cfg, seed);
		};
	}
} register_builtins;

} // namespace

void register_stgnn(const std::string& name, ShortTrendFactory factory) {
	if (registry().count(name)) throw ValidationError("stgnn '" + name + "' already registered");
	registry()[name] = std::move(factory);
}

std::unique_ptr<ShortTrendModel> construct_stgnn(const std::string& name, const ShortTrendConfig& cfg,
                                                 std::uint64_t seed) {
	auto it = registry().find(name);
	if (it == registry().end()) {
		std::string known;
		for (const auto& [k, v] : registry()) known += (known.empty() ? "" : ", ") + k;
		throw ConfigError("unknown stgnn '" + name + "'; registered: " + known);
	}
	return it->second(cfg, seed);
}

std::vector<std::string> registered_stgnns() {
	std::vector<std::string> out;
	for (const auto& [k, v] : registry()) out.push_back(k);
	return out;
}

RefGWNet::RefGWNet(ShortTrendConfig cfg, std::uint64_t seed) : cfg_(cfg) {
	if (cfg_.num_nodes < 1) throw ValidationError("ref_gwnet: num_nodes must be positive");
	if (cfg_.S < 2) throw ValidationError("ref_gwnet: short window too small");
	// Doubling dilations; the receptive field 1 + sum(d_i) must cover all S steps.
	std::int64_t rf = 1;
	for (std::int64_t i = 0; i < cfg_.blocks; ++i) {
		std::int64_t d = std::int64_t{1} << i;
		dilations_.push_back(d);
		rf += d;
	}
	if (rf < cfg_.S)
		throw ValidationError("ref_gwnet: receptive field " + std::to_string(rf) + " does not cover S=" +
		                      std::to_string(cfg_.S) + "; increase blocks");
	const std::int64_t ch = cfg_.channels;
	params_.add("st.in.w", xavier_init({1, ch}, seed, "st.in.w"));
	params_.add("st.in.b", Tensor::zeros({ch}));
	params_.add("st.e1", normal_init({cfg_.num_nodes, cfg_.d_emb}, seed, "st.e1", 0.1));
	params_.add("st.e2", normal_init({cfg_.num_nodes, cfg_.d_emb}, seed, "st.e2", 0.1));
	for (std::int64_t i = 0; i < cfg_.blocks; ++i) {
		std::string b = "st.blk" + std::to_string(i);
		params_.add(b + ".filter.w", xavier_init({2, ch, ch}, seed, b + ".filter.w"));
		params_.add(b + ".gate.w", xavier_init({2, ch, ch}, seed, b + ".gate.w"));
		params_.add(b + ".skip.w", xavier_init({ch, cfg_.d_short}, seed, b + ".skip.w"));
		for (std::int64_t k = 0; k <= cfg_.K; ++k) {
			std::string base = b + ".gc.k" + std::to_string(k);
			if (cfg_.use_graph) {
				params_.add(base + ".f", xavier_init({ch, ch}, seed, base + ".f"));
				params_.add(base + ".b", xavier_init({ch, ch}, seed, base + ".b"));
			}
			params_.add(base + ".a", xavier_init({ch, ch}, seed, base + ".a"));
		}
	}
	params_.add("st.end.w", xavier_init({cfg_.d_short, cfg_.d_short}, seed, "st.end.w"));
	params_.add("st.end.b", Tensor::zeros({cfg_.d_short}));
}

Var RefGWNet::forward(const TrafficGraph* graph, const Tensor& x_short, Rng* dropout_rng) const {
	if (x_short.rank() != 2 || x_short.dim(0) != cfg_.S || x_short.dim(1) != cfg_.num_nodes)
		throw LayoutError("ref_gwnet: expected x_short [S, V], got " + x_short.shape_str());
	const std::int64_t S = cfg_.S, V = cfg_.num_nodes, ch = cfg_.channels;
	Tensor xin({V, S, 1});
	for (std::int64_t t = 0; t < S; ++t)
		for (std::int64_t v = 0; v < V; ++v) xin.at(v, t, 0) = x_short.at(t, v);
	auto x = ad::linear(ad::constant(std::move(xin)), params_.get("st.in.w"), params_.get("st.in.b"));
	auto a_adp = adaptive_adjacency(params_.get("st.e1"), params_.get("st.e2"));
	const Tensor* pf = (cfg_.use_graph && graph) ? &graph->P_f : nullptr;
	const Tensor* pb = (cfg_.use_graph && graph) ? &graph->P_b : nullptr;

	Var skip_sum = nullptr;
	for (std::int64_t i = 0; i < cfg_.blocks; ++i) {
		std::string b = "st.blk" + std::to_string(i);
		std::int64_t d = dilations_[static_cast<std::size_t>(i)];
		auto padded = ad::pad_axis1_front(x, d); // causal: length preserved
		auto filt = ad::tanh_(ad::dilated_conv1d(padded, params_.get(b + ".filter.w"), d));
		auto gate = ad::sigmoid_(ad::dilated_conv1d(padded, params_.get(b + ".gate.w"), d));
		auto h = ad::mul(filt, gate);
		h = dropout(h, cfg_.dropout, dropout_rng);
		auto last = ad::reshape(ad::slice_axis1(h, S - 1, 1), {V, ch});
		auto skip = ad::linear(last, params_.get(b + ".skip.w"));
		skip_sum = skip_sum ? ad::add(skip_sum, skip) : skip;
		std::vector<std::array<Var, 3>> w;
		for (std::int64_t k = 0; k <= cfg_.K; ++k) {
			std::string base = b + ".gc.k" + std::to_string(k);
			Var wf = cfg_.use_graph ? params_.get(base + ".f") : nullptr;
			Var wb = cfg_.use_graph ? params_.get(base + ".b") : nullptr;
			w.push_back({wf, wb, params_.get(base + ".a")});
		}
		auto spatial = diffusion_graph_conv_seq(h, pf, pb, a_adp, w, cfg_.K);
		x = ad::add(x, spatial); // residual
	}
	auto h_short = ad::linear(ad::relu(skip_sum), params_.get("st.end.w"), params_.get("st.end.b"));
	if (!ad::all_finite(h_short->value)) throw NumericError("ref_gwnet produced non-finite features");
	return h_short;
}

} // namespace lsttn
