#include <doctest.h>

#include <cmath>

#include "lsttn/long_trend.hpp"
#include "lsttn/rng.hpp"
#include "oracles.hpp"

using namespace lsttn;

namespace {

Tensor random_input(std::int64_t V, std::int64_t n_sub, std::int64_t d, std::uint64_t seed) {
	Tensor t({V, n_sub, d});
	Rng rng(seed);
	for (auto& v : t.data) v = rng.normal(0.0, 1.0);
	return t;
}

double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

} // namespace

TEST_SUITE("long_trend") {

TEST_CASE("layer plan collapses the temporal length to one") {
	auto plan = LongTrendExtractor::make_plan(336, 2);
	CHECK(plan.back().out_len == 1);
	std::int64_t len = 336;
	std::int64_t expect_d = 2;
	for (const auto& layer : plan) {
		CHECK(layer.in_len == len);
		// dilation doubles per layer until it no longer fits the remaining length
		std::int64_t d = expect_d;
		while (d > 1 && d >= len) d >>= 1;
		CHECK(layer.dilation <= expect_d);
		CHECK(layer.conv_len == len - layer.dilation);
		CHECK(layer.out_len == (layer.conv_len == 1 ? 1 : layer.conv_len / 2));
		len = layer.out_len;
		expect_d *= 2;
	}
	CHECK(len == 1);
	// first layers follow the doubling schedule exactly
	CHECK(plan[0].dilation == 2);
	CHECK(plan[1].dilation == 4);
	CHECK(plan[2].dilation == 8);

	auto small = LongTrendExtractor::make_plan(8, 2);
	CHECK(small.size() == 2);
	CHECK(small[0].dilation == 2);
	CHECK(small[0].out_len == 3);
	CHECK(small[1].out_len == 1);

	CHECK_THROWS_AS(LongTrendExtractor::make_plan(1, 2), LayoutError);
	CHECK_THROWS_AS(LongTrendExtractor::make_plan(8, 1), ValidationError);
}

TEST_CASE("forward equals the layer-by-layer brute force") {
	LongTrendConfig cfg{16, 3, 2, 2}; // n_sub=16, d_repr=3, channels=2
	LongTrendExtractor lt(cfg, 5);
	const std::int64_t V = 2;
	Tensor in = random_input(V, cfg.n_sub, cfg.d_repr, 7);
	auto out = lt.forward(ad::constant(in));
	CHECK(out->value.shape == std::vector<std::int64_t>{V, cfg.channels});

	for (std::int64_t v = 0; v < V; ++v) {
		// per-node reference: direct convolution sum, gelu, then window-2 max pool
		Tensor x({cfg.n_sub, cfg.d_repr});
		for (std::int64_t t = 0; t < cfg.n_sub; ++t)
			for (std::int64_t c = 0; c < cfg.d_repr; ++c) x.at(t, c) = in.at(v, t, c);
		for (std::size_t i = 0; i < lt.plan().size(); ++i) {
			const Tensor& w = lt.params().get("lt.conv" + std::to_string(i) + ".w")->value;
			Tensor conv = oracle::dilated_conv(x, w, lt.plan()[i].dilation);
			for (auto& val : conv.data) val = gelu_ref(val);
			std::int64_t out_len = lt.plan()[i].out_len;
			Tensor pooled({out_len, conv.dim(1)});
			if (conv.dim(0) == 1) {
				pooled = conv;
			} else {
				for (std::int64_t t = 0; t < out_len; ++t)
					for (std::int64_t c = 0; c < conv.dim(1); ++c)
						pooled.at(t, c) = std::max(conv.at(2 * t, c), conv.at(2 * t + 1, c));
			}
			x = pooled;
		}
		for (std::int64_t c = 0; c < cfg.channels; ++c)
			CHECK(out->value.at(v, c) == doctest::Approx(x.at(0, c)).epsilon(1e-9));
	}
}

TEST_CASE("zero input gives zero output (no bias terms)") {
	LongTrendConfig cfg{12, 3, 4, 2};
	LongTrendExtractor lt(cfg, 9);
	auto out = lt.forward(ad::constant(Tensor({2, 12, 3})));
	for (double v : out->value.data) CHECK(v == 0.0);
}

TEST_CASE("translation sensitivity") {
	LongTrendConfig cfg{16, 2, 3, 2};
	LongTrendExtractor lt(cfg, 11);
	Tensor in = random_input(1, cfg.n_sub, cfg.d_repr, 13);
	Tensor shifted({1, cfg.n_sub, cfg.d_repr});
	for (std::int64_t t = 0; t < cfg.n_sub; ++t)
		for (std::int64_t c = 0; c < cfg.d_repr; ++c)
			shifted.at(0, t, c) = in.at(0, (t + 1) % cfg.n_sub, c);
	auto a = lt.forward(ad::constant(in));
	auto b = lt.forward(ad::constant(shifted));
	bool moved = false;
	for (std::int64_t i = 0; i < a->value.size(); ++i)
		if (a->value.at(i) != b->value.at(i)) moved = true;
	CHECK(moved);
}

TEST_CASE("shape mismatch raises") {
	LongTrendConfig cfg{12, 3, 4, 2};
	LongTrendExtractor lt(cfg, 15);
	CHECK_THROWS_AS(lt.forward(ad::constant(Tensor({2, 10, 3}))), LayoutError);
}

TEST_CASE("gradients match finite differences on a two-layer stack") {
	LongTrendConfig cfg{8, 2, 2, 2};
	LongTrendExtractor lt(cfg, 17);
	CHECK(lt.plan().size() == 2);
	Tensor in = random_input(2, cfg.n_sub, cfg.d_repr, 19);
	Rng wrng(21);
	Tensor weights({2, cfg.channels});
	for (auto& v : weights.data) v = wrng.uniform(-1.0, 1.0);

	auto build = [&] { return ad::mean_all(ad::mul(lt.forward(ad::constant(in)), ad::constant(weights))); };
	auto loss = build();
	lt.params().zero_grads();
	ad::backward(loss);
	auto scalar = [&] { return build()->value.data[0]; };
	for (const auto& [name, p] : lt.params().all()) {
		Tensor fd = oracle::finite_diff(scalar, p);
		CHECK_MESSAGE(oracle::max_grad_rel_err(p->grad_ref(), fd) < 1e-4, name);
	}
}

} // TEST_SUITE
