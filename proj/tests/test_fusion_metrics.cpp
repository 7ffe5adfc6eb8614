#include <doctest.h>

#include <cmath>

#include "lsttn/fusion.hpp"
#include "lsttn/metrics.hpp"
#include "oracles.hpp"

using namespace lsttn;
using ad::Var;

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, Rng& rng) {
	Tensor t(std::move(shape));
	for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
	return t;
}

double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

} // namespace

TEST_SUITE("fusion") {

TEST_CASE("variant parsing and concat widths") {
	CHECK(parse_variant("full") == AblationVariant::Full);
	CHECK(parse_variant("no_lt") == AblationVariant::NoLt);
	CHECK(parse_variant("no_p") == AblationVariant::NoP);
	CHECK(parse_variant("no_st") == AblationVariant::NoSt);
	CHECK(parse_variant("st_only") == AblationVariant::StOnly);
	CHECK_THROWS_AS(parse_variant("all"), ConfigError);
	for (const char* name : {"full", "no_lt", "no_p", "no_st", "st_only"})
		CHECK(variant_name(parse_variant(name)) == name);

	FusionConfig cfg{.c = 4, .d_short = 64, .F = 12, .h1 = 32, .h2 = 32, .h3 = 128};
	cfg.variant = AblationVariant::Full;
	CHECK(cfg.inner_width() == 12);
	CHECK(cfg.outer_width() == 96);
	cfg.variant = AblationVariant::NoLt;
	CHECK(cfg.inner_width() == 8);
	cfg.variant = AblationVariant::NoP;
	CHECK(cfg.inner_width() == 4);
	cfg.variant = AblationVariant::NoSt;
	CHECK(cfg.inner_width() == 12);
	CHECK(cfg.outer_width() == 32);
	cfg.variant = AblationVariant::StOnly;
	CHECK(cfg.outer_width() == 64);
}

TEST_CASE("input nullability is checked per variant") {
	Rng rng(1);
	const std::int64_t V = 3;
	FusionConfig cfg{.c = 2, .d_short = 3, .F = 4, .h1 = 5, .h2 = 5, .h3 = 6};
	auto hl = ad::constant(random_tensor({V, 2}, rng));
	auto hw = ad::constant(random_tensor({V, 2}, rng));
	auto hd = ad::constant(random_tensor({V, 2}, rng));
	auto hs = ad::constant(random_tensor({V, 3}, rng));

	cfg.variant = AblationVariant::Full;
	FusionHead full(cfg, 2);
	CHECK(full.forward(hl, hw, hd, hs)->value.shape == std::vector<std::int64_t>{4, V});
	CHECK_THROWS_AS(full.forward(nullptr, hw, hd, hs), ValidationError);

	cfg.variant = AblationVariant::NoLt;
	FusionHead no_lt(cfg, 2);
	CHECK(no_lt.forward(nullptr, hw, hd, hs)->value.shape == std::vector<std::int64_t>{4, V});
	CHECK_THROWS_AS(no_lt.forward(hl, hw, hd, hs), ValidationError);

	cfg.variant = AblationVariant::NoSt;
	FusionHead no_st(cfg, 2);
	CHECK(no_st.forward(hl, hw, hd, nullptr)->value.shape == std::vector<std::int64_t>{4, V});
	CHECK_THROWS_AS(no_st.forward(hl, hw, hd, hs), ValidationError);

	cfg.variant = AblationVariant::StOnly;
	FusionHead st_only(cfg, 2);
	CHECK_FALSE(st_only.params().has("fuse.inner.w1"));
	CHECK(st_only.forward(nullptr, nullptr, nullptr, hs)->value.shape == std::vector<std::int64_t>{4, V});
	CHECK_THROWS_AS(st_only.forward(hl, nullptr, nullptr, hs), ValidationError);
}

TEST_CASE("short-term features reach the output") {
	Rng rng(3);
	const std::int64_t V = 4;
	FusionConfig cfg{.c = 2, .d_short = 3, .F = 4, .h1 = 5, .h2 = 5, .h3 = 6};
	FusionHead head(cfg, 4);
	auto hl = ad::constant(random_tensor({V, 2}, rng));
	auto hw = ad::constant(random_tensor({V, 2}, rng));
	auto hd = ad::constant(random_tensor({V, 2}, rng));
	Tensor hs_vals = random_tensor({V, 3}, rng);
	auto a = head.forward(hl, hw, hd, ad::constant(hs_vals));
	Tensor hs2 = hs_vals;
	hs2.at(1, 0) += 2.0;
	auto b = head.forward(hl, hw, hd, ad::constant(hs2));
	bool moved = false;
	for (std::int64_t f = 0; f < 4; ++f)
		if (a->value.at(f, 1) != b->value.at(f, 1)) moved = true;
	CHECK(moved);
	// other nodes' forecasts stay bitwise identical: fusion is per-node
	for (std::int64_t f = 0; f < 4; ++f)
		for (std::int64_t v : {0, 2, 3}) CHECK(a->value.at(f, v) == b->value.at(f, v));
}

TEST_CASE("single-node hand computation") {
	// All widths 1 so every layer is scalar arithmetic.
	FusionConfig cfg{.c = 1, .d_short = 1, .F = 2, .h1 = 1, .h2 = 1, .h3 = 1};
	cfg.variant = AblationVariant::Full;
	FusionHead head(cfg, 7);
	auto& p = head.params();
	auto w = [&](const char* n) { return p.get(n)->value.at(std::int64_t{0}); };
	double hl = 0.3, hw = -0.2, hd = 0.5, hs = 0.8;
	double z1 = gelu_ref(hl * p.get("fuse.inner.w1")->value.at(0, 0) + hw * p.get("fuse.inner.w1")->value.at(1, 0) +
	                     hd * p.get("fuse.inner.w1")->value.at(2, 0) + w("fuse.inner.b1"));
	double z2 = gelu_ref(z1 * w("fuse.inner.w2") + w("fuse.inner.b2"));
	double z3 = gelu_ref(z2 * p.get("fuse.outer.w1")->value.at(0, 0) + hs * p.get("fuse.outer.w1")->value.at(1, 0) +
	                     w("fuse.outer.b1"));
	auto out = head.forward(ad::constant(Tensor({1, 1}, {hl})), ad::constant(Tensor({1, 1}, {hw})),
	                        ad::constant(Tensor({1, 1}, {hd})), ad::constant(Tensor({1, 1}, {hs})));
	for (std::int64_t f = 0; f < 2; ++f) {
		double expect = z3 * p.get("fuse.outer.w2")->value.at(0, f) + p.get("fuse.outer.b2")->value.at(f);
		CHECK(out->value.at(f, 0) == doctest::Approx(expect).epsilon(1e-12));
	}
}

TEST_CASE("forecast loss values and masked gradients") {
	Tensor y_hat_vals({2, 2}, {1.0, 2.0, 3.0, 4.0});
	Tensor y({2, 2}, {1.0, 2.0, 3.0, 4.0});
	std::vector<std::uint8_t> all{1, 1, 1, 1};
	auto perfect = forecast_loss(ad::param(y_hat_vals), y, all);
	CHECK(perfect->value.at(std::int64_t{0}) == 0.0);

	Tensor shifted({2, 2}, {0.0, 4.5, 3.0, 4.0});
	auto mixed = forecast_loss(ad::param(shifted), y, all);
	CHECK(mixed->value.at(std::int64_t{0}) == doctest::Approx((1.0 + 2.5) / 4.0).epsilon(1e-12));

	// masked-out entries contribute nothing: value ignores them and their
	// gradient is exactly zero
	auto p = ad::param(shifted);
	std::vector<std::uint8_t> mask{1, 0, 1, 1};
	auto masked = forecast_loss(p, y, mask);
	CHECK(masked->value.at(std::int64_t{0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
	ad::backward(masked);
	CHECK(p->grad_ref().at(std::int64_t{1}) == 0.0);
	CHECK(p->grad_ref().at(std::int64_t{0}) != 0.0);

	CHECK_THROWS_AS(forecast_loss(ad::param(shifted), Tensor({2, 3}), all), LayoutError);
	CHECK_THROWS_AS(forecast_loss(ad::param(shifted), y, std::vector<std::uint8_t>{1, 1}), LayoutError);
	CHECK_THROWS_AS(forecast_loss(ad::param(shifted), y, std::vector<std::uint8_t>{0, 0, 0, 0}),
	                DegenerateDataError);
}

TEST_CASE("fusion gradients match finite differences") {
	Rng rng(11);
	const std::int64_t V = 2;
	FusionConfig cfg{.c = 2, .d_short = 2, .F = 3, .h1 = 3, .h2 = 3, .h3 = 4};
	FusionHead head(cfg, 13);
	auto hl = ad::constant(random_tensor({V, 2}, rng));
	auto hw = ad::constant(random_tensor({V, 2}, rng));
	auto hd = ad::constant(random_tensor({V, 2}, rng));
	auto hs = ad::constant(random_tensor({V, 2}, rng));
	Tensor y = random_tensor({3, V}, rng);
	std::vector<std::uint8_t> mask{1, 1, 0, 1, 1, 1};

	auto build = [&] { return forecast_loss(head.forward(hl, hw, hd, hs), y, mask); };
	auto loss = build();
	head.params().zero_grads();
	ad::backward(loss);
	auto scalar = [&] { return build()->value.data[0]; };
	for (const auto& [name, prm] : head.params().all()) {
		Tensor fd = oracle::finite_diff(scalar, prm);
		CHECK_MESSAGE(oracle::max_grad_rel_err(prm->grad_ref(), fd) < 1e-4, name);
	}
}

} // TEST_SUITE

TEST_SUITE("metrics") {

TEST_CASE("worked single-entry example") {
	Tensor y_hat({1}, {2.0});
	Tensor y({1}, {1.0});
	std::vector<std::uint8_t> valid{1};
	CHECK(masked_rmse(y_hat, y, valid) == doctest::Approx(1.0).epsilon(1e-15));
	CHECK(masked_mae(y_hat, y, valid) == doctest::Approx(1.0).epsilon(1e-15));
	CHECK(masked_mape(y_hat, y, valid) == doctest::Approx(1.0).epsilon(1e-15));

	// masking the only wrong entry leaves a perfect score
	Tensor y_hat2({2}, {3.0, 9.0});
	Tensor y2({2}, {3.0, 4.0});
	std::vector<std::uint8_t> first_only{1, 0};
	CHECK(masked_rmse(y_hat2, y2, first_only) == 0.0);
	CHECK(masked_mae(y_hat2, y2, first_only) == 0.0);
	CHECK(masked_mape(y_hat2, y2, first_only) == 0.0);

	std::vector<std::uint8_t> none{0, 0};
	CHECK_THROWS_AS(masked_rmse(y_hat2, y2, none), DegenerateDataError);
	CHECK_THROWS_AS(masked_mae(y_hat2, y2, none), DegenerateDataError);
	CHECK_THROWS_AS(masked_mape(y_hat2, y2, none), DegenerateDataError);
	CHECK_THROWS_AS(masked_mae(y_hat2, Tensor({3}), first_only), LayoutError);
}

TEST_CASE("agreement with the brute-force oracle") {
	Rng rng(21);
	for (int rep = 0; rep < 100; ++rep) {
		std::int64_t n = rng.uniform_int(1, 40);
		Tensor y_hat({n}), y({n});
		std::vector<std::uint8_t> valid(static_cast<std::size_t>(n));
		bool any = false;
		for (std::int64_t i = 0; i < n; ++i) {
			y_hat.at(i) = rng.uniform(-10.0, 10.0);
			do y.at(i) = rng.uniform(-10.0, 10.0); while (y.at(i) == 0.0);
			valid[static_cast<std::size_t>(i)] = rng.uniform(0.0, 1.0) < 0.8 ? 1 : 0;
			any |= valid[static_cast<std::size_t>(i)] != 0;
		}
		if (!any) valid[0] = 1;
		CHECK(std::abs(masked_rmse(y_hat, y, valid) - oracle::rmse(y_hat, y, valid)) <= 1e-9);
		CHECK(std::abs(masked_mae(y_hat, y, valid) - oracle::mae(y_hat, y, valid)) <= 1e-9);
		CHECK(std::abs(masked_mape(y_hat, y, valid) - oracle::mape(y_hat, y, valid)) <= 1e-9);
		CHECK(masked_mae(y_hat, y, valid) <= masked_rmse(y_hat, y, valid) + 1e-12);
	}
}

TEST_CASE("horizon report: values, ordering invariance, csv shape") {
	Rng rng(23);
	const std::int64_t F = 12, V = 3;
	std::vector<Tensor> y_hat, y;
	std::vector<std::vector<std::uint8_t>> masks;
	for (int i = 0; i < 5; ++i) {
		Tensor t({F, V}), p({F, V});
		std::vector<std::uint8_t> m(static_cast<std::size_t>(F * V), 1);
		for (std::int64_t j = 0; j < F * V; ++j) {
			t.at(j) = rng.uniform(1.0, 10.0);
			p.at(j) = t.at(j) + rng.uniform(-1.0, 1.0);
			if (rng.uniform(0.0, 1.0) < 0.1) m[static_cast<std::size_t>(j)] = 0;
		}
		y.push_back(t);
		y_hat.push_back(p);
		masks.push_back(m);
	}
	auto report = horizon_report(y_hat, y, masks);
	CHECK(report.cells.size() == 3);
	for (auto h : {3, 6, 12}) {
		const auto& cell = report.at_horizon(h);
		// cross-check one horizon slice against the flat metrics
		Tensor th({V}), ph({V});
		std::vector<double> tv, pv;
		std::vector<std::uint8_t> mv;
		for (std::size_t i = 0; i < y.size(); ++i)
			for (std::int64_t v = 0; v < V; ++v) {
				tv.push_back(y[i].at(h - 1, v));
				pv.push_back(y_hat[i].at(h - 1, v));
				mv.push_back(masks[i][static_cast<std::size_t>((h - 1) * V + v)]);
			}
		Tensor tt({static_cast<std::int64_t>(tv.size())}, tv);
		Tensor pp({static_cast<std::int64_t>(pv.size())}, pv);
		CHECK(cell.rmse == doctest::Approx(masked_rmse(pp, tt, mv)).epsilon(1e-12));
		CHECK(cell.mae == doctest::Approx(masked_mae(pp, tt, mv)).epsilon(1e-12));
		CHECK(cell.mape == doctest::Approx(masked_mape(pp, tt, mv)).epsilon(1e-12));
		CHECK(cell.mae <= cell.rmse + 1e-12);
	}

	// permuting the samples only reorders the accumulation
	std::vector<Tensor> y_hat_r(y_hat.rbegin(), y_hat.rend()), y_r(y.rbegin(), y.rend());
	std::vector<std::vector<std::uint8_t>> masks_r(masks.rbegin(), masks.rend());
	auto report_r = horizon_report(y_hat_r, y_r, masks_r);
	for (auto h : {3, 6, 12}) {
		CHECK(report.at_horizon(h).rmse == doctest::Approx(report_r.at_horizon(h).rmse).epsilon(1e-13));
		CHECK(report.at_horizon(h).mae == doctest::Approx(report_r.at_horizon(h).mae).epsilon(1e-13));
		CHECK(report.at_horizon(h).n_valid == report_r.at_horizon(h).n_valid);
	}

	// perfect forecasts score zero everywhere
	auto perfect = horizon_report(y, y, masks);
	for (const auto& c : perfect.cells) {
		CHECK(c.rmse == 0.0);
		CHECK(c.mae == 0.0);
		CHECK(c.mape == 0.0);
	}

	CHECK(report.to_csv().rfind("horizon,rmse,mae,mape,n_valid\n", 0) == 0);
	CHECK(report.to_text().find("horizon") != std::string::npos);
	CHECK_THROWS_AS(report.at_horizon(5), ValidationError);
	CHECK_THROWS_AS(horizon_report(y_hat, y, masks, {13}), ValidationError);
	CHECK_THROWS_AS(horizon_report(std::vector<Tensor>{}, std::vector<Tensor>{}, {}), DegenerateDataError);
}

} // TEST_SUITE
