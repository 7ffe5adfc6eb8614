#include "lsttn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace lsttn {

using ad::Var;

double lr_schedule(std::int64_t epoch, double base_lr, const std::vector<std::int64_t>& milestones, double gamma) {
	if (epoch < 0) throw ValidationError("lr_schedule: negative epoch");
	double lr = base_lr;
	for (auto m : milestones)
		if (epoch >= m) lr *= gamma;
	return lr;
}

void Adam::step(ParamStore& params, double lr) {
	++t_;
	// global-norm clipping across every gradient
	if (grad_clip_ > 0.0) {
		double sq = 0.0;
		for (const auto& [name, var] : params.all()) {
			if (var->grad.shape != var->value.shape) continue;
			for (double g : var->grad.data) sq += g * g;
		}
		double norm = std::sqrt(sq);
		if (norm > grad_clip_) {
			double s = grad_clip_ / norm;
			for (const auto& [name, var] : params.all())
				if (var->grad.shape == var->value.shape)
					for (auto& g : var->grad.data) g *= s;
		}
	}
	double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
	double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
	for (const auto& [name, var] : params.all()) {
		if (var->grad.shape != var->value.shape) continue; // no gradient this step
		auto& m = m_[name];
		auto& v = v_[name];
		if (m.shape != var->value.shape) m = Tensor::zeros(var->value.shape);
		if (v.shape != var->value.shape) v = Tensor::zeros(var->value.shape);
		for (std::int64_t i = 0; i < var->value.size(); ++i) {
			double g = var->grad.at(i);
			m.at(i) = beta1_ * m.at(i) + (1.0 - beta1_) * g;
			v.at(i) = beta2_ * v.at(i) + (1.0 - beta2_) * g * g;
			double mhat = m.at(i) / bc1;
			double vhat = v.at(i) / bc2;
			var->value.at(i) -= lr * mhat / (std::sqrt(vhat) + eps_);
		}
	}
}

Dataset Dataset::from_series(TrafficSeries series, std::optional<TrafficGraph> graph, const PipelineConfig& cfg) {
	Dataset d;
	d.layout = cfg.layout;
	auto slices = split_dataset(series, cfg.ratio_train, cfg.ratio_val, cfg.ratio_test);
	d.train = std::move(slices[0]);
	d.val = std::move(slices[1]);
	d.test = std::move(slices[2]);
	d.norm = fit_normalizer(d.train);
	d.graph = std::move(graph);
	return d;
}

Dataset Dataset::load(const PipelineConfig& cfg) {
	if (cfg.series_path.empty()) throw ConfigError("[data] series path is required");
	TrafficSeries series = load_series(cfg.series_path, cfg.format);
	std::optional<TrafficGraph> graph;
	if (!cfg.graph_path.empty()) graph = load_graph(cfg.graph_path, series.V());
	return from_series(std::move(series), std::move(graph), cfg);
}

std::vector<std::int64_t> subsample_origins(const std::vector<std::int64_t>& origins, std::int64_t count,
                                            std::uint64_t seed, const std::string& label) {
	if (count <= 0 || count >= static_cast<std::int64_t>(origins.size())) return origins;
	auto copy = origins;
	Rng rng(Rng::derive(seed, "subsample:" + label));
	std::shuffle(copy.begin(), copy.end(), rng.engine());
	copy.resize(static_cast<std::size_t>(count));
	std::sort(copy.begin(), copy.end());
	return copy;
}

// ---------------------------------------------------------------------------
// Forecaster
// ---------------------------------------------------------------------------

Forecaster::Forecaster(const PipelineConfig& cfg, std::int64_t num_nodes, const TrafficGraph* graph,
                       std::uint64_t seed)
    : variant_(parse_variant(cfg.ablation)), finetune_strl_(cfg.finetune_strl), graph_(graph) {
	bool long_features = variant_uses_long(variant_) || variant_uses_periodicity(variant_);
	if (long_features) {
		MSTConfig mc{cfg.layout.S, cfg.layout.n_sub(), cfg.d_repr, cfg.n_layers, cfg.n_heads, cfg.d_ff, cfg.dropout};
		mst_ = std::make_unique<MST>(mc, seed);
	}
	if (variant_uses_long(variant_)) {
		lt_ = std::make_unique<LongTrendExtractor>(
		    LongTrendConfig{cfg.layout.n_sub(), cfg.d_repr, cfg.lt_channels, cfg.lt_kernel}, seed);
		trainable_.merge(lt_->params());
	}
	if (variant_uses_periodicity(variant_)) {
		pidx_ = periodic_indices(cfg.layout);
		PeriodicityConfig pc{num_nodes, cfg.d_repr, cfg.lt_channels, cfg.diffusion_K, cfg.d_emb, graph != nullptr};
		per_ = std::make_unique<PeriodicityExtractor>(pc, seed);
		trainable_.merge(per_->params());
	}
	if (variant_uses_short(variant_)) {
		ShortTrendConfig sc;
		sc.num_nodes = num_nodes;
		sc.S = cfg.layout.S;
		sc.channels = cfg.st_channels;
		sc.blocks = cfg.st_blocks;
		sc.d_short = cfg.d_short;
		sc.K = cfg.diffusion_K;
		sc.d_emb = cfg.d_emb;
		sc.dropout = cfg.st_dropout;
		sc.use_graph = graph != nullptr;
		st_ = construct_stgnn(cfg.stgnn, sc, seed);
		trainable_.merge(st_->params());
	}
	FusionConfig fc{cfg.lt_channels, cfg.d_short, cfg.layout.F, cfg.h1, cfg.h2, cfg.h3, variant_};
	fuse_ = std::make_unique<FusionHead>(fc, seed);
	trainable_.merge(fuse_->params());
	if (finetune_strl_ && mst_) trainable_.merge(mst_->params());
}

bool Forecaster::uses_long_features() const {
	return variant_uses_long(variant_) || variant_uses_periodicity(variant_);
}

Tensor Forecaster::encode_window(const WindowSample& w) const {
	if (!mst_) throw ValidationError("encode_window: variant has no STRL");
	Tensor tokens = split_subseries(w.x_long, mst_->config().S);
	return transpose01(mst_->encode_all(tokens)); // [V, N, d]
}

Var Forecaster::forward(const WindowSample& w, const Tensor* cached_s, Rng* dropout_rng) const {
	Var s = nullptr;
	if (uses_long_features()) {
		if (finetune_strl_) {
			Tensor tokens = split_subseries(w.x_long, mst_->config().S);
			s = mst_->encode_all_var(tokens);
		} else if (cached_s) {
			s = ad::constant(*cached_s);
		} else {
			s = ad::constant(encode_window(w));
		}
	}
	Var h_long = lt_ ? lt_->forward(s) : nullptr;
	Var h_week = nullptr, h_day = nullptr;
	if (per_) {
		auto [hw, hd] = per_->forward(s, pidx_, graph_);
		h_week = hw;
		h_day = hd;
	}
	Var h_short = st_ ? st_->forward(graph_, w.x_short, dropout_rng) : nullptr;
	return fuse_->forward(h_long, h_week, h_day, h_short);
}

ParamStore Forecaster::all_params() const {
	ParamStore all;
	all.merge(trainable_);
	if (mst_ && !finetune_strl_) all.merge(mst_->params());
	return all;
}

// ---------------------------------------------------------------------------
// Pretraining
// ---------------------------------------------------------------------------

namespace {

Checkpoint base_checkpoint(const PipelineConfig& cfg, const Dataset& data) {
	Checkpoint c;
	c.config_text = cfg.raw_text;
	c.norm_mean = data.norm.mean;
	c.norm_std = data.norm.std;
	c.L = cfg.layout.L;
	c.S = cfg.layout.S;
	c.F = cfg.layout.F;
	c.steps_per_day = cfg.layout.steps_per_day;
	c.d_repr = cfg.d_repr;
	c.n_layers = cfg.n_layers;
	c.n_heads = cfg.n_heads;
	return c;
}

std::map<std::string, Tensor> snapshot(const ParamStore& store) {
	std::map<std::string, Tensor> out;
	for (const auto& [name, var] : store.all()) out[name] = var->value;
	return out;
}

void restore_snapshot(ParamStore& store, const std::map<std::string, Tensor>& snap) {
	for (const auto& [name, var] : store.all()) {
		auto it = snap.find(name);
		if (it != snap.end()) var->value = it->second;
	}
}

} // namespace

PretrainResult run_pretrain(const PipelineConfig& cfg, const Dataset& data, std::ostream* log) {
	const DataLayout& layout = cfg.layout;
	MSTConfig mc{layout.S, layout.n_sub(), cfg.d_repr, cfg.n_layers, cfg.n_heads, cfg.d_ff, cfg.dropout};
	MST mst(mc, cfg.seed);
	if (log) *log << "pretrain: " << mst.params().total_size() << " parameters\n";

	auto train_origins =
	    subsample_origins(window_origins(data.train, layout), cfg.windows_per_epoch, cfg.seed, "pretrain.train");
	auto val_origins = subsample_origins(window_origins(data.val, layout), cfg.val_windows, cfg.seed, "pretrain.val");
	if (train_origins.empty() || val_origins.empty()) throw DegenerateDataError("pretrain: no windows available");

	Adam opt(0.9, 0.999, 1e-8, cfg.grad_clip);
	PretrainResult result;
	double best_val = std::numeric_limits<double>::infinity();
	std::int64_t best_epoch = -1;
	std::map<std::string, Tensor> best_params;

	auto eval_val = [&]() {
		double sum = 0.0;
		std::int64_t n = 0;
		for (std::size_t i = 0; i < val_origins.size(); ++i) {
			auto w = make_window(data.val, layout, val_origins[i], &data.norm);
			Tensor tokens = split_subseries(w.x_long, layout.S);
			Rng mask_rng(Rng::derive(cfg.seed, "pretrain.valmask:" + std::to_string(i)));
			auto sets = sample_mask(layout.n_sub(), cfg.mask_ratio, mask_rng);
			try {
				auto x_hat = mst.reconstruct(tokens, sets, nullptr);
				auto loss = mst.pretrain_loss(x_hat, tokens, sets, w.x_mask);
				sum += loss->value.data[0];
				++n;
			} catch (const DegenerateDataError&) {
				// window with no valid masked entries; skip
			}
		}
		if (n == 0) throw DegenerateDataError("pretrain: validation has no usable windows");
		return sum / static_cast<double>(n);
	};

	std::int64_t global_step = 0;
	for (std::int64_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
		auto t0 = std::chrono::steady_clock::now();
		double lr = lr_schedule(epoch, cfg.base_lr, cfg.lr_milestones, cfg.lr_gamma);
		auto order = train_origins;
		Rng shuffle_rng(Rng::derive(cfg.seed, "pretrain.shuffle:" + std::to_string(epoch)));
		std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

		double epoch_loss = 0.0;
		std::int64_t epoch_n = 0;
		for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
			std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
			mst.params().zero_grads();
			double inv = 1.0 / static_cast<double>(end - start);
			bool any = false;
			for (std::size_t i = start; i < end; ++i) {
				auto w = make_window(data.train, layout, order[i], &data.norm);
				Tensor tokens = split_subseries(w.x_long, layout.S);
				Rng step_rng(Rng::derive(cfg.seed, "pretrain.step:" + std::to_string(global_step)));
				++global_step;
				auto sets = sample_mask(layout.n_sub(), cfg.mask_ratio, step_rng);
				try {
					auto x_hat = mst.reconstruct(tokens, sets, &step_rng);
					auto loss = mst.pretrain_loss(x_hat, tokens, sets, w.x_mask);
					double lv = loss->value.data[0];
					if (!std::isfinite(lv))
						throw NumericError("pretrain diverged at epoch " + std::to_string(epoch) + ", origin " +
						                   std::to_string(order[i]));
					epoch_loss += lv;
					++epoch_n;
					ad::backward(ad::scale(loss, inv));
					any = true;
				} catch (const DegenerateDataError&) {
				}
			}
			if (any) opt.step(mst.params(), lr);
		}
		if (epoch_n == 0) throw DegenerateDataError("pretrain: no usable training windows");
		double val_loss = eval_val();
		result.train_losses.push_back(epoch_loss / static_cast<double>(epoch_n));
		result.val_losses.push_back(val_loss);
		if (val_loss < best_val) {
			best_val = val_loss;
			best_epoch = epoch;
			best_params = snapshot(mst.params());
		}
		auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
		if (log)
			*log << "pretrain epoch " << epoch << ": train_loss=" << result.train_losses.back()
			     << " val_loss=" << val_loss << " lr=" << lr << " time=" << dt << "s\n";
	}
	restore_snapshot(mst.params(), best_params);

	Checkpoint c = base_checkpoint(cfg, data);
	c.stage = "pretrain";
	c.store_params(mst.params());
	c.opt_m = opt.m_state();
	c.opt_v = opt.v_state();
	c.opt_t = opt.t();
	c.epoch = best_epoch;
	c.best_val = best_val;
	result.checkpoint = std::move(c);
	return result;
}

// ---------------------------------------------------------------------------
// Forecast training
// ---------------------------------------------------------------------------

EvalOutputs evaluate_windows(const Forecaster& model, const TrafficSeries& slice, const DataLayout& layout,
                             const Normalizer& norm, const std::vector<std::int64_t>& origins) {
	EvalOutputs out;
	for (auto origin : origins) {
		auto w = make_window(slice, layout, origin, &norm);
		auto y_hat = model.forward(w, nullptr, nullptr);
		out.y_hat.push_back(norm.invert(y_hat->value));
		Tensor y_true({layout.F, slice.V()});
		for (std::int64_t t = 0; t < layout.F; ++t)
			for (std::int64_t v = 0; v < slice.V(); ++v) y_true.at(t, v) = slice.values.at(origin + t, v);
		out.y_true.push_back(std::move(y_true));
		out.y_masks.push_back(w.y_mask);
		out.origins.push_back(origin);
	}
	return out;
}

ForecastResult run_forecast(const PipelineConfig& cfg, const Dataset& data, const Checkpoint* pretrained,
                            std::ostream* log) {
	const DataLayout& layout = cfg.layout;
	std::int64_t V = data.train.V();
	const TrafficGraph* graph = data.graph ? &*data.graph : nullptr;
	Forecaster model(cfg, V, graph, cfg.seed);

	if (model.uses_long_features()) {
		if (!cfg.finetune_strl || pretrained) {
			if (!pretrained) throw ConfigError("forecast training needs a pretrained STRL checkpoint");
			if (pretrained->L != layout.L || pretrained->S != layout.S || pretrained->d_repr != cfg.d_repr ||
			    pretrained->n_layers != cfg.n_layers || pretrained->n_heads != cfg.n_heads)
				throw LayoutError("pretrained checkpoint layout is incompatible with this config");
			pretrained->restore_params(model.mst()->params(), "mst.");
		}
	}
	std::uint64_t strl_hash_before = model.mst() ? model.mst()->params().content_hash() : 0;

	auto train_origins =
	    subsample_origins(window_origins(data.train, layout), cfg.windows_per_epoch, cfg.seed, "forecast.train");
	auto val_origins = subsample_origins(window_origins(data.val, layout), cfg.val_windows, cfg.seed, "forecast.val");
	auto test_origins =
	    subsample_origins(window_origins(data.test, layout), cfg.test_windows, cfg.seed, "forecast.test");
	if (train_origins.empty() || val_origins.empty() || test_origins.empty())
		throw DegenerateDataError("forecast: empty window set");

	if (log)
		*log << "forecast[" << cfg.ablation << "]: " << model.trainable().total_size() << " trainable parameters, "
		     << train_origins.size() << " train windows\n";

	// Frozen STRL: encode every train window once and reuse across epochs.
	std::map<std::int64_t, Tensor> cache;
	bool use_cache = model.uses_long_features() && !cfg.finetune_strl;
	if (use_cache) {
		auto t0 = std::chrono::steady_clock::now();
		for (auto origin : train_origins) {
			auto w = make_window(data.train, layout, origin, &data.norm);
			cache[origin] = model.encode_window(w);
		}
		if (log)
			*log << "encoded " << cache.size() << " windows in "
			     << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s\n";
	}

	Adam opt(0.9, 0.999, 1e-8, cfg.grad_clip);
	ForecastResult result;
	double best_val = std::numeric_limits<double>::infinity();
	std::int64_t best_epoch = -1;
	std::map<std::string, Tensor> best_params;
	std::int64_t global_step = 0;

	for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
		auto t0 = std::chrono::steady_clock::now();
		double lr = lr_schedule(epoch, cfg.base_lr, cfg.lr_milestones, cfg.lr_gamma);
		auto order = train_origins;
		Rng shuffle_rng(Rng::derive(cfg.seed, "forecast.shuffle:" + std::to_string(epoch)));
		std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

		double epoch_loss = 0.0;
		std::int64_t epoch_n = 0;
		for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
			std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
			model.trainable().zero_grads();
			double inv = 1.0 / static_cast<double>(end - start);
			bool any = false;
			for (std::size_t i = start; i < end; ++i) {
				auto w = make_window(data.train, layout, order[i], &data.norm);
				Rng step_rng(Rng::derive(cfg.seed, "forecast.step:" + std::to_string(global_step)));
				++global_step;
				const Tensor* cached = use_cache ? &cache.at(order[i]) : nullptr;
				try {
					auto y_hat = model.forward(w, cached, &step_rng);
					auto loss = forecast_loss(y_hat, w.y, w.y_mask);
					double lv = loss->value.data[0];
					if (!std::isfinite(lv))
						throw NumericError("forecast training diverged at epoch " + std::to_string(epoch));
					epoch_loss += lv;
					++epoch_n;
					ad::backward(ad::scale(loss, inv));
					any = true;
				} catch (const DegenerateDataError&) {
				}
			}
			if (any) opt.step(model.trainable(), lr);
		}
		if (epoch_n == 0) throw DegenerateDataError("forecast: no usable training windows");

		auto val_out = evaluate_windows(model, data.val, layout, data.norm, val_origins);
		auto val_report = horizon_report(val_out.y_hat, val_out.y_true, val_out.y_masks, {layout.F});
		double val_mae = val_report.at_horizon(layout.F).mae; // model selection on the longest horizon
		result.val_maes.push_back(val_mae);
		if (val_mae < best_val) {
			best_val = val_mae;
			best_epoch = epoch;
			best_params = snapshot(model.trainable());
		}
		auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
		if (log)
			*log << "forecast[" << cfg.ablation << "] epoch " << epoch << ": train_loss="
			     << epoch_loss / static_cast<double>(epoch_n) << " val_mae@" << layout.F << "=" << val_mae
			     << " lr=" << lr << " time=" << dt << "s\n";
	}
	restore_snapshot(model.trainable(), best_params);

	if (model.mst() && !cfg.finetune_strl && model.mst()->params().content_hash() != strl_hash_before)
		throw NumericError("frozen STRL parameters changed during forecast training");

	auto test_out = evaluate_windows(model, data.test, layout, data.norm, test_origins);
	result.test_report = horizon_report(test_out.y_hat, test_out.y_true, test_out.y_masks);

	Checkpoint c = base_checkpoint(cfg, data);
	c.stage = "forecast";
	c.stgnn = cfg.stgnn;
	c.variant = cfg.ablation;
	c.store_params(model.all_params());
	c.opt_m = opt.m_state();
	c.opt_v = opt.v_state();
	c.opt_t = opt.t();
	c.epoch = best_epoch;
	c.best_val = best_val;
	result.checkpoint = std::move(c);
	return result;
}

Forecaster forecaster_from_checkpoint(const Checkpoint& ckpt, std::int64_t num_nodes, const TrafficGraph* graph) {
	if (ckpt.stage != "forecast") throw ValidationError("checkpoint is not a forecast-stage checkpoint");
	PipelineConfig cfg = PipelineConfig::parse_text(ckpt.config_text);
	cfg.ablation = ckpt.variant;
	if (!ckpt.stgnn.empty()) cfg.stgnn = ckpt.stgnn;
	Forecaster model(cfg, num_nodes, graph, cfg.seed);
	ParamStore all = model.all_params();
	ckpt.restore_params(all);
	return model;
}

HorizonReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& data, std::int64_t test_windows) {
	PipelineConfig cfg = PipelineConfig::parse_text(ckpt.config_text);
	const TrafficGraph* graph = data.graph ? &*data.graph : nullptr;
	Forecaster model = forecaster_from_checkpoint(ckpt, data.test.V(), graph);
	Normalizer norm{ckpt.norm_mean, ckpt.norm_std};
	auto origins = subsample_origins(window_origins(data.test, cfg.layout), test_windows > 0 ? test_windows : cfg.test_windows,
	                                 cfg.seed, "forecast.test");
	auto out = evaluate_windows(model, data.test, cfg.layout, norm, origins);
	return horizon_report(out.y_hat, out.y_true, out.y_masks);
}

std::map<std::string, HorizonReport> run_ablation(const PipelineConfig& cfg, const Dataset& data,
                                                  const Checkpoint* pretrained, std::ostream* log) {
	std::map<std::string, HorizonReport> reports;
	for (const char* variant : {"full", "no_lt", "no_p", "no_st", "st_only"}) {
		PipelineConfig vc = cfg;
		vc.ablation = variant;
		auto res = run_forecast(vc, data, pretrained, log);
		reports[variant] = res.test_report;
	}
	return reports;
}

} // namespace lsttn
