#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsttn/checkpoint.hpp"
#include "lsttn/config.hpp"
#include "lsttn/data.hpp"
#include "lsttn/fusion.hpp"
#include "lsttn/long_trend.hpp"
#include "lsttn/metrics.hpp"
#include "lsttn/mst.hpp"
#include "lsttn/periodicity.hpp"
#include "lsttn/short_trend.hpp"

namespace lsttn {

/// Multistep decay: lr = base * gamma^(milestones passed).
double lr_schedule(std::int64_t epoch, double base_lr, const std::vector<std::int64_t>& milestones, double gamma);

/// Adam with optional global-norm gradient clipping. Parameter iteration is
/// name-ordered, so updates are deterministic.
class Adam {
public:
	Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double grad_clip = 5.0)
	    : beta1_(beta1), beta2_(beta2), eps_(eps), grad_clip_(grad_clip) {}

	void step(ParamStore& params, double lr);

	std::int64_t t() const { return t_; }
	const std::map<std::string, Tensor>& m_state() const { return m_; }
	const std::map<std::string, Tensor>& v_state() const { return v_; }
	void set_state(std::map<std::string, Tensor> m, std::map<std::string, Tensor> v, std::int64_t t) {
		m_ = std::move(m);
		v_ = std::move(v);
		t_ = t;
	}

private:
	double beta1_, beta2_, eps_, grad_clip_;
	std::int64_t t_ = 0;
	std::map<std::string, Tensor> m_, v_;
};

/// Loaded and split dataset plus normalizer and (optional) graph.
struct Dataset {
	TrafficSeries train, val, test;
	Normalizer norm;
	std::optional<TrafficGraph> graph;
	DataLayout layout;

	static Dataset load(const PipelineConfig& cfg);
	static Dataset from_series(TrafficSeries series, std::optional<TrafficGraph> graph, const PipelineConfig& cfg);
};

/// The assembled forecaster: frozen (or fine-tuned) STRL plus the trainable
/// extractors and fusion head for one ablation variant.
class Forecaster {
public:
	Forecaster(const PipelineConfig& cfg, std::int64_t num_nodes, const TrafficGraph* graph, std::uint64_t seed);

	/// cached_s is the precomputed STRL encoding [V, N_sub, d_repr] for this
	/// window; required when the variant uses long-range features and the STRL
	/// is frozen.
	ad::Var forward(const WindowSample& w, const Tensor* cached_s, Rng* dropout_rng = nullptr) const;

	Tensor encode_window(const WindowSample& w) const; // [V, N_sub, d_repr]

	AblationVariant variant() const { return variant_; }
	bool uses_long_features() const;
	ParamStore& trainable() { return trainable_; }
	const ParamStore& trainable() const { return trainable_; }
	MST* mst() { return mst_.get(); }
	const MST* mst() const { return mst_.get(); }
	ShortTrendModel* short_model() { return st_.get(); }
	ParamStore all_params() const; // trainable + STRL, for checkpointing

private:
	AblationVariant variant_;
	bool finetune_strl_;
	const TrafficGraph* graph_;
	PeriodicIndices pidx_{};
	std::unique_ptr<MST> mst_;
	std::unique_ptr<LongTrendExtractor> lt_;
	std::unique_ptr<PeriodicityExtractor> per_;
	std::unique_ptr<ShortTrendModel> st_;
	std::unique_ptr<FusionHead> fuse_;
	ParamStore trainable_;
};

struct PretrainResult {
	Checkpoint checkpoint;
	std::vector<double> train_losses; // per epoch
	std::vector<double> val_losses;   // per epoch
};

struct ForecastResult {
	Checkpoint checkpoint;
	HorizonReport test_report;
	std::vector<double> val_maes; // per epoch, horizon-12 denormalized MAE
};

PretrainResult run_pretrain(const PipelineConfig& cfg, const Dataset& data, std::ostream* log = nullptr);

ForecastResult run_forecast(const PipelineConfig& cfg, const Dataset& data, const Checkpoint* pretrained,
                            std::ostream* log = nullptr);

/// Rebuilds the forecaster from a forecast-stage checkpoint and evaluates the
/// test slice.
HorizonReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& data,
                                  std::int64_t test_windows = 0);

/// Per-sample evaluation outputs (denormalized) used by reports and plots.
struct EvalOutputs {
	std::vector<Tensor> y_hat; // [F, V] each
	std::vector<Tensor> y_true;
	std::vector<std::vector<std::uint8_t>> y_masks;
	std::vector<std::int64_t> origins;
};
EvalOutputs evaluate_windows(const Forecaster& model, const TrafficSeries& slice, const DataLayout& layout,
                             const Normalizer& norm, const std::vector<std::int64_t>& origins);

/// Trains all five variants on the shared pretrained STRL and split.
std::map<std::string, HorizonReport> run_ablation(const PipelineConfig& cfg, const Dataset& data,
                                                  const Checkpoint* pretrained, std::ostream* log = nullptr);

/// Deterministic subsample of window origins (sorted, without replacement).
std::vector<std::int64_t> subsample_origins(const std::vector<std::int64_t>& origins, std::int64_t count,
                                            std::uint64_t seed, const std::string& label);

Forecaster forecaster_from_checkpoint(const Checkpoint& ckpt, std::int64_t num_nodes, const TrafficGraph* graph);

} // namespace lsttn
