#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lsttn/autodiff.hpp"
#include "lsttn/data.hpp"
#include "lsttn/params.hpp"

namespace lsttn {

struct ShortTrendConfig {
	std::int64_t num_nodes = 0;
	std::int64_t S = 12;
	std::int64_t channels = 16;
	std::int64_t blocks = 4;
	std::int64_t d_short = 64;
	std::int64_t K = 2;
	std::int64_t d_emb = 10;
	double dropout = 0.0;
	bool use_graph = true;
};

/// Pluggable short-term trend extractor: per-node feature [V, d_short] from
/// the short history and the graph.
class ShortTrendModel {
public:
	virtual ~ShortTrendModel() = default;
	/// x_short [S, V] (normalized) -> H_short [V, d_short]
	virtual ad::Var forward(const TrafficGraph* graph, const Tensor& x_short, Rng* dropout_rng = nullptr) const = 0;
	virtual std::int64_t d_short() const = 0;
	virtual ParamStore& params() = 0;
	virtual const ParamStore& params() const = 0;
};

using ShortTrendFactory =
    std::function<std::unique_ptr<ShortTrendModel>(const ShortTrendConfig&, std::uint64_t seed)>;

void register_stgnn(const std::string& name, ShortTrendFactory factory);
std::unique_ptr<ShortTrendModel> construct_stgnn(const std::string& name, const ShortTrendConfig& cfg,
                                                 std::uint64_t seed);
std::vector<std::string> registered_stgnns();

/// Reference short-term network in the Graph WaveNet style: gated dilated
/// causal temporal convolutions interleaved with diffusion graph convolution,
/// residual connections, and a skip aggregate taken at the last time step.
class RefGWNet final : public ShortTrendModel {
public:
	RefGWNet(ShortTrendConfig cfg, std::uint64_t seed);

	ad::Var forward(const TrafficGraph* graph, const Tensor& x_short, Rng* dropout_rng = nullptr) const override;
	std::int64_t d_short() const override { return cfg_.d_short; }
	ParamStore& params() override { return params_; }
	const ParamStore& params() const override { return params_; }

	const std::vector<std::int64_t>& dilations() const { return dilations_; }

private:
	ShortTrendConfig cfg_;
	std::vector<std::int64_t> dilations_;
	ParamStore params_;
};

} // namespace lsttn
