#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lsttn/autodiff.hpp"
#include "lsttn/data.hpp"
#include "lsttn/params.hpp"

namespace lsttn {

struct PeriodicityConfig {
	std::int64_t num_nodes = 0;
	std::int64_t d_repr = 64;
	std::int64_t channels = 4;
	std::int64_t K = 2;
	std::int64_t d_emb = 10;
	bool use_graph = true; // when false, only the adaptive-adjacency term remains
};

/// Row-stochastic adaptive adjacency Softmax(ReLU(E1 E2^T)).
ad::Var adaptive_adjacency(const ad::Var& e1, const ad::Var& e2);

/// Truncated diffusion sum over forward/backward transitions and the adaptive
/// matrix. Sx [V, d]; weights[k] = {W_f, W_b, W_adp}, each [d, c]; null P_f/P_b
/// drop the corresponding terms. Matrix powers are applied iteratively.
ad::Var diffusion_graph_conv(const ad::Var& sx, const Tensor* P_f, const Tensor* P_b, const ad::Var& A_adp,
                             const std::vector<std::array<ad::Var, 3>>& weights, std::int64_t K);

/// Same diffusion sum applied per time position of a sequence [V, T, c].
ad::Var diffusion_graph_conv_seq(const ad::Var& x, const Tensor* P_f, const Tensor* P_b, const ad::Var& A_adp,
                                 const std::vector<std::array<ad::Var, 3>>& weights, std::int64_t K);

/// Weekly/daily periodic feature extraction from the subseries representations
/// at the periodic indices, with separate weight sets for the two paths.
class PeriodicityExtractor {
public:
	PeriodicityExtractor(PeriodicityConfig cfg, std::uint64_t seed);

	/// S [V, N_sub, d_repr] -> (H_week [V,c], H_day [V,c])
	std::pair<ad::Var, ad::Var> forward(const ad::Var& s, const PeriodicIndices& idx, const TrafficGraph* graph) const;

	ad::Var adaptive() const;

	const PeriodicityConfig& config() const { return cfg_; }
	ParamStore& params() { return params_; }
	const ParamStore& params() const { return params_; }

private:
	std::vector<std::array<ad::Var, 3>> weight_set(const std::string& path) const;

	PeriodicityConfig cfg_;
	ParamStore params_;
};

} // namespace lsttn
