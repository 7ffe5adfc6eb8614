#pragma once

#include <cstdint>
#include <string>

#include "lsttn/autodiff.hpp"
#include "lsttn/data.hpp"
#include "lsttn/params.hpp"

namespace lsttn {

struct MSTConfig {
	std::int64_t S = 12;
	std::int64_t n_sub = 336;
	std::int64_t d_repr = 64;
	std::int64_t n_layers = 4;
	std::int64_t n_heads = 4;
	std::int64_t d_ff = 0; // 0 -> 4 * d_repr
	double dropout = 0.1;

	std::int64_t ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_repr; }
	void validate() const {
		if (d_repr <= 0 || n_layers <= 0 || n_heads <= 0) throw ValidationError("mst: dims must be positive");
		if (d_repr % n_heads != 0) throw ValidationError("mst: n_heads must divide d_repr");
	}
};

/// Bernoulli dropout as a constant-mask multiply; identity when rng is null.
ad::Var dropout(const ad::Var& x, double p, Rng* rng);

/// Masked subseries Transformer: token embedding, pre-LN encoder (STRL),
/// reconstruction head, masked reconstruction loss.
class MST {
public:
	MST(MSTConfig cfg, std::uint64_t seed);

	const MSTConfig& config() const { return cfg_; }
	ParamStore& params() { return params_; }
	const ParamStore& params() const { return params_; }

	/// tokens [N,V,S] -> embeddings [V,N,d] (token projection + positional table).
	ad::Var embed_subseries(const Tensor& tokens) const;
	ad::Var embed_subseries(const ad::Var& tokens_vns) const; // [V,N,S] input

	/// Encoder over the subseries axis, per node. x [V,K,d] -> [V,K,d].
	ad::Var strl_forward(const ad::Var& x, Rng* dropout_rng = nullptr) const;

	/// Reassemble the full token sequence from unmasked reps and mask tokens,
	/// run one Transformer layer plus the linear output map. -> [V,N,S]
	ad::Var task_head(const ad::Var& s_unmasked, const MaskSets& sets, Rng* dropout_rng = nullptr) const;

	/// Mean absolute error over masked-position tokens, valid entries only.
	/// x_mask is the [L,V] validity mask of the window.
	ad::Var pretrain_loss(const ad::Var& x_hat, const Tensor& tokens, const MaskSets& sets,
	                      const std::vector<std::uint8_t>& x_mask) const;

	/// Full forward pass for pretraining: embed unmasked, encode, reconstruct.
	ad::Var reconstruct(const Tensor& tokens, const MaskSets& sets, Rng* dropout_rng = nullptr) const;

	/// Deterministic full-sequence encoding (no masking, no dropout) -> [N,V,d].
	Tensor encode_all(const Tensor& tokens) const;
	/// Same, but differentiable (for optional STRL fine-tuning) -> [V,N,d].
	ad::Var encode_all_var(const Tensor& tokens) const;

private:
	ad::Var encoder_layer(const ad::Var& x, const std::string& prefix, Rng* dropout_rng) const;

	MSTConfig cfg_;
	ParamStore params_;
};

/// [N,V,d] <-> [V,N,d]
Tensor transpose01(const Tensor& t);

} // namespace lsttn
