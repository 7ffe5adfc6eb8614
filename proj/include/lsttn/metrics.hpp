#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsttn/tensor.hpp"

namespace lsttn {

// Masked evaluation metrics: every reduction runs over valid entries only.
// MAPE is returned as a fraction; entries with zero ground truth must be
// excluded by the caller's mask (zeros mean missing anyway).

double masked_rmse(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid);
double masked_mae(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid);
double masked_mape(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid);

struct HorizonCell {
	std::int64_t horizon = 0; // steps
	double rmse = 0.0;
	double mae = 0.0;
	double mape = 0.0;
	std::int64_t n_valid = 0;
};

struct HorizonReport {
	std::vector<HorizonCell> cells;

	std::string to_csv() const;
	std::string to_text() const;
	const HorizonCell& at_horizon(std::int64_t h) const;
};

/// Per-horizon metrics over the h-th forecast step of each sample
/// (single-step convention). Inputs are denormalized [F, V] tensors.
HorizonReport horizon_report(const std::vector<Tensor>& y_hat, const std::vector<Tensor>& y,
                             const std::vector<std::vector<std::uint8_t>>& y_masks,
                             const std::vector<std::int64_t>& horizons = {3, 6, 12});

} // namespace lsttn
