#include "lsttn/metrics.hpp"

#include <cmath>
#include <sstream>

#include "lsttn/errors.hpp"

namespace lsttn {

namespace {

void check_shapes(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid) {
	if (y_hat.shape != y.shape) throw LayoutError("metrics: shape mismatch");
	if (valid.size() != y.data.size()) throw LayoutError("metrics: mask size mismatch");
}

} // namespace

double masked_rmse(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid) {
	check_shapes(y_hat, y, valid);
	double s = 0.0;
	std::int64_t n = 0;
	for (std::int64_t i = 0; i < y.size(); ++i)
		if (valid[static_cast<std::size_t>(i)]) {
			double d = y_hat.at(i) - y.at(i);
			s += d * d;
			++n;
		}
	if (n == 0) throw DegenerateDataError("rmse: empty valid set");
	return std::sqrt(s / static_cast<double>(n));
}

double masked_mae(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid) {
	check_shapes(y_hat, y, valid);
	double s = 0.0;
	std::int64_t n = 0;
	for (std::int64_t i = 0; i < y.size(); ++i)
		if (valid[static_cast<std::size_t>(i)]) {
			s += std::abs(y_hat.at(i) - y.at(i));
			++n;
		}
	if (n == 0) throw DegenerateDataError("mae: empty valid set");
	return s / static_cast<double>(n);
}

double masked_mape(const Tensor& y_hat, const Tensor& y, const std::vector<std::uint8_t>& valid) {
	check_shapes(y_hat, y, valid);
	double s = 0.0;
	std::int64_t n = 0;
	for (std::int64_t i = 0; i < y.size(); ++i)
		if (valid[static_cast<std::size_t>(i)] && y.at(i) != 0.0) {
			s += std::abs((y_hat.at(i) - y.at(i)) / y.at(i));
			++n;
		}
	if (n == 0) throw DegenerateDataError("mape: empty valid set");
	return s / static_cast<double>(n);
}

const HorizonCell& HorizonReport::at_horizon(std::int64_t h) const {
	for (const auto& c : cells)
		if (c.horizon == h) return c;
	throw ValidationError("no report cell for horizon " + std::to_string(h));
}

std::string HorizonReport::to_csv() const {
	std::ostringstream out;
	out.precision(12);
	out << "horizon,rmse,mae,mape,n_valid\n";
	for (const auto& c : cells)
		out << c.horizon << "," << c.rmse << "," << c.mae << "," << c.mape << "," << c.n_valid << "\n";
	return out.str();
}

std::string HorizonReport::to_text() const {
	std::ostringstream out;
	out.precision(4);
	out << std::fixed;
	out << "horizon      rmse       mae      mape   n_valid\n";
	for (const auto& c : cells) {
		out.width(7);
		out << c.horizon;
		out.width(10);
		out << c.rmse;
		out.width(10);
		out << c.mae;
		out.width(10);
		out << c.mape;
		out.width(10);
		out << c.n_valid << "\n";
	}
	return out.str();
}

HorizonReport horizon_report(const std::vector<Tensor>& y_hat, const std::vector<Tensor>& y,
                             const std::vector<std::vector<std::uint8_t>>& y_masks,
                             const std::vector<std::int64_t>& horizons) {
	if (y_hat.size() != y.size() || y.size() != y_masks.size())
		throw ValidationError("horizon_report: sample count mismatch");
	if (y_hat.empty()) throw DegenerateDataError("horizon_report: no samples");
	std::int64_t F = y_hat[0].dim(0), V = y_hat[0].dim(1);
	HorizonReport report;
	for (auto h : horizons) {
		if (h < 1 || h > F) throw ValidationError("horizon_report: horizon out of range");
		double se = 0.0, ae = 0.0, ape = 0.0;
		std::int64_t n = 0, n_mape = 0;
		for (std::size_t i = 0; i < y_hat.size(); ++i) {
			for (std::int64_t v = 0; v < V; ++v) {
				std::int64_t idx = (h - 1) * V + v;
				if (!y_masks[i][static_cast<std::size_t>(idx)]) continue;
				double t = y[i].at(idx), p = y_hat[i].at(idx);
				double d = p - t;
				se += d * d;
				ae += std::abs(d);
				++n;
				if (t != 0.0) {
					ape += std::abs(d / t);
					++n_mape;
				}
			}
		}
		if (n == 0) throw DegenerateDataError("horizon_report: empty valid set at horizon " + std::to_string(h));
		HorizonCell cell;
		cell.horizon = h;
		cell.rmse = std::sqrt(se / static_cast<double>(n));
		cell.mae = ae / static_cast<double>(n);
		cell.mape = n_mape > 0 ? ape / static_cast<double>(n_mape) : 0.0;
		cell.n_valid = n;
		if (cell.mae > cell.rmse + 1e-12) throw NumericError("horizon_report: MAE exceeds RMSE");
		report.cells.push_back(cell);
	}
	return report;
}

} // namespace lsttn
