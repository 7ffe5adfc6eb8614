#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsttn/rng.hpp"
#include "lsttn/tensor.hpp"

namespace lsttn {

/// Sensor matrix with timestamps and a validity mask. mask[t][v] is true where
/// the stored value is valid; stored zeros count as missing (METR-LA convention).
struct TrafficSeries {
	Tensor values;                      // [T, V]
	std::vector<std::int64_t> timestamps; // fixed spacing
	std::vector<std::uint8_t> mask;     // [T*V], 1 = valid
	std::vector<std::string> node_ids;

	std::int64_t T() const { return values.dim(0); }
	std::int64_t V() const { return values.dim(1); }
	bool valid(std::int64_t t, std::int64_t v) const { return mask[static_cast<std::size_t>(t * V() + v)] != 0; }
};

struct TrafficGraph {
	std::int64_t num_nodes = 0;
	Tensor adjacency; // [V, V], nonnegative
	Tensor P_f;       // row-normalized A
	Tensor P_b;       // row-normalized A^T
};

struct DataLayout {
	std::int64_t L = 4032;         // long window, steps
	std::int64_t S = 12;           // subseries length
	std::int64_t F = 12;           // forecast length
	std::int64_t steps_per_day = 288;
	std::int64_t stride = 1;

	std::int64_t n_sub() const { return L / S; }
	std::int64_t subseries_per_day() const { return steps_per_day / S; }
	void validate() const;
};

struct WindowSample {
	Tensor x_long;  // [L, V]
	Tensor x_short; // [S, V]
	Tensor y;       // [F, V]
	std::vector<std::uint8_t> x_mask; // [L*V]
	std::vector<std::uint8_t> y_mask; // [F*V]
	std::int64_t origin = 0;
};

struct Normalizer {
	double mean = 0.0;
	double std = 1.0;

	double apply(double x) const { return (x - mean) / std; }
	double invert(double z) const { return z * std + mean; }
	Tensor apply(const Tensor& t) const;
	Tensor invert(const Tensor& t) const;
};

enum class SeriesFormat { Csv, Binary };

struct SynthSpec {
	std::int64_t nodes = 20;
	std::int64_t days = 28;
	double base_level = 50.0;
	double daily_amp = 20.0;
	double weekly_amp = 0.4;  // relative modulation of the daily amplitude
	double trend_max = 0.0;   // per-node slope bound, units per day
	double noise_sigma = 0.0;
	std::int64_t missing_blocks = 0;
	std::uint64_t seed = 1;

	static SynthSpec parse_file(const std::string& path);
	static SynthSpec parse_text(const std::string& text);
};

// Loading and persistence
TrafficSeries load_series(const std::string& path, SeriesFormat format);
void save_series(const TrafficSeries& series, const std::string& path, SeriesFormat format);
TrafficGraph load_graph(const std::string& path, std::int64_t num_nodes);
void save_graph(const TrafficGraph& graph, const std::string& path);

// Graph machinery
std::pair<Tensor, Tensor> transition_matrices(const Tensor& adjacency);
TrafficGraph make_graph(std::int64_t num_nodes, Tensor adjacency);

// Normalization
Normalizer fit_normalizer(const TrafficSeries& train_slice);

// Splitting / windowing
std::vector<TrafficSeries> split_dataset(const TrafficSeries& series, double train, double val, double test);
std::vector<std::int64_t> window_origins(const TrafficSeries& slice, const DataLayout& layout);
WindowSample make_window(const TrafficSeries& slice, const DataLayout& layout, std::int64_t origin,
                         const Normalizer* norm = nullptr);
std::vector<WindowSample> make_windows(const TrafficSeries& slice, const DataLayout& layout,
                                       const Normalizer* norm = nullptr);

/// [L, V] -> [N_sub, V, S]; lossless.
Tensor split_subseries(const Tensor& x_long, std::int64_t S);
/// Inverse of split_subseries.
Tensor join_subseries(const Tensor& tokens);

struct MaskSets {
	std::vector<std::int64_t> masked;
	std::vector<std::int64_t> unmasked;
};
MaskSets sample_mask(std::int64_t n_sub, double ratio, Rng& rng);

struct PeriodicIndices {
	std::int64_t week = 0;
	std::int64_t day = 0;
};
PeriodicIndices periodic_indices(const DataLayout& layout);

std::pair<TrafficSeries, TrafficGraph> synth_generate(const SynthSpec& spec);

} // namespace lsttn
