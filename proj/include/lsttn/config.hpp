#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsttn/data.hpp"

namespace lsttn {

/// Whole-pipeline configuration parsed from the sectioned key=value file.
struct PipelineConfig {
	// [data]
	std::string series_path;
	std::string graph_path; // optional; empty -> adaptive-only spatial terms
	SeriesFormat format = SeriesFormat::Csv;
	double ratio_train = 0.7, ratio_val = 0.2, ratio_test = 0.1;

	// [layout]
	DataLayout layout;

	// [mst]
	std::int64_t d_repr = 64;
	std::int64_t n_layers = 4;
	std::int64_t n_heads = 4;
	std::int64_t d_ff = 0;
	double dropout = 0.1;
	double mask_ratio = 0.75;

	// [extractors]
	std::int64_t lt_channels = 4;
	std::int64_t lt_kernel = 2;
	std::int64_t diffusion_K = 2;
	std::int64_t d_emb = 10;
	std::int64_t d_short = 64;
	std::string stgnn = "ref_gwnet";
	std::int64_t st_channels = 16;
	std::int64_t st_blocks = 4;
	double st_dropout = 0.0;

	// [fusion]
	std::int64_t h1 = 32, h2 = 32, h3 = 128;

	// [train]
	std::int64_t batch_size = 32;
	std::int64_t pretrain_epochs = 20;
	std::int64_t epochs = 30;
	double base_lr = 1e-3;
	std::vector<std::int64_t> lr_milestones = {50, 80};
	double lr_gamma = 0.1;
	double grad_clip = 5.0;
	std::uint64_t seed = 1;
	std::int64_t windows_per_epoch = 0; // 0 = all windows
	std::int64_t val_windows = 0;       // 0 = all
	std::int64_t test_windows = 0;      // 0 = all
	std::string ablation = "full";
	bool finetune_strl = false;
	std::string pretrained_checkpoint;

	std::string raw_text; // verbatim file contents (checkpoint snapshot, run hash)

	void validate() const;
	std::uint64_t hash() const;

	static PipelineConfig parse_text(const std::string& text);
	static PipelineConfig parse_file(const std::string& path);
};

} // namespace lsttn
