// Command-line front end: synth, pretrain, train, eval, ablate, plot.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lsttn/checkpoint.hpp"
#include "lsttn/config.hpp"
#include "lsttn/data.hpp"
#include "lsttn/errors.hpp"
#include "lsttn/metrics.hpp"
#include "lsttn/training.hpp"

namespace fs = std::filesystem;
using namespace lsttn;

namespace {

struct CommonOpts {
	std::string config_path;
	std::string out_dir;
	std::int64_t seed = -1; // -1: use config value
	std::string stgnn;
	std::string ablation;
	std::int64_t horizon = 0; // 0: report all
	bool no_timestamp = false;
};

std::string hex64(std::uint64_t h) {
	char buf[17];
	std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

PipelineConfig load_config(const CommonOpts& opts) {
	if (opts.config_path.empty()) throw ConfigError("--config is required");
	PipelineConfig cfg = PipelineConfig::parse_file(opts.config_path);
	if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
	if (!opts.stgnn.empty()) cfg.stgnn = opts.stgnn;
	if (!opts.ablation.empty()) cfg.ablation = opts.ablation;
	cfg.validate();
	return cfg;
}

fs::path run_dir(const CommonOpts& opts, const PipelineConfig& cfg) {
	fs::path dir = opts.out_dir.empty() ? fs::path("runs") / hex64(cfg.hash()) : fs::path(opts.out_dir);
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec) throw IoError("cannot create output directory " + dir.string());
	return dir;
}

void write_text(const fs::path& path, const std::string& text) {
	std::ofstream out(path);
	if (!out) throw IoError("cannot write " + path.string());
	out << text;
	if (!out) throw IoError("short write on " + path.string());
}

void write_meta(const fs::path& dir, const std::string& command, const PipelineConfig& cfg, bool no_timestamp) {
	std::ostringstream meta;
	meta << "command=" << command << "\n";
	meta << "config_hash=" << hex64(cfg.hash()) << "\n";
	meta << "seed=" << cfg.seed << "\n";
	if (!no_timestamp) {
		auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
		meta << "timestamp=" << now << "\n";
	}
	write_text(dir / "run_meta.txt", meta.str());
}

void write_report(const fs::path& dir, const std::string& name, const HorizonReport& report, std::int64_t horizon) {
	write_text(dir / (name + ".csv"), report.to_csv());
	write_text(dir / (name + ".txt"), report.to_text());
	if (horizon > 0) {
		const auto& c = report.at_horizon(horizon);
		std::cout << name << " horizon " << c.horizon << ": rmse=" << c.rmse << " mae=" << c.mae
		          << " mape=" << c.mape << "\n";
	} else {
		std::cout << report.to_text();
	}
}

std::string losses_csv(const std::vector<double>& train, const std::vector<double>& val) {
	std::ostringstream out;
	out << "epoch,train_loss,val_loss\n";
	for (std::size_t i = 0; i < train.size(); ++i) out << i << "," << train[i] << "," << val[i] << "\n";
	return out.str();
}

int cmd_synth(const std::string& spec_path, const CommonOpts& opts) {
	const std::string& path = spec_path.empty() ? opts.config_path : spec_path;
	SynthSpec spec = path.empty() ? SynthSpec{} : SynthSpec::parse_file(path);
	if (opts.seed >= 0) spec.seed = static_cast<std::uint64_t>(opts.seed);
	auto [series, graph] = synth_generate(spec);
	fs::path dir = opts.out_dir.empty() ? fs::path("runs") / "synth" : fs::path(opts.out_dir);
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec) throw IoError("cannot create output directory " + dir.string());
	save_series(series, (dir / "series.csv").string(), SeriesFormat::Csv);
	save_graph(graph, (dir / "graph.csv").string());
	std::cout << "wrote " << (dir / "series.csv").string() << " (" << series.T() << " steps, " << series.V()
	          << " nodes) and " << (dir / "graph.csv").string() << "\n";
	return 0;
}

int cmd_pretrain(const CommonOpts& opts) {
	PipelineConfig cfg = load_config(opts);
	fs::path dir = run_dir(opts, cfg);
	Dataset data = Dataset::load(cfg);
	auto result = run_pretrain(cfg, data, &std::cout);
	result.checkpoint.save((dir / "pretrain.ckpt").string());
	write_text(dir / "pretrain_losses.csv", losses_csv(result.train_losses, result.val_losses));
	write_meta(dir, "pretrain", cfg, opts.no_timestamp);
	std::cout << "best val loss " << result.checkpoint.best_val << " at epoch " << result.checkpoint.epoch << "\n";
	return 0;
}

int cmd_train(const CommonOpts& opts) {
	PipelineConfig cfg = load_config(opts);
	fs::path dir = run_dir(opts, cfg);
	Dataset data = Dataset::load(cfg);
	Checkpoint pretrained;
	const Checkpoint* pre = nullptr;
	if (!cfg.pretrained_checkpoint.empty()) {
		pretrained = Checkpoint::load(cfg.pretrained_checkpoint);
		pre = &pretrained;
	}
	auto result = run_forecast(cfg, data, pre, &std::cout);
	result.checkpoint.save((dir / ("forecast_" + cfg.ablation + ".ckpt")).string());
	write_report(dir, "test_report_" + cfg.ablation, result.test_report, opts.horizon);
	write_meta(dir, "train", cfg, opts.no_timestamp);
	return 0;
}

int cmd_eval(const std::string& ckpt_path, const CommonOpts& opts) {
	PipelineConfig cfg = load_config(opts);
	fs::path dir = run_dir(opts, cfg);
	Checkpoint ckpt = Checkpoint::load(ckpt_path);
	Dataset data = Dataset::load(cfg);
	auto report = evaluate_checkpoint(ckpt, data);
	write_report(dir, "eval_report", report, opts.horizon);
	write_meta(dir, "eval", cfg, opts.no_timestamp);
	return 0;
}

int cmd_ablate(const CommonOpts& opts) {
	PipelineConfig cfg = load_config(opts);
	fs::path dir = run_dir(opts, cfg);
	Dataset data = Dataset::load(cfg);
	Checkpoint pretrained;
	const Checkpoint* pre = nullptr;
	if (!cfg.pretrained_checkpoint.empty()) {
		pretrained = Checkpoint::load(cfg.pretrained_checkpoint);
		pre = &pretrained;
	}
	auto reports = run_ablation(cfg, data, pre, &std::cout);
	std::ostringstream combined;
	combined << "variant,horizon,rmse,mae,mape,n_valid\n";
	for (const auto& [variant, report] : reports) {
		write_report(dir, "test_report_" + variant, report, opts.horizon);
		for (const auto& c : report.cells)
			combined << variant << "," << c.horizon << "," << c.rmse << "," << c.mae << "," << c.mape << ","
			         << c.n_valid << "\n";
	}
	write_text(dir / "ablation.csv", combined.str());
	write_meta(dir, "ablate", cfg, opts.no_timestamp);
	return 0;
}

// Overlay of ground truth vs h-step-ahead predictions on the test slice.
int cmd_plot(const std::string& ckpt_path, const std::string& nodes_arg, std::int64_t from, std::int64_t to,
             bool svg, const CommonOpts& opts) {
	PipelineConfig cfg = load_config(opts);
	std::int64_t h = opts.horizon > 0 ? opts.horizon : cfg.layout.F;
	if (h < 1 || h > cfg.layout.F) throw ConfigError("--horizon must lie in [1, F]");
	fs::path dir = run_dir(opts, cfg);
	Checkpoint ckpt = Checkpoint::load(ckpt_path);
	Dataset data = Dataset::load(cfg);
	const TrafficGraph* graph = data.graph ? &*data.graph : nullptr;
	Forecaster model = forecaster_from_checkpoint(ckpt, data.test.V(), graph);
	Normalizer norm{ckpt.norm_mean, ckpt.norm_std};

	std::vector<std::int64_t> nodes;
	{
		std::istringstream in(nodes_arg);
		std::string tok;
		while (std::getline(in, tok, ','))
			if (!tok.empty()) nodes.push_back(std::stoll(tok));
	}
	if (nodes.empty()) nodes.push_back(0);
	for (auto v : nodes)
		if (v < 0 || v >= data.test.V()) throw ValidationError("node index " + std::to_string(v) + " out of range");

	// target time t is predicted by the window whose origin is t - (h-1)
	std::int64_t lo = cfg.layout.L + h - 1;
	std::int64_t hi = data.test.T() - (cfg.layout.F - h);
	if (from < lo || to > hi || from >= to)
		throw ValidationError("plot range [" + std::to_string(from) + "," + std::to_string(to) +
		                      ") outside the usable test slice [" + std::to_string(lo) + "," + std::to_string(hi) + ")");

	std::ostringstream csv;
	csv << "time,node,truth,prediction,valid\n";
	std::map<std::int64_t, std::vector<std::vector<double>>> curves; // node -> {truth, pred, valid}
	for (auto v : nodes) curves[v] = {{}, {}, {}};
	for (std::int64_t t = from; t < to; ++t) {
		auto w = make_window(data.test, cfg.layout, t - (h - 1), &norm);
		auto y_hat = model.forward(w, nullptr, nullptr);
		for (auto v : nodes) {
			bool valid = data.test.valid(t, v);
			double pred = norm.invert(y_hat->value.at(h - 1, v));
			csv << t << "," << v << ",";
			if (valid) csv << data.test.values.at(t, v);
			csv << "," << pred << "," << (valid ? 1 : 0) << "\n";
			curves[v][0].push_back(valid ? data.test.values.at(t, v) : 0.0);
			curves[v][1].push_back(pred);
			curves[v][2].push_back(valid ? 1.0 : 0.0);
		}
	}
	write_text(dir / "plot.csv", csv.str());

	if (svg) {
		double ymin = 1e300, ymax = -1e300;
		for (const auto& [v, c] : curves)
			for (std::size_t i = 0; i < c[0].size(); ++i) {
				if (c[2][i] > 0) ymin = std::min(ymin, c[0][i]), ymax = std::max(ymax, c[0][i]);
				ymin = std::min(ymin, c[1][i]);
				ymax = std::max(ymax, c[1][i]);
			}
		if (ymax <= ymin) ymax = ymin + 1.0;
		const double W = 900.0, H = 220.0, pad = 30.0;
		std::int64_t n = to - from;
		auto sx = [&](std::int64_t i) { return pad + (W - 2 * pad) * static_cast<double>(i) / std::max<std::int64_t>(1, n - 1); };
		auto sy = [&](double y) { return H - pad - (H - 2 * pad) * (y - ymin) / (ymax - ymin); };
		std::ostringstream out;
		out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
		    << H * static_cast<double>(nodes.size()) << "'>\n";
		double y_off = 0.0;
		for (auto v : nodes) {
			const auto& c = curves[v];
			out << "<g transform='translate(0," << y_off << ")'>\n";
			out << "<text x='" << pad << "' y='15' font-size='12'>node " << v << " (h=" << h << ")</text>\n";
			// truth: black, broken at missing samples; prediction: continuous
			for (int series = 0; series < 2; ++series) {
				out << "<path fill='none' stroke='" << (series == 0 ? "black" : "red") << "' d='";
				bool pen_up = true;
				for (std::int64_t i = 0; i < n; ++i) {
					if (series == 0 && c[2][static_cast<std::size_t>(i)] == 0.0) {
						pen_up = true;
						continue;
					}
					double y = c[static_cast<std::size_t>(series)][static_cast<std::size_t>(i)];
					out << (pen_up ? "M" : "L") << sx(i) << " " << sy(y) << " ";
					pen_up = false;
				}
				out << "'/>\n";
			}
			out << "</g>\n";
			y_off += H;
		}
		out << "</svg>\n";
		write_text(dir / "plot.svg", out.str());
	}
	write_meta(dir, "plot", cfg, opts.no_timestamp);
	std::cout << "wrote " << (dir / "plot.csv").string() << " (" << (to - from) * static_cast<std::int64_t>(nodes.size())
	          << " rows)\n";
	return 0;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"long/short-term traffic forecasting pipeline"};
	app.require_subcommand(1);

	CommonOpts opts;
	std::string spec_path, ckpt_path, nodes_arg = "0";
	std::int64_t plot_from = 0, plot_to = 0;
	bool svg = false;

	auto add_common = [&](CLI::App* sub) {
		sub->add_option("--config", opts.config_path, "pipeline config file");
		sub->add_option("--out", opts.out_dir, "output directory (default: runs/<config hash>)");
		sub->add_option("--seed", opts.seed, "override the config seed");
		sub->add_option("--stgnn", opts.stgnn, "short-term model name");
		sub->add_option("--ablation", opts.ablation, "fusion variant: full|no_lt|no_p|no_st|st_only");
		sub->add_option("--horizon", opts.horizon, "forecast horizon of interest");
		sub->add_flag("--no-timestamp", opts.no_timestamp, "omit timestamps from run metadata");
	};

	auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
	synth->add_option("--spec", spec_path, "synthetic spec file (key = value)");
	add_common(synth);

	auto* pretrain = app.add_subcommand("pretrain", "masked-subseries pretraining");
	add_common(pretrain);
	auto* train = app.add_subcommand("train", "forecast training on a pretrained encoder");
	add_common(train);
	auto* eval_ = app.add_subcommand("eval", "evaluate a forecast checkpoint on the test slice");
	eval_->add_option("--checkpoint", ckpt_path, "forecast checkpoint")->required();
	add_common(eval_);
	auto* ablate = app.add_subcommand("ablate", "train and compare all fusion variants");
	add_common(ablate);
	auto* plot = app.add_subcommand("plot", "truth-vs-prediction overlay on the test slice");
	plot->add_option("--checkpoint", ckpt_path, "forecast checkpoint")->required();
	plot->add_option("--nodes", nodes_arg, "comma-separated node indices");
	plot->add_option("--from", plot_from, "first target time step (test-slice index)")->required();
	plot->add_option("--to", plot_to, "one past the last target time step")->required();
	plot->add_flag("--svg", svg, "also emit an SVG image");
	add_common(plot);

	CLI11_PARSE(app, argc, argv);

	try {
		if (synth->parsed()) return cmd_synth(spec_path, opts);
		if (pretrain->parsed()) return cmd_pretrain(opts);
		if (train->parsed()) return cmd_train(opts);
		if (eval_->parsed()) return cmd_eval(ckpt_path, opts);
		if (ablate->parsed()) return cmd_ablate(opts);
		if (plot->parsed()) return cmd_plot(ckpt_path, nodes_arg, plot_from, plot_to, svg, opts);
	} catch (const NumericError& e) {
		std::cerr << e.what() << "\n";
		return 4;
	} catch (const IoError& e) {
		std::cerr << e.what() << "\n";
		return 3;
	} catch (const ParseError& e) {
		std::cerr << e.what() << "\n";
		return 3;
	} catch (const ConfigError& e) {
		std::cerr << e.what() << "\n";
		return 2;
	} catch (const ValidationError& e) {
		std::cerr << e.what() << "\n";
		return 2;
	} catch (const LayoutError& e) {
		std::cerr << e.what() << "\n";
		return 2;
	} catch (const DegenerateDataError& e) {
		std::cerr << e.what() << "\n";
		return 2;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 2;
	}
	return 0;
}
