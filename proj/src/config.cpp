#include "lsttn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lsttn/errors.hpp"
#include "lsttn/fusion.hpp"

namespace lsttn {

namespace {

std::string trim(const std::string& s) {
	auto b = s.find_first_not_of(" \t\r\n");
	if (b == std::string::npos) return "";
	auto e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
	std::vector<std::int64_t> out;
	std::istringstream in(s);
	std::string tok;
	while (std::getline(in, tok, ',')) {
		tok = trim(tok);
		if (!tok.empty()) out.push_back(std::stoll(tok));
	}
	return out;
}

bool parse_bool(const std::string& s) {
	if (s == "true" || s == "1" || s == "yes") return true;
	if (s == "false" || s == "0" || s == "no") return false;
	throw ConfigError("bad boolean value '" + s + "'");
}

} // namespace

PipelineConfig PipelineConfig::parse_text(const std::string& text) {
	PipelineConfig c;
	c.raw_text = text;
	std::istringstream in(text);
	std::string line, section;
	std::size_t line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		std::string t = trim(line);
		if (t.empty() || t[0] == '#' || t[0] == ';') continue;
		if (t.front() == '[') {
			if (t.back() != ']') throw ConfigError("unterminated section at line " + std::to_string(line_no));
			section = t.substr(1, t.size() - 2);
			continue;
		}
		auto eq = t.find('=');
		if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + " has no '='");
		std::string key = trim(t.substr(0, eq));
		std::string value = trim(t.substr(eq + 1));
		try {
			if (section == "data") {
				if (key == "series") c.series_path = value;
				else if (key == "graph") c.graph_path = value;
				else if (key == "format") {
					if (value == "csv") c.format = SeriesFormat::Csv;
					else if (value == "binary") c.format = SeriesFormat::Binary;
					else throw ConfigError("format must be csv or binary");
				} else if (key == "ratios") {
					std::istringstream rs(value);
					std::string tok;
					std::vector<double> r;
					while (std::getline(rs, tok, ',')) r.push_back(std::stod(trim(tok)));
					if (r.size() != 3) throw ConfigError("ratios needs three values");
					c.ratio_train = r[0];
					c.ratio_val = r[1];
					c.ratio_test = r[2];
				} else throw ConfigError("unknown [data] key '" + key + "'");
			} else if (section == "layout") {
				if (key == "L") c.layout.L = std::stoll(value);
				else if (key == "S") c.layout.S = std::stoll(value);
				else if (key == "F") c.layout.F = std::stoll(value);
				else if (key == "steps_per_day") c.layout.steps_per_day = std::stoll(value);
				else if (key == "stride") c.layout.stride = std::stoll(value);
				else throw ConfigError("unknown [layout] key '" + key + "'");
			} else if (section == "mst") {
				if (key == "d_repr") c.d_repr = std::stoll(value);
				else if (key == "n_layers") c.n_layers = std::stoll(value);
				else if (key == "n_heads") c.n_heads = std::stoll(value);
				else if (key == "d_ff") c.d_ff = std::stoll(value);
				else if (key == "dropout") c.dropout = std::stod(value);
				else if (key == "mask_ratio") c.mask_ratio = std::stod(value);
				else throw ConfigError("unknown [mst] key '" + key + "'");
			} else if (section == "extractors") {
				if (key == "lt_channels") c.lt_channels = std::stoll(value);
				else if (key == "lt_kernel") c.lt_kernel = std::stoll(value);
				else if (key == "K") c.diffusion_K = std::stoll(value);
				else if (key == "d_emb") c.d_emb = std::stoll(value);
				else if (key == "d_short") c.d_short = std::stoll(value);
				else if (key == "stgnn") c.stgnn = value;
				else if (key == "st_channels") c.st_channels = std::stoll(value);
				else if (key == "st_blocks") c.st_blocks = std::stoll(value);
				else if (key == "st_dropout") c.st_dropout = std::stod(value);
				else throw ConfigError("unknown [extractors] key '" + key + "'");
			} else if (section == "fusion") {
				if (key == "h1") c.h1 = std::stoll(value);
				else if (key == "h2") c.h2 = std::stoll(value);
				else if (key == "h3") c.h3 = std::stoll(value);
				else throw ConfigError("unknown [fusion] key '" + key + "'");
			} else if (section == "train") {
				if (key == "batch_size") c.batch_size = std::stoll(value);
				else if (key == "pretrain_epochs") c.pretrain_epochs = std::stoll(value);
				else if (key == "epochs") c.epochs = std::stoll(value);
				else if (key == "base_lr") c.base_lr = std::stod(value);
				else if (key == "lr_milestones") c.lr_milestones = parse_int_list(value);
				else if (key == "lr_gamma") c.lr_gamma = std::stod(value);
				else if (key == "grad_clip") c.grad_clip = std::stod(value);
				else if (key == "seed") c.seed = std::stoull(value);
				else if (key == "windows_per_epoch") c.windows_per_epoch = std::stoll(value);
				else if (key == "val_windows") c.val_windows = std::stoll(value);
				else if (key == "test_windows") c.test_windows = std::stoll(value);
				else if (key == "ablation") c.ablation = value;
				else if (key == "finetune_strl") c.finetune_strl = parse_bool(value);
				else if (key == "pretrained_checkpoint") c.pretrained_checkpoint = value;
				else throw ConfigError("unknown [train] key '" + key + "'");
			} else {
				throw ConfigError("unknown section [" + section + "]");
			}
		} catch (const ConfigError&) {
			throw;
		} catch (const std::exception&) {
			throw ConfigError("bad value for key '" + key + "': " + value);
		}
	}
	if (const char* env = std::getenv("LSTTN_SEED")) c.seed = std::stoull(env);
	c.validate();
	return c;
}

PipelineConfig PipelineConfig::parse_file(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open config " + path);
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_text(ss.str());
}

void PipelineConfig::validate() const {
	layout.validate();
	if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
	if (mask_ratio <= 0.0 || mask_ratio >= 1.0) throw ConfigError("mask_ratio must lie in (0,1)");
	if (d_repr <= 0 || n_heads <= 0 || d_repr % n_heads != 0)
		throw ConfigError("d_repr must be positive and divisible by n_heads");
	for (std::size_t i = 1; i < lr_milestones.size(); ++i)
		if (lr_milestones[i] <= lr_milestones[i - 1]) throw ConfigError("lr_milestones must be strictly increasing");
	parse_variant(ablation);
}

std::uint64_t PipelineConfig::hash() const {
	std::uint64_t h = 14695981039346656037ull;
	for (unsigned char ch : raw_text) {
		h ^= ch;
		h *= 1099511628211ull;
	}
	return h;
}

} // namespace lsttn
