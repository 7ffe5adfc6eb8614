#include "lsttn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lsttn/errors.hpp"

namespace lsttn {

void DataLayout::validate() const {
	if (L < 1 || S < 1 || F < 1 || steps_per_day < 1 || stride < 1)
		throw LayoutError("layout dimensions must be positive");
	if (L % S != 0) throw LayoutError("L must be divisible by S");
	if (steps_per_day % S != 0) throw LayoutError("steps_per_day must be divisible by S");
}

Tensor Normalizer::apply(const Tensor& t) const {
	Tensor out = t;
	for (auto& v : out.data) v = (v - mean) / std;
	return out;
}

Tensor Normalizer::invert(const Tensor& t) const {
	Tensor out = t;
	for (auto& v : out.data) v = v * std + mean;
	return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
	std::vector<std::string> out;
	std::string cur;
	for (char c : line) {
		if (c == ',') {
			out.push_back(cur);
			cur.clear();
		} else if (c != '\r') {
			cur += c;
		}
	}
	out.push_back(cur);
	return out;
}

std::string trim(const std::string& s) {
	auto b = s.find_first_not_of(" \t\r\n");
	if (b == std::string::npos) return "";
	auto e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

// Timestamps may be integer step indices or ISO-8601 instants; both are
// mapped to an integer scale with constant spacing.
std::int64_t parse_timestamp(const std::string& raw, std::size_t line_no) {
	std::string s = trim(raw);
	if (s.empty()) throw ParseError("empty timestamp at line " + std::to_string(line_no));
	bool iso = s.find('T') != std::string::npos || s.find('-') != std::string::npos || s.find(':') != std::string::npos;
	if (!iso) {
		std::int64_t v = 0;
		auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
		if (ec != std::errc() || p != s.data() + s.size())
			throw ParseError("bad timestamp '" + s + "' at line " + std::to_string(line_no));
		return v;
	}
	std::tm parts{};
	int y, mo, d, h = 0, mi = 0, se = 0;
	char sep;
	std::istringstream in(s);
	in >> y >> sep >> mo >> sep >> d;
	if (!in) throw ParseError("bad ISO timestamp '" + s + "' at line " + std::to_string(line_no));
	char c = 0;
	if (in.get(c) && (c == 'T' || c == ' ')) {
		in >> h >> sep >> mi;
		if (in.get(c) && c == ':') in >> se;
	}
	parts.tm_year = y - 1900;
	parts.tm_mon = mo - 1;
	parts.tm_mday = d;
	parts.tm_hour = h;
	parts.tm_min = mi;
	parts.tm_sec = se;
	return static_cast<std::int64_t>(timegm(&parts));
}

double parse_value(const std::string& raw, std::size_t line_no, const std::string& field) {
	std::string s = trim(raw);
	if (s.empty()) return 0.0; // empty = missing (stored as 0)
	try {
		std::size_t pos = 0;
		double v = std::stod(s, &pos);
		if (pos != s.size()) throw std::invalid_argument(s);
		return v;
	} catch (const std::exception&) {
		throw ParseError("bad value '" + s + "' in field " + field + " at line " + std::to_string(line_no));
	}
}

constexpr char kBinMagic[8] = {'L', 'S', 'T', 'T', 'N', 'B', 'I', 'N'};

TrafficSeries load_series_binary(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw IoError("cannot open " + path);
	char magic[8];
	in.read(magic, 8);
	if (!in || std::memcmp(magic, kBinMagic, 8) != 0) throw ParseError(path + ": not a packed series file");
	std::int64_t T = 0, V = 0;
	in.read(reinterpret_cast<char*>(&T), 8);
	in.read(reinterpret_cast<char*>(&V), 8);
	if (!in || T < 1 || V < 1) throw ParseError(path + ": bad header dimensions");
	TrafficSeries s;
	s.node_ids.resize(static_cast<std::size_t>(V));
	for (auto& id : s.node_ids) {
		std::uint32_t n = 0;
		in.read(reinterpret_cast<char*>(&n), 4);
		id.resize(n);
		in.read(id.data(), n);
	}
	s.timestamps.resize(static_cast<std::size_t>(T));
	in.read(reinterpret_cast<char*>(s.timestamps.data()), T * 8);
	s.values = Tensor({T, V});
	in.read(reinterpret_cast<char*>(s.values.data.data()), T * V * 8);
	if (!in) throw ParseError(path + ": truncated payload");
	s.mask.resize(static_cast<std::size_t>(T * V));
	for (std::int64_t i = 0; i < T * V; ++i) s.mask[static_cast<std::size_t>(i)] = s.values.at(i) != 0.0 ? 1 : 0;
	return s;
}

void save_series_binary(const TrafficSeries& s, const std::string& path) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write " + path);
	out.write(kBinMagic, 8);
	std::int64_t T = s.T(), V = s.V();
	out.write(reinterpret_cast<const char*>(&T), 8);
	out.write(reinterpret_cast<const char*>(&V), 8);
	for (const auto& id : s.node_ids) {
		std::uint32_t n = static_cast<std::uint32_t>(id.size());
		out.write(reinterpret_cast<const char*>(&n), 4);
		out.write(id.data(), n);
	}
	out.write(reinterpret_cast<const char*>(s.timestamps.data()), T * 8);
	out.write(reinterpret_cast<const char*>(s.values.data.data()), T * V * 8);
}

} // namespace

TrafficSeries load_series(const std::string& path, SeriesFormat format) {
	if (format == SeriesFormat::Binary) return load_series_binary(path);
	std::ifstream in(path);
	if (!in) throw IoError("cannot open " + path);
	std::string line;
	if (!std::getline(in, line)) throw ParseError(path + ": empty file");
	auto header = split_csv_line(line);
	if (header.size() < 2 || trim(header[0]) != "timestamp")
		throw ParseError(path + ": header must start with 'timestamp'");
	TrafficSeries s;
	for (std::size_t i = 1; i < header.size(); ++i) s.node_ids.push_back(trim(header[i]));
	std::int64_t V = static_cast<std::int64_t>(s.node_ids.size());
	std::vector<double> values;
	std::size_t line_no = 1;
	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty()) continue;
		auto fields = split_csv_line(line);
		if (static_cast<std::int64_t>(fields.size()) != V + 1)
			throw ParseError(path + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
			                 " fields, expected " + std::to_string(V + 1));
		s.timestamps.push_back(parse_timestamp(fields[0], line_no));
		for (std::int64_t v = 0; v < V; ++v)
			values.push_back(parse_value(fields[static_cast<std::size_t>(v + 1)], line_no, s.node_ids[static_cast<std::size_t>(v)]));
	}
	std::int64_t T = static_cast<std::int64_t>(s.timestamps.size());
	if (T < 1) throw ParseError(path + ": no data rows");
	if (T >= 2) {
		std::int64_t delta = s.timestamps[1] - s.timestamps[0];
		if (delta <= 0) throw LayoutError(path + ": timestamps not strictly increasing");
		for (std::int64_t t = 1; t < T; ++t)
			if (s.timestamps[static_cast<std::size_t>(t)] - s.timestamps[static_cast<std::size_t>(t - 1)] != delta)
				throw LayoutError(path + ": non-uniform timestamp spacing at row " + std::to_string(t + 1));
	}
	s.values = Tensor({T, V}, std::move(values));
	s.mask.resize(static_cast<std::size_t>(T * V));
	for (std::int64_t i = 0; i < T * V; ++i) {
		double v = s.values.at(i);
		if (!std::isfinite(v)) throw ParseError(path + ": non-finite value");
		s.mask[static_cast<std::size_t>(i)] = v != 0.0 ? 1 : 0;
	}
	return s;
}

void save_series(const TrafficSeries& series, const std::string& path, SeriesFormat format) {
	if (format == SeriesFormat::Binary) {
		save_series_binary(series, path);
		return;
	}
	std::ofstream out(path);
	if (!out) throw IoError("cannot write " + path);
	out << "timestamp";
	for (const auto& id : series.node_ids) out << "," << id;
	out << "\n";
	out.precision(17);
	for (std::int64_t t = 0; t < series.T(); ++t) {
		out << series.timestamps[static_cast<std::size_t>(t)];
		for (std::int64_t v = 0; v < series.V(); ++v) out << "," << series.values.at(t, v);
		out << "\n";
	}
}

std::pair<Tensor, Tensor> transition_matrices(const Tensor& adjacency) {
	if (adjacency.rank() != 2 || adjacency.dim(0) != adjacency.dim(1))
		throw ValidationError("adjacency must be square");
	std::int64_t V = adjacency.dim(0);
	for (double v : adjacency.data)
		if (v < 0.0 || !std::isfinite(v)) throw ValidationError("adjacency must be nonnegative and finite");
	auto normalize_rows = [V](const Tensor& A) {
		Tensor P = A;
		for (std::int64_t i = 0; i < V; ++i) {
			double sum = 0.0;
			for (std::int64_t j = 0; j < V; ++j) sum += P.at(i, j);
			if (sum > 0.0) {
				for (std::int64_t j = 0; j < V; ++j) P.at(i, j) /= sum;
			} else {
				// zero out-degree: self-transition keeps the row stochastic
				P.at(i, i) = 1.0;
			}
		}
		return P;
	};
	Tensor At({V, V});
	for (std::int64_t i = 0; i < V; ++i)
		for (std::int64_t j = 0; j < V; ++j) At.at(j, i) = adjacency.at(i, j);
	return {normalize_rows(adjacency), normalize_rows(At)};
}

TrafficGraph make_graph(std::int64_t num_nodes, Tensor adjacency) {
	TrafficGraph g;
	g.num_nodes = num_nodes;
	auto [pf, pb] = transition_matrices(adjacency);
	g.adjacency = std::move(adjacency);
	g.P_f = std::move(pf);
	g.P_b = std::move(pb);
	return g;
}

TrafficGraph load_graph(const std::string& path, std::int64_t num_nodes) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open " + path);
	std::string line;
	if (!std::getline(in, line)) throw ParseError(path + ": empty graph file");
	auto header = split_csv_line(line);
	if (header.size() < 3 || trim(header[0]) != "from" || trim(header[1]) != "to" || trim(header[2]) != "weight")
		throw ParseError(path + ": expected header 'from,to,weight'");
	Tensor A({num_nodes, num_nodes});
	std::size_t line_no = 1;
	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty()) continue;
		auto f = split_csv_line(line);
		if (f.size() < 3) throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 3 fields");
		std::int64_t from = std::stoll(trim(f[0]));
		std::int64_t to = std::stoll(trim(f[1]));
		double w = parse_value(f[2], line_no, "weight");
		if (from < 0 || from >= num_nodes || to < 0 || to >= num_nodes)
			throw ValidationError(path + ": line " + std::to_string(line_no) + ": node id out of range");
		if (w < 0.0) throw ValidationError(path + ": line " + std::to_string(line_no) + ": negative weight");
		A.at(from, to) = w;
	}
	return make_graph(num_nodes, std::move(A));
}

void save_graph(const TrafficGraph& graph, const std::string& path) {
	std::ofstream out(path);
	if (!out) throw IoError("cannot write " + path);
	out << "from,to,weight\n";
	out.precision(17);
	for (std::int64_t i = 0; i < graph.num_nodes; ++i)
		for (std::int64_t j = 0; j < graph.num_nodes; ++j)
			if (graph.adjacency.at(i, j) != 0.0) out << i << "," << j << "," << graph.adjacency.at(i, j) << "\n";
}

Normalizer fit_normalizer(const TrafficSeries& train_slice) {
	double sum = 0.0;
	std::int64_t n = 0;
	for (std::int64_t i = 0; i < train_slice.values.size(); ++i)
		if (train_slice.mask[static_cast<std::size_t>(i)]) {
			sum += train_slice.values.at(i);
			++n;
		}
	if (n == 0) throw DegenerateDataError("normalizer: no valid entries in training slice");
	double mean = sum / static_cast<double>(n);
	double ss = 0.0;
	for (std::int64_t i = 0; i < train_slice.values.size(); ++i)
		if (train_slice.mask[static_cast<std::size_t>(i)]) {
			double d = train_slice.values.at(i) - mean;
			ss += d * d;
		}
	double std_ = std::sqrt(ss / static_cast<double>(n)); // population convention
	if (std_ <= 0.0) throw DegenerateDataError("normalizer: zero variance in training slice");
	return Normalizer{mean, std_};
}

std::vector<TrafficSeries> split_dataset(const TrafficSeries& series, double train, double val, double test) {
	if (train <= 0.0 || val <= 0.0 || test <= 0.0) throw ValidationError("split ratios must be positive");
	if (std::abs(train + val + test - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
	std::int64_t T = series.T(), V = series.V();
	std::int64_t n_train = static_cast<std::int64_t>(std::llround(train * static_cast<double>(T)));
	std::int64_t n_val = static_cast<std::int64_t>(std::llround(val * static_cast<double>(T)));
	std::int64_t n_test = T - n_train - n_val;
	if (n_train < 1 || n_val < 1 || n_test < 1) throw ValidationError("split produces an empty slice");
	auto slice = [&](std::int64_t begin, std::int64_t len) {
		TrafficSeries s;
		s.node_ids = series.node_ids;
		s.timestamps.assign(series.timestamps.begin() + begin, series.timestamps.begin() + begin + len);
		s.values = Tensor({len, V});
		std::copy(series.values.data.begin() + begin * V, series.values.data.begin() + (begin + len) * V,
		          s.values.data.begin());
		s.mask.assign(series.mask.begin() + begin * V, series.mask.begin() + (begin + len) * V);
		return s;
	};
	return {slice(0, n_train), slice(n_train, n_val), slice(n_train + n_val, n_test)};
}

std::vector<std::int64_t> window_origins(const TrafficSeries& slice, const DataLayout& layout) {
	layout.validate();
	if (slice.T() < layout.L + layout.F)
		throw DegenerateDataError("slice shorter than L+F (" + std::to_string(slice.T()) + " < " +
		                          std::to_string(layout.L + layout.F) + ")");
	std::vector<std::int64_t> origins;
	for (std::int64_t t = layout.L; t + layout.F <= slice.T(); t += layout.stride) origins.push_back(t);
	return origins;
}

WindowSample make_window(const TrafficSeries& slice, const DataLayout& layout, std::int64_t origin,
                         const Normalizer* norm) {
	std::int64_t V = slice.V();
	if (origin < layout.L || origin + layout.F > slice.T()) throw ValidationError("window origin out of range");
	WindowSample w;
	w.origin = origin;
	w.x_long = Tensor({layout.L, V});
	w.y = Tensor({layout.F, V});
	w.x_mask.resize(static_cast<std::size_t>(layout.L * V));
	w.y_mask.resize(static_cast<std::size_t>(layout.F * V));
	for (std::int64_t t = 0; t < layout.L; ++t)
		for (std::int64_t v = 0; v < V; ++v) {
			bool valid = slice.valid(origin - layout.L + t, v);
			double raw = slice.values.at(origin - layout.L + t, v);
			// missing inputs are fed as 0 after normalization
			w.x_long.at(t, v) = valid ? (norm ? norm->apply(raw) : raw) : 0.0;
			w.x_mask[static_cast<std::size_t>(t * V + v)] = valid ? 1 : 0;
		}
	for (std::int64_t t = 0; t < layout.F; ++t)
		for (std::int64_t v = 0; v < V; ++v) {
			bool valid = slice.valid(origin + t, v);
			double raw = slice.values.at(origin + t, v);
			w.y.at(t, v) = valid ? (norm ? norm->apply(raw) : raw) : 0.0;
			w.y_mask[static_cast<std::size_t>(t * V + v)] = valid ? 1 : 0;
		}
	w.x_short = Tensor({layout.S, V});
	std::copy(w.x_long.data.begin() + (layout.L - layout.S) * V, w.x_long.data.end(), w.x_short.data.begin());
	return w;
}

std::vector<WindowSample> make_windows(const TrafficSeries& slice, const DataLayout& layout, const Normalizer* norm) {
	std::vector<WindowSample> out;
	for (auto origin : window_origins(slice, layout)) out.push_back(make_window(slice, layout, origin, norm));
	return out;
}

Tensor split_subseries(const Tensor& x_long, std::int64_t S) {
	if (x_long.rank() != 2) throw LayoutError("split_subseries: expected [L, V]");
	std::int64_t L = x_long.dim(0), V = x_long.dim(1);
	if (L % S != 0) throw LayoutError("split_subseries: L not divisible by S");
	std::int64_t N = L / S;
	Tensor tokens({N, V, S});
	for (std::int64_t j = 0; j < N; ++j)
		for (std::int64_t v = 0; v < V; ++v)
			for (std::int64_t s = 0; s < S; ++s) tokens.at(j, v, s) = x_long.at(j * S + s, v);
	return tokens;
}

Tensor join_subseries(const Tensor& tokens) {
	if (tokens.rank() != 3) throw LayoutError("join_subseries: expected [N, V, S]");
	std::int64_t N = tokens.dim(0), V = tokens.dim(1), S = tokens.dim(2);
	Tensor x({N * S, V});
	for (std::int64_t j = 0; j < N; ++j)
		for (std::int64_t v = 0; v < V; ++v)
			for (std::int64_t s = 0; s < S; ++s) x.at(j * S + s, v) = tokens.at(j, v, s);
	return x;
}

MaskSets sample_mask(std::int64_t n_sub, double ratio, Rng& rng) {
	if (ratio <= 0.0 || ratio >= 1.0) throw ValidationError("mask ratio must lie in (0,1)");
	if (n_sub < 2) throw ValidationError("need at least 2 subseries to mask");
	std::int64_t n_masked = static_cast<std::int64_t>(std::llround(ratio * static_cast<double>(n_sub)));
	if (n_masked == 0 || n_masked == n_sub)
		throw DegenerateDataError("mask ratio leaves no masked or no unmasked subseries");
	std::vector<std::int64_t> idx(static_cast<std::size_t>(n_sub));
	std::iota(idx.begin(), idx.end(), 0);
	std::shuffle(idx.begin(), idx.end(), rng.engine());
	MaskSets m;
	m.masked.assign(idx.begin(), idx.begin() + n_masked);
	m.unmasked.assign(idx.begin() + n_masked, idx.end());
	std::sort(m.masked.begin(), m.masked.end());
	std::sort(m.unmasked.begin(), m.unmasked.end());
	return m;
}

PeriodicIndices periodic_indices(const DataLayout& layout) {
	layout.validate();
	std::int64_t l = layout.subseries_per_day();
	std::int64_t n = layout.n_sub();
	if (n < 7 * l) throw LayoutError("window shorter than one week: N_sub=" + std::to_string(n) +
	                                 " < 7*l=" + std::to_string(7 * l));
	return PeriodicIndices{n - 7 * l, n - l};
}

std::pair<TrafficSeries, TrafficGraph> synth_generate(const SynthSpec& spec) {
	if (spec.days <= 0 || spec.nodes <= 0) throw ValidationError("synthetic spec needs positive nodes and days");
	const std::int64_t steps_per_day = 288;
	std::int64_t T = spec.days * steps_per_day;
	std::int64_t V = spec.nodes;

	Rng node_rng(Rng::derive(spec.seed, "synth.nodes"));
	std::vector<double> phase(static_cast<std::size_t>(V)), slope(static_cast<std::size_t>(V)),
	    base(static_cast<std::size_t>(V));
	for (std::int64_t v = 0; v < V; ++v) {
		phase[static_cast<std::size_t>(v)] = node_rng.uniform(0.0, 2.0 * M_PI);
		slope[static_cast<std::size_t>(v)] = node_rng.uniform(-spec.trend_max, spec.trend_max);
		base[static_cast<std::size_t>(v)] = spec.base_level + node_rng.uniform(-0.1, 0.1) * spec.base_level;
	}

	TrafficSeries s;
	s.values = Tensor({T, V});
	s.timestamps.resize(static_cast<std::size_t>(T));
	std::iota(s.timestamps.begin(), s.timestamps.end(), 0);
	s.mask.assign(static_cast<std::size_t>(T * V), 1);
	for (std::int64_t v = 0; v < V; ++v) s.node_ids.push_back("n" + std::to_string(v));

	// Daily profile: a fixed mix of harmonics producing the asymmetric
	// two-peak shape of real traffic. Higher harmonics change quickly within a
	// one-hour horizon, so extrapolating the curve from a short window alone
	// is genuinely harder than reading it off the previous day/week.
	constexpr double kHarmAmp[] = {1.0, 0.55, 0.35, 0.22};
	constexpr double kHarmShift[] = {0.0, 1.3, 2.1, 0.7};
	constexpr double kProfileScale = 1.0 / 1.6;
	auto daily_profile = [&](double theta, double node_phase) {
		double p = 0.0;
		for (int k = 0; k < 4; ++k)
			p += kHarmAmp[k] * std::sin(static_cast<double>(k + 1) * (theta + node_phase) + kHarmShift[k]);
		return p * kProfileScale;
	};

	Rng noise_rng(Rng::derive(spec.seed, "synth.noise"));
	const double week = 7.0 * static_cast<double>(steps_per_day);
	for (std::int64_t t = 0; t < T; ++t) {
		double weekly = 1.0 + spec.weekly_amp * std::sin(2.0 * M_PI * static_cast<double>(t) / week);
		double theta = 2.0 * M_PI * static_cast<double>(t % steps_per_day) / static_cast<double>(steps_per_day);
		for (std::int64_t v = 0; v < V; ++v) {
			double daily = daily_profile(theta, phase[static_cast<std::size_t>(v)]);
			double val = base[static_cast<std::size_t>(v)] + spec.daily_amp * daily * weekly +
			             slope[static_cast<std::size_t>(v)] * static_cast<double>(t) / static_cast<double>(steps_per_day);
			if (spec.noise_sigma > 0.0) val += noise_rng.normal(0.0, spec.noise_sigma);
			// a valid sample must never be exactly 0 (zeros mean missing)
			if (val == 0.0) val = 1e-9;
			s.values.at(t, v) = val;
		}
	}

	// contiguous missing blocks, each on one node
	Rng block_rng(Rng::derive(spec.seed, "synth.blocks"));
	for (std::int64_t b = 0; b < spec.missing_blocks; ++b) {
		std::int64_t v = block_rng.uniform_int(0, V - 1);
		std::int64_t len = block_rng.uniform_int(6, 36);
		std::int64_t t0 = block_rng.uniform_int(0, std::max<std::int64_t>(0, T - len - 1));
		for (std::int64_t t = t0; t < std::min(T, t0 + len); ++t) {
			s.values.at(t, v) = 0.0;
			s.mask[static_cast<std::size_t>(t * V + v)] = 0;
		}
	}

	// random geometric graph on the unit square
	Rng geo_rng(Rng::derive(spec.seed, "synth.graph"));
	std::vector<double> px(static_cast<std::size_t>(V)), py(static_cast<std::size_t>(V));
	for (std::int64_t v = 0; v < V; ++v) {
		px[static_cast<std::size_t>(v)] = geo_rng.uniform(0.0, 1.0);
		py[static_cast<std::size_t>(v)] = geo_rng.uniform(0.0, 1.0);
	}
	double radius = std::sqrt(3.0 / static_cast<double>(V)); // ~average degree 9
	Tensor A({V, V});
	for (std::int64_t i = 0; i < V; ++i)
		for (std::int64_t j = 0; j < V; ++j) {
			if (i == j) continue;
			double dx = px[static_cast<std::size_t>(i)] - px[static_cast<std::size_t>(j)];
			double dy = py[static_cast<std::size_t>(i)] - py[static_cast<std::size_t>(j)];
			double dist = std::sqrt(dx * dx + dy * dy);
			if (dist < radius) A.at(i, j) = std::exp(-dist * dist / (radius * radius));
		}
	return {std::move(s), make_graph(V, std::move(A))};
}

namespace {

SynthSpec parse_synth_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
	SynthSpec spec;
	for (const auto& [key, value] : pairs) {
		try {
			if (key == "nodes") spec.nodes = std::stoll(value);
			else if (key == "days") spec.days = std::stoll(value);
			else if (key == "base_level") spec.base_level = std::stod(value);
			else if (key == "daily_amp") spec.daily_amp = std::stod(value);
			else if (key == "weekly_amp") spec.weekly_amp = std::stod(value);
			else if (key == "trend_max") spec.trend_max = std::stod(value);
			else if (key == "noise_sigma") spec.noise_sigma = std::stod(value);
			else if (key == "missing_blocks") spec.missing_blocks = std::stoll(value);
			else if (key == "seed") spec.seed = std::stoull(value);
			else throw ConfigError("unknown synthetic spec key '" + key + "'");
		} catch (const ConfigError&) {
			throw;
		} catch (const std::exception&) {
			throw ConfigError("bad value for synthetic spec key '" + key + "': " + value);
		}
	}
	return spec;
}

} // namespace

SynthSpec SynthSpec::parse_text(const std::string& text) {
	std::vector<std::pair<std::string, std::string>> pairs;
	std::istringstream in(text);
	std::string line;
	while (std::getline(in, line)) {
		std::string t = trim(line);
		if (t.empty() || t[0] == '#') continue;
		auto eq = t.find('=');
		if (eq == std::string::npos) throw ConfigError("synthetic spec line without '=': " + t);
		pairs.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
	}
	return parse_synth_pairs(pairs);
}

SynthSpec SynthSpec::parse_file(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open " + path);
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_text(ss.str());
}

} // namespace lsttn
