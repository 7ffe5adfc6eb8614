#include "lsttn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <json.hpp>

#include "lsttn/errors.hpp"

namespace lsttn {

using nlohmann::json;

namespace {

json tensor_to_json(const Tensor& t) {
	json j;
	j["shape"] = t.shape;
	// binary subtype keeps doubles bit-exact through CBOR
	std::vector<std::uint8_t> bytes(t.data.size() * sizeof(double));
	std::memcpy(bytes.data(), t.data.data(), bytes.size());
	j["data"] = json::binary(std::move(bytes));
	return j;
}

Tensor tensor_from_json(const json& j) {
	std::vector<std::int64_t> shape = j.at("shape").get<std::vector<std::int64_t>>();
	const auto& bin = j.at("data").get_binary();
	if (bin.size() != static_cast<std::size_t>(Tensor::numel(shape)) * sizeof(double))
		throw ParseError("checkpoint: tensor payload size mismatch");
	std::vector<double> data(bin.size() / sizeof(double));
	std::memcpy(data.data(), bin.data(), bin.size());
	return Tensor(std::move(shape), std::move(data));
}

json tensor_map_to_json(const std::map<std::string, Tensor>& m) {
	json j = json::object();
	for (const auto& [k, t] : m) j[k] = tensor_to_json(t);
	return j;
}

std::map<std::string, Tensor> tensor_map_from_json(const json& j) {
	std::map<std::string, Tensor> m;
	for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = tensor_from_json(it.value());
	return m;
}

} // namespace

void Checkpoint::save(const std::string& path) const {
	json j;
	j["version"] = version;
	j["stage"] = stage;
	j["config_text"] = config_text;
	j["norm_mean"] = norm_mean;
	j["norm_std"] = norm_std;
	j["L"] = L;
	j["S"] = S;
	j["F"] = F;
	j["steps_per_day"] = steps_per_day;
	j["d_repr"] = d_repr;
	j["n_layers"] = n_layers;
	j["n_heads"] = n_heads;
	j["stgnn"] = stgnn;
	j["variant"] = variant;
	j["tensors"] = tensor_map_to_json(tensors);
	j["opt_m"] = tensor_map_to_json(opt_m);
	j["opt_v"] = tensor_map_to_json(opt_v);
	j["opt_t"] = opt_t;
	j["epoch"] = epoch;
	j["best_val"] = best_val;
	auto bytes = json::to_cbor(j);
	std::ofstream out(path, std::ios::binary);
	if (!out) throw IoError("cannot write checkpoint " + path);
	out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
	if (!out) throw IoError("short write on checkpoint " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw IoError("cannot open checkpoint " + path);
	std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	json j;
	try {
		j = json::from_cbor(bytes);
	} catch (const std::exception& e) {
		throw ParseError("checkpoint " + path + ": " + e.what());
	}
	Checkpoint c;
	try {
		c.version = j.at("version").get<int>();
		if (c.version != kVersion)
			throw ParseError("checkpoint " + path + ": unsupported version " + std::to_string(c.version));
		c.stage = j.at("stage").get<std::string>();
		c.config_text = j.at("config_text").get<std::string>();
		c.norm_mean = j.at("norm_mean").get<double>();
		c.norm_std = j.at("norm_std").get<double>();
		c.L = j.at("L").get<std::int64_t>();
		c.S = j.at("S").get<std::int64_t>();
		c.F = j.at("F").get<std::int64_t>();
		c.steps_per_day = j.at("steps_per_day").get<std::int64_t>();
		c.d_repr = j.at("d_repr").get<std::int64_t>();
		c.n_layers = j.at("n_layers").get<std::int64_t>();
		c.n_heads = j.at("n_heads").get<std::int64_t>();
		c.stgnn = j.at("stgnn").get<std::string>();
		c.variant = j.at("variant").get<std::string>();
		c.tensors = tensor_map_from_json(j.at("tensors"));
		c.opt_m = tensor_map_from_json(j.at("opt_m"));
		c.opt_v = tensor_map_from_json(j.at("opt_v"));
		c.opt_t = j.at("opt_t").get<std::int64_t>();
		c.epoch = j.at("epoch").get<std::int64_t>();
		c.best_val = j.at("best_val").get<double>();
	} catch (const ParseError&) {
		throw;
	} catch (const std::exception& e) {
		throw ParseError("checkpoint " + path + ": missing or malformed field: " + e.what());
	}
	return c;
}

void Checkpoint::store_params(const ParamStore& store) {
	for (const auto& [name, var] : store.all()) tensors[name] = var->value;
}

void Checkpoint::restore_params(ParamStore& store, const std::string& prefix) const {
	for (const auto& [name, var] : store.all()) {
		if (!prefix.empty() && name.rfind(prefix, 0) != 0) continue;
		auto it = tensors.find(name);
		if (it == tensors.end()) throw ParseError("checkpoint is missing tensor '" + name + "'");
		if (it->second.shape != var->value.shape)
			throw LayoutError("checkpoint tensor '" + name + "' has shape " + it->second.shape_str() +
			                  ", model expects " + var->value.shape_str());
		var->value = it->second;
	}
}

} // namespace lsttn
