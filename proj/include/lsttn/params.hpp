#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsttn/autodiff.hpp"
#include "lsttn/errors.hpp"
#include "lsttn/rng.hpp"
#include "lsttn/tensor.hpp"

namespace lsttn {

/// Named learnable tensors. Names are namespaced ("mst.layer0.wq"); iteration
/// order is lexicographic, which keeps optimizer updates deterministic.
class ParamStore {
public:
	ad::Var add(const std::string& name, Tensor init) {
		if (params_.count(name)) throw ValidationError("duplicate parameter name: " + name);
		auto v = ad::param(std::move(init));
		params_[name] = v;
		return v;
	}

	ad::Var get(const std::string& name) const {
		auto it = params_.find(name);
		if (it == params_.end()) throw ValidationError("unknown parameter: " + name);
		return it->second;
	}

	bool has(const std::string& name) const { return params_.count(name) != 0; }

	const std::map<std::string, ad::Var>& all() const { return params_; }

	void merge(const ParamStore& other) {
		for (const auto& [k, v] : other.params_) {
			if (params_.count(k)) throw ValidationError("duplicate parameter name on merge: " + k);
			params_[k] = v;
		}
	}

	void zero_grads() {
		for (auto& [k, v] : params_) v->zero_grad();
	}

	std::int64_t total_size() const {
		std::int64_t n = 0;
		for (const auto& [k, v] : params_) n += v->value.size();
		return n;
	}

	/// FNV-1a over the raw parameter bytes; used to assert frozen parameters.
	std::uint64_t content_hash() const {
		std::uint64_t h = 14695981039346656037ull;
		for (const auto& [k, v] : params_) {
			for (unsigned char c : k) {
				h ^= c;
				h *= 1099511628211ull;
			}
			const auto* bytes = reinterpret_cast<const unsigned char*>(v->value.data.data());
			for (std::size_t i = 0; i < v->value.data.size() * sizeof(double); ++i) {
				h ^= bytes[i];
				h *= 1099511628211ull;
			}
		}
		return h;
	}

private:
	std::map<std::string, ad::Var> params_;
};

/// Xavier-uniform init; the stream depends only on (seed, name) so parameter
/// values are independent of construction order.
inline Tensor xavier_init(const std::vector<std::int64_t>& shape, std::uint64_t seed, const std::string& name) {
	Tensor t(shape);
	std::int64_t fan_in = shape.size() >= 2 ? shape[shape.size() - 2] : shape.back();
	std::int64_t fan_out = shape.back();
	double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
	Rng rng(Rng::derive(seed, "init:" + name));
	for (auto& v : t.data) v = rng.uniform(-bound, bound);
	return t;
}

inline Tensor normal_init(const std::vector<std::int64_t>& shape, std::uint64_t seed, const std::string& name,
                          double stddev) {
	Tensor t(shape);
	Rng rng(Rng::derive(seed, "init:" + name));
	for (auto& v : t.data) v = rng.normal(0.0, stddev);
	return t;
}

} // namespace lsttn
