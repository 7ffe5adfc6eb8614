#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsttn {

/// Dense row-major tensor of doubles. Shapes are small (rank <= 3 in practice).
struct Tensor {
	std::vector<std::int64_t> shape;
	std::vector<double> data;

	Tensor() = default;
	explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)), data(numel(shape), 0.0) {}
	Tensor(std::vector<std::int64_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
		if (static_cast<std::int64_t>(data.size()) != numel(shape))
			throw std::invalid_argument("Tensor: data size does not match shape");
	}

	static std::int64_t numel(const std::vector<std::int64_t>& s) {
		std::int64_t n = 1;
		for (auto d : s) {
			if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
			n *= d;
		}
		return n;
	}

	static Tensor zeros(std::vector<std::int64_t> s) { return Tensor(std::move(s)); }
	static Tensor full(std::vector<std::int64_t> s, double v) {
		Tensor t(std::move(s));
		std::fill(t.data.begin(), t.data.end(), v);
		return t;
	}
	static Tensor scalar(double v) { return Tensor({1}, {v}); }

	std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
	std::int64_t rank() const { return static_cast<std::int64_t>(shape.size()); }
	std::int64_t dim(std::int64_t i) const { return shape.at(static_cast<std::size_t>(i)); }

	double& at(std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
	double at(std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

	// 2D access (row-major)
	double& at(std::int64_t i, std::int64_t j) { return data[static_cast<std::size_t>(i * shape[1] + j)]; }
	double at(std::int64_t i, std::int64_t j) const { return data[static_cast<std::size_t>(i * shape[1] + j)]; }

	// 3D access
	double& at(std::int64_t i, std::int64_t j, std::int64_t k) {
		return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
	}
	double at(std::int64_t i, std::int64_t j, std::int64_t k) const {
		return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
	}

	bool same_shape(const Tensor& o) const { return shape == o.shape; }

	Tensor reshaped(std::vector<std::int64_t> s) const {
		if (numel(s) != size()) throw std::invalid_argument("Tensor::reshaped: element count mismatch");
		return Tensor(std::move(s), data);
	}

	std::string shape_str() const {
		std::string out = "[";
		for (std::size_t i = 0; i < shape.size(); ++i) {
			if (i) out += ",";
			out += std::to_string(shape[i]);
		}
		return out + "]";
	}
};

inline bool shape_eq(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

} // namespace lsttn
