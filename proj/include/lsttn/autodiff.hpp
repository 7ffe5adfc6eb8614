#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "lsttn/errors.hpp"
#include "lsttn/tensor.hpp"

namespace lsttn::ad {

// Reverse-mode autodiff over dense tensors. A forward pass builds a dynamic
// graph of shared_ptr nodes; backward() runs the tape in reverse topological
// order. Parameters are long-lived leaf nodes whose grads are read by the
// optimizer after each backward pass.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
	Tensor value;
	Tensor grad; // allocated lazily, same shape as value
	bool requires_grad = false;
	std::vector<Var> parents;
	std::function<void(Node&)> backward_fn; // accumulates into parents' grads

	Tensor& grad_ref() {
		if (grad.shape != value.shape) grad = Tensor::zeros(value.shape);
		return grad;
	}
	void zero_grad() {
		if (grad.shape == value.shape) std::fill(grad.data.begin(), grad.data.end(), 0.0);
	}
};

inline Var constant(Tensor t) {
	auto n = std::make_shared<Node>();
	n->value = std::move(t);
	n->requires_grad = false;
	return n;
}

inline Var param(Tensor t) {
	auto n = std::make_shared<Node>();
	n->value = std::move(t);
	n->requires_grad = true;
	return n;
}

inline Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> bw) {
	auto n = std::make_shared<Node>();
	n->value = std::move(value);
	n->parents = std::move(parents);
	for (const auto& p : n->parents)
		if (p->requires_grad) n->requires_grad = true;
	if (n->requires_grad) n->backward_fn = std::move(bw);
	return n;
}

/// Runs the tape backward from a scalar root.
inline void backward(const Var& root) {
	if (root->value.size() != 1) throw ValidationError("backward: root must be scalar");
	// Post-order DFS over parent edges; each node enters the stack once.
	std::vector<Node*> order;
	std::unordered_set<Node*> pushed;
	std::vector<std::pair<Node*, std::size_t>> stack;
	if (root->requires_grad) {
		stack.emplace_back(root.get(), 0);
		pushed.insert(root.get());
	}
	while (!stack.empty()) {
		auto& [node, idx] = stack.back();
		if (idx < node->parents.size()) {
			Node* p = node->parents[idx++].get();
			if (p->requires_grad && pushed.insert(p).second) stack.emplace_back(p, 0);
		} else {
			order.push_back(node);
			stack.pop_back();
		}
	}
	root->grad_ref().data[0] = 1.0;
	for (auto it = order.rbegin(); it != order.rend(); ++it) {
		Node* n = *it;
		if (n->backward_fn) n->backward_fn(*n);
	}
}

// ---------------------------------------------------------------------------
// Eigen helpers
// ---------------------------------------------------------------------------

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;

inline MatMap as_mat(Tensor& t, std::int64_t rows, std::int64_t cols) {
	return MatMap(t.data.data(), rows, cols);
}
inline CMatMap as_mat(const Tensor& t, std::int64_t rows, std::int64_t cols) {
	return CMatMap(t.data.data(), rows, cols);
}

inline std::int64_t last_dim(const Tensor& t) {
	if (t.rank() == 0) throw ValidationError("expected tensor with rank >= 1");
	return t.shape.back();
}
inline std::int64_t leading(const Tensor& t) { return t.size() / std::max<std::int64_t>(1, last_dim(t)); }

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

inline Var add(const Var& a, const Var& b) {
	if (!shape_eq(a->value, b->value)) throw LayoutError("add: shape mismatch " + a->value.shape_str() + " vs " + b->value.shape_str());
	Tensor out = a->value;
	for (std::int64_t i = 0; i < out.size(); ++i) out.at(i) += b->value.at(i);
	return make_node(std::move(out), {a, b}, [](Node& n) {
		auto& a = *n.parents[0];
		auto& b = *n.parents[1];
		if (a.requires_grad) {
			auto& ga = a.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) ga.at(i) += n.grad.at(i);
		}
		if (b.requires_grad) {
			auto& gb = b.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) gb.at(i) += n.grad.at(i);
		}
	});
}

inline Var sub(const Var& a, const Var& b) {
	if (!shape_eq(a->value, b->value)) throw LayoutError("sub: shape mismatch");
	Tensor out = a->value;
	for (std::int64_t i = 0; i < out.size(); ++i) out.at(i) -= b->value.at(i);
	return make_node(std::move(out), {a, b}, [](Node& n) {
		auto& a = *n.parents[0];
		auto& b = *n.parents[1];
		if (a.requires_grad) {
			auto& ga = a.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) ga.at(i) += n.grad.at(i);
		}
		if (b.requires_grad) {
			auto& gb = b.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) gb.at(i) -= n.grad.at(i);
		}
	});
}

inline Var mul(const Var& a, const Var& b) {
	if (!shape_eq(a->value, b->value)) throw LayoutError("mul: shape mismatch");
	Tensor out = a->value;
	for (std::int64_t i = 0; i < out.size(); ++i) out.at(i) *= b->value.at(i);
	return make_node(std::move(out), {a, b}, [](Node& n) {
		auto& a = *n.parents[0];
		auto& b = *n.parents[1];
		if (a.requires_grad) {
			auto& ga = a.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) ga.at(i) += n.grad.at(i) * b.value.at(i);
		}
		if (b.requires_grad) {
			auto& gb = b.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) gb.at(i) += n.grad.at(i) * a.value.at(i);
		}
	});
}

inline Var scale(const Var& a, double s) {
	Tensor out = a->value;
	for (auto& v : out.data) v *= s;
	return make_node(std::move(out), {a}, [s](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t i = 0; i < n.grad.size(); ++i) g.at(i) += s * n.grad.at(i);
	});
}

inline Var relu(const Var& a) {
	Tensor out = a->value;
	for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
	return make_node(std::move(out), {a}, [](Node& n) {
		auto& a = *n.parents[0];
		auto& g = a.grad_ref();
		for (std::int64_t i = 0; i < n.grad.size(); ++i)
			if (a.value.at(i) > 0.0) g.at(i) += n.grad.at(i);
	});
}

inline Var gelu(const Var& a) {
	static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
	static const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
	Tensor out = a->value;
	for (auto& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
	return make_node(std::move(out), {a}, [](Node& n) {
		auto& a = *n.parents[0];
		auto& g = a.grad_ref();
		for (std::int64_t i = 0; i < n.grad.size(); ++i) {
			double x = a.value.at(i);
			double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
			double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
			g.at(i) += n.grad.at(i) * (cdf + x * pdf);
		}
	});
}

inline Var tanh_(const Var& a) {
	Tensor out = a->value;
	for (auto& v : out.data) v = std::tanh(v);
	return make_node(std::move(out), {a}, [](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t i = 0; i < n.grad.size(); ++i) {
			double y = n.value.at(i);
			g.at(i) += n.grad.at(i) * (1.0 - y * y);
		}
	});
}

inline Var sigmoid_(const Var& a) {
	Tensor out = a->value;
	for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
	return make_node(std::move(out), {a}, [](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t i = 0; i < n.grad.size(); ++i) {
			double y = n.value.at(i);
			g.at(i) += n.grad.at(i) * y * (1.0 - y);
		}
	});
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

inline Var reshape(const Var& a, std::vector<std::int64_t> shape) {
	Tensor out = a->value.reshaped(std::move(shape));
	return make_node(std::move(out), {a}, [](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t i = 0; i < n.grad.size(); ++i) g.at(i) += n.grad.at(i);
	});
}

inline Var transpose2d(const Var& a) {
	if (a->value.rank() != 2) throw LayoutError("transpose2d: rank != 2");
	std::int64_t r = a->value.dim(0), c = a->value.dim(1);
	Tensor out({c, r});
	for (std::int64_t i = 0; i < r; ++i)
		for (std::int64_t j = 0; j < c; ++j) out.at(j, i) = a->value.at(i, j);
	return make_node(std::move(out), {a}, [r, c](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t i = 0; i < r; ++i)
			for (std::int64_t j = 0; j < c; ++j) g.at(i * c + j) += n.grad.at(j * r + i);
	});
}

/// [B,n,m] -> [B,m,n]
inline Var transpose_last2(const Var& a) {
	if (a->value.rank() != 3) throw LayoutError("transpose_last2: rank != 3");
	std::int64_t B = a->value.dim(0), n_ = a->value.dim(1), m = a->value.dim(2);
	Tensor out({B, m, n_});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t i = 0; i < n_; ++i)
			for (std::int64_t j = 0; j < m; ++j) out.at(b, j, i) = a->value.at(b, i, j);
	return make_node(std::move(out), {a}, [B, n_, m](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t i = 0; i < n_; ++i)
				for (std::int64_t j = 0; j < m; ++j)
					g.at((b * n_ + i) * m + j) += n.grad.at((b * m + j) * n_ + i);
	});
}

/// [B,N,H*dh] -> [B*H,N,dh]
inline Var split_heads(const Var& a, std::int64_t H) {
	std::int64_t B = a->value.dim(0), N = a->value.dim(1), D = a->value.dim(2);
	if (D % H != 0) throw LayoutError("split_heads: head count does not divide feature dim");
	std::int64_t dh = D / H;
	Tensor out({B * H, N, dh});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t h = 0; h < H; ++h)
			for (std::int64_t i = 0; i < N; ++i)
				for (std::int64_t k = 0; k < dh; ++k)
					out.at(b * H + h, i, k) = a->value.at(b, i, h * dh + k);
	return make_node(std::move(out), {a}, [B, H, N, dh](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t h = 0; h < H; ++h)
				for (std::int64_t i = 0; i < N; ++i)
					for (std::int64_t k = 0; k < dh; ++k)
						g.at((b * N + i) * (H * dh) + h * dh + k) += n.grad.at(((b * H + h) * N + i) * dh + k);
	});
}

/// [B*H,N,dh] -> [B,N,H*dh]
inline Var merge_heads(const Var& a, std::int64_t H) {
	std::int64_t BH = a->value.dim(0), N = a->value.dim(1), dh = a->value.dim(2);
	if (BH % H != 0) throw LayoutError("merge_heads: batch not divisible by heads");
	std::int64_t B = BH / H;
	Tensor out({B, N, H * dh});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t h = 0; h < H; ++h)
			for (std::int64_t i = 0; i < N; ++i)
				for (std::int64_t k = 0; k < dh; ++k)
					out.at(b, i, h * dh + k) = a->value.at(b * H + h, i, k);
	return make_node(std::move(out), {a}, [B, H, N, dh](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t h = 0; h < H; ++h)
				for (std::int64_t i = 0; i < N; ++i)
					for (std::int64_t k = 0; k < dh; ++k)
						g.at(((b * H + h) * N + i) * dh + k) += n.grad.at((b * N + i) * (H * dh) + h * dh + k);
	});
}

/// Select rows along axis 1 of [B,N,D] by index list -> [B,K,D].
inline Var gather_axis1(const Var& a, std::vector<std::int64_t> idx) {
	std::int64_t B = a->value.dim(0), N = a->value.dim(1), D = a->value.dim(2);
	std::int64_t K = static_cast<std::int64_t>(idx.size());
	for (auto i : idx)
		if (i < 0 || i >= N) throw ValidationError("gather_axis1: index out of range");
	Tensor out({B, K, D});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t i = 0; i < K; ++i)
			for (std::int64_t d = 0; d < D; ++d) out.at(b, i, d) = a->value.at(b, idx[i], d);
	return make_node(std::move(out), {a}, [B, N, D, K, idx = std::move(idx)](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t i = 0; i < K; ++i)
				for (std::int64_t d = 0; d < D; ++d)
					g.at((b * N + idx[i]) * D + d) += n.grad.at((b * K + i) * D + d);
	});
}

/// Place rows of [B,K,D] at positions idx along a new axis-1 of size N (zeros elsewhere).
inline Var scatter_axis1(const Var& a, const std::vector<std::int64_t>& idx, std::int64_t N) {
	std::int64_t B = a->value.dim(0), K = a->value.dim(1), D = a->value.dim(2);
	if (static_cast<std::int64_t>(idx.size()) != K) throw ValidationError("scatter_axis1: index count mismatch");
	std::unordered_set<std::int64_t> seen;
	for (auto i : idx) {
		if (i < 0 || i >= N) throw ValidationError("scatter_axis1: index out of range");
		if (!seen.insert(i).second) throw ValidationError("scatter_axis1: duplicate index");
	}
	Tensor out({B, N, D});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t i = 0; i < K; ++i)
			for (std::int64_t d = 0; d < D; ++d) out.at(b, idx[i], d) = a->value.at(b, i, d);
	auto idx_copy = idx;
	return make_node(std::move(out), {a}, [B, N, D, K, idx = std::move(idx_copy)](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t i = 0; i < K; ++i)
				for (std::int64_t d = 0; d < D; ++d)
					g.at((b * K + i) * D + d) += n.grad.at((b * N + idx[i]) * D + d);
	});
}

/// Gather rows of a 2D tensor [N,D] -> [K,D].
inline Var gather_rows(const Var& a, const std::vector<std::int64_t>& idx) {
	std::int64_t N = a->value.dim(0), D = a->value.dim(1);
	auto r = reshape(a, {1, N, D});
	auto g = gather_axis1(r, idx);
	return reshape(g, {static_cast<std::int64_t>(idx.size()), D});
}

/// Concatenate along the last axis; all inputs share leading dims.
inline Var concat_lastdim(const std::vector<Var>& xs) {
	if (xs.empty()) throw ValidationError("concat_lastdim: empty input");
	std::int64_t R = leading(xs[0]->value);
	std::int64_t Dtot = 0;
	std::vector<std::int64_t> dims;
	for (const auto& x : xs) {
		if (leading(x->value) != R) throw LayoutError("concat_lastdim: leading dims mismatch");
		dims.push_back(last_dim(x->value));
		Dtot += dims.back();
	}
	std::vector<std::int64_t> shape = xs[0]->value.shape;
	shape.back() = Dtot;
	Tensor out(shape);
	std::int64_t off = 0;
	for (std::size_t k = 0; k < xs.size(); ++k) {
		std::int64_t D = dims[k];
		for (std::int64_t r = 0; r < R; ++r)
			for (std::int64_t d = 0; d < D; ++d) out.data[r * Dtot + off + d] = xs[k]->value.data[r * D + d];
		off += D;
	}
	return make_node(std::move(out), xs, [R, Dtot, dims](Node& n) {
		std::int64_t off = 0;
		for (std::size_t k = 0; k < n.parents.size(); ++k) {
			std::int64_t D = dims[k];
			auto& p = *n.parents[k];
			if (p.requires_grad) {
				auto& g = p.grad_ref();
				for (std::int64_t r = 0; r < R; ++r)
					for (std::int64_t d = 0; d < D; ++d) g.data[r * D + d] += n.grad.data[r * Dtot + off + d];
			}
			off += D;
		}
	});
}

/// Slice along axis 1 of [B,N,D]: rows [start, start+len).
inline Var slice_axis1(const Var& a, std::int64_t start, std::int64_t len) {
	std::vector<std::int64_t> idx(static_cast<std::size_t>(len));
	std::iota(idx.begin(), idx.end(), start);
	return gather_axis1(a, std::move(idx));
}

/// Zero-pad p rows at the front of axis 1 of [B,N,D].
inline Var pad_axis1_front(const Var& a, std::int64_t p) {
	std::int64_t B = a->value.dim(0), N = a->value.dim(1), D = a->value.dim(2);
	Tensor out({B, N + p, D});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t i = 0; i < N; ++i)
			for (std::int64_t d = 0; d < D; ++d) out.at(b, i + p, d) = a->value.at(b, i, d);
	return make_node(std::move(out), {a}, [B, N, D, p](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t i = 0; i < N; ++i)
				for (std::int64_t d = 0; d < D; ++d)
					g.at((b * N + i) * D + d) += n.grad.at((b * (N + p) + i + p) * D + d);
	});
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

inline Var matmul(const Var& a, const Var& b) {
	if (a->value.rank() != 2 || b->value.rank() != 2) throw LayoutError("matmul: expects 2D operands");
	std::int64_t n_ = a->value.dim(0), m = a->value.dim(1), p = b->value.dim(1);
	if (b->value.dim(0) != m) throw LayoutError("matmul: inner dims mismatch");
	Tensor out({n_, p});
	as_mat(out, n_, p) = as_mat(a->value, n_, m) * as_mat(b->value, m, p);
	return make_node(std::move(out), {a, b}, [n_, m, p](Node& n) {
		auto& a = *n.parents[0];
		auto& b = *n.parents[1];
		auto gy = as_mat(n.grad, n_, p);
		if (a.requires_grad) as_mat(a.grad_ref(), n_, m) += gy * as_mat(b.value, m, p).transpose();
		if (b.requires_grad) as_mat(b.grad_ref(), m, p) += as_mat(a.value, n_, m).transpose() * gy;
	});
}

/// Batched matmul [B,n,m] x [B,m,p] -> [B,n,p].
inline Var bmm(const Var& a, const Var& b) {
	if (a->value.rank() != 3 || b->value.rank() != 3) throw LayoutError("bmm: expects 3D operands");
	std::int64_t B = a->value.dim(0), n_ = a->value.dim(1), m = a->value.dim(2), p = b->value.dim(2);
	if (b->value.dim(0) != B || b->value.dim(1) != m) throw LayoutError("bmm: dims mismatch");
	Tensor out({B, n_, p});
	for (std::int64_t i = 0; i < B; ++i) {
		CMatMap A(a->value.data.data() + i * n_ * m, n_, m);
		CMatMap Bm(b->value.data.data() + i * m * p, m, p);
		MatMap C(out.data.data() + i * n_ * p, n_, p);
		C = A * Bm;
	}
	return make_node(std::move(out), {a, b}, [B, n_, m, p](Node& n) {
		auto& a = *n.parents[0];
		auto& b = *n.parents[1];
		for (std::int64_t i = 0; i < B; ++i) {
			CMatMap Gy(n.grad.data.data() + i * n_ * p, n_, p);
			if (a.requires_grad) {
				MatMap Ga(a.grad_ref().data.data() + i * n_ * m, n_, m);
				CMatMap Bm(b.value.data.data() + i * m * p, m, p);
				Ga += Gy * Bm.transpose();
			}
			if (b.requires_grad) {
				MatMap Gb(b.grad_ref().data.data() + i * m * p, m, p);
				CMatMap A(a.value.data.data() + i * n_ * m, n_, m);
				Gb += A.transpose() * Gy;
			}
		}
	});
}

/// x [..., m] times shared weight W [m,p], plus optional bias [p].
inline Var linear(const Var& x, const Var& W, const Var& b = nullptr) {
	std::int64_t m = W->value.dim(0), p = W->value.dim(1);
	if (last_dim(x->value) != m) throw LayoutError("linear: feature dim mismatch");
	std::int64_t R = leading(x->value);
	std::vector<std::int64_t> shape = x->value.shape;
	shape.back() = p;
	Tensor out(shape);
	as_mat(out, R, p) = as_mat(x->value, R, m) * as_mat(W->value, m, p);
	if (b) {
		if (b->value.size() != p) throw LayoutError("linear: bias dim mismatch");
		auto O = as_mat(out, R, p);
		Eigen::Map<const Eigen::RowVectorXd> bv(b->value.data.data(), p);
		O.rowwise() += bv;
	}
	std::vector<Var> parents = {x, W};
	if (b) parents.push_back(b);
	return make_node(std::move(out), std::move(parents), [R, m, p](Node& n) {
		auto& x = *n.parents[0];
		auto& W = *n.parents[1];
		auto gy = as_mat(n.grad, R, p);
		if (x.requires_grad) as_mat(x.grad_ref(), R, m) += gy * as_mat(W.value, m, p).transpose();
		if (W.requires_grad) as_mat(W.grad_ref(), m, p) += as_mat(x.value, R, m).transpose() * gy;
		if (n.parents.size() > 2 && n.parents[2]->requires_grad) {
			auto& gb = n.parents[2]->grad_ref();
			Eigen::Map<Eigen::RowVectorXd>(gb.data.data(), p) += gy.colwise().sum();
		}
	});
}

/// Broadcast-add a [N,D] table over axis 0 of [B,N,D].
inline Var add_broadcast0(const Var& x, const Var& t) {
	std::int64_t B = x->value.dim(0), N = x->value.dim(1), D = x->value.dim(2);
	if (t->value.dim(0) != N || t->value.dim(1) != D) throw LayoutError("add_broadcast0: table shape mismatch");
	Tensor out = x->value;
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t i = 0; i < N * D; ++i) out.data[b * N * D + i] += t->value.data[i];
	return make_node(std::move(out), {x, t}, [B, N, D](Node& n) {
		auto& x = *n.parents[0];
		auto& t = *n.parents[1];
		if (x.requires_grad) {
			auto& g = x.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) g.at(i) += n.grad.at(i);
		}
		if (t.requires_grad) {
			auto& g = t.grad_ref();
			for (std::int64_t b = 0; b < B; ++b)
				for (std::int64_t i = 0; i < N * D; ++i) g.data[i] += n.grad.data[b * N * D + i];
		}
	});
}

/// Broadcast-add a [D] vector over every row of [..., D].
inline Var add_vec(const Var& x, const Var& v) {
	std::int64_t D = last_dim(x->value);
	if (v->value.size() != D) throw LayoutError("add_vec: vector dim mismatch");
	std::int64_t R = leading(x->value);
	Tensor out = x->value;
	for (std::int64_t r = 0; r < R; ++r)
		for (std::int64_t d = 0; d < D; ++d) out.data[r * D + d] += v->value.data[d];
	return make_node(std::move(out), {x, v}, [R, D](Node& n) {
		auto& x = *n.parents[0];
		auto& v = *n.parents[1];
		if (x.requires_grad) {
			auto& g = x.grad_ref();
			for (std::int64_t i = 0; i < n.grad.size(); ++i) g.at(i) += n.grad.at(i);
		}
		if (v.requires_grad) {
			auto& g = v.grad_ref();
			for (std::int64_t r = 0; r < R; ++r)
				for (std::int64_t d = 0; d < D; ++d) g.data[d] += n.grad.data[r * D + d];
		}
	});
}

/// Repeat a [N,D] tensor B times along a new leading axis -> [B,N,D].
inline Var tile0(const Var& t, std::int64_t B) {
	std::int64_t N = t->value.dim(0), D = t->value.dim(1);
	Tensor out({B, N, D});
	for (std::int64_t b = 0; b < B; ++b)
		std::copy(t->value.data.begin(), t->value.data.end(), out.data.begin() + b * N * D);
	return make_node(std::move(out), {t}, [B, N, D](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t i = 0; i < N * D; ++i) g.data[i] += n.grad.data[b * N * D + i];
	});
}

// ---------------------------------------------------------------------------
// Normalization / attention pieces
// ---------------------------------------------------------------------------

inline Var softmax_lastdim(const Var& a) {
	std::int64_t D = last_dim(a->value), R = leading(a->value);
	Tensor out = a->value;
	for (std::int64_t r = 0; r < R; ++r) {
		double* row = out.data.data() + r * D;
		double mx = *std::max_element(row, row + D);
		double sum = 0.0;
		for (std::int64_t d = 0; d < D; ++d) {
			row[d] = std::exp(row[d] - mx);
			sum += row[d];
		}
		for (std::int64_t d = 0; d < D; ++d) row[d] /= sum;
	}
	return make_node(std::move(out), {a}, [R, D](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t r = 0; r < R; ++r) {
			const double* y = n.value.data.data() + r * D;
			const double* gy = n.grad.data.data() + r * D;
			double dot = 0.0;
			for (std::int64_t d = 0; d < D; ++d) dot += y[d] * gy[d];
			double* gx = g.data.data() + r * D;
			for (std::int64_t d = 0; d < D; ++d) gx[d] += y[d] * (gy[d] - dot);
		}
	});
}

inline Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5) {
	std::int64_t D = last_dim(x->value), R = leading(x->value);
	if (gamma->value.size() != D || beta->value.size() != D) throw LayoutError("layer_norm: affine dim mismatch");
	Tensor out = x->value;
	Tensor xhat = x->value; // stored for backward via closure copy
	Tensor inv_std({R});
	for (std::int64_t r = 0; r < R; ++r) {
		double* row = out.data.data() + r * D;
		double mu = 0.0;
		for (std::int64_t d = 0; d < D; ++d) mu += row[d];
		mu /= static_cast<double>(D);
		double var = 0.0;
		for (std::int64_t d = 0; d < D; ++d) var += (row[d] - mu) * (row[d] - mu);
		var /= static_cast<double>(D);
		double is = 1.0 / std::sqrt(var + eps);
		inv_std.at(r) = is;
		for (std::int64_t d = 0; d < D; ++d) {
			double xh = (row[d] - mu) * is;
			xhat.data[r * D + d] = xh;
			row[d] = gamma->value.data[d] * xh + beta->value.data[d];
		}
	}
	return make_node(std::move(out), {x, gamma, beta},
	                 [R, D, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
		auto& x = *n.parents[0];
		auto& gamma = *n.parents[1];
		auto& beta = *n.parents[2];
		for (std::int64_t r = 0; r < R; ++r) {
			const double* gy = n.grad.data.data() + r * D;
			const double* xh = xhat.data.data() + r * D;
			if (gamma.requires_grad) {
				auto& gg = gamma.grad_ref();
				for (std::int64_t d = 0; d < D; ++d) gg.data[d] += gy[d] * xh[d];
			}
			if (beta.requires_grad) {
				auto& gb = beta.grad_ref();
				for (std::int64_t d = 0; d < D; ++d) gb.data[d] += gy[d];
			}
			if (x.requires_grad) {
				double m1 = 0.0, m2 = 0.0;
				for (std::int64_t d = 0; d < D; ++d) {
					double dxh = gy[d] * gamma.value.data[d];
					m1 += dxh;
					m2 += dxh * xh[d];
				}
				m1 /= static_cast<double>(D);
				m2 /= static_cast<double>(D);
				auto& gx = x.grad_ref();
				double is = inv_std.at(r);
				for (std::int64_t d = 0; d < D; ++d) {
					double dxh = gy[d] * gamma.value.data[d];
					gx.data[r * D + d] += is * (dxh - m1 - xh[d] * m2);
				}
			}
		}
	});
}

// ---------------------------------------------------------------------------
// Convolution / pooling
// ---------------------------------------------------------------------------

/// Dilated 1D convolution along axis 1 (valid, no padding).
/// x [B,len,cin], w [k,cin,cout]; out[b,t,co] = sum_j sum_ci w[j,ci,co] * x[b, t + d*(k-1-j), ci].
/// Kernel tap j multiplies the sample d*j steps back from the window end,
/// matching the backward-looking dilated convolution sum.
inline Var dilated_conv1d(const Var& x, const Var& w, std::int64_t d) {
	if (x->value.rank() != 3 || w->value.rank() != 3) throw LayoutError("dilated_conv1d: rank mismatch");
	std::int64_t B = x->value.dim(0), len = x->value.dim(1), cin = x->value.dim(2);
	std::int64_t k = w->value.dim(0), cout = w->value.dim(2);
	if (w->value.dim(1) != cin) throw LayoutError("dilated_conv1d: channel mismatch");
	std::int64_t span = (k - 1) * d;
	std::int64_t out_len = len - span;
	if (out_len < 1) throw LayoutError("dilated_conv1d: sequence shorter than kernel span");
	Tensor out({B, out_len, cout});
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t t = 0; t < out_len; ++t)
			for (std::int64_t j = 0; j < k; ++j) {
				std::int64_t src = t + d * (k - 1 - j);
				for (std::int64_t co = 0; co < cout; ++co) {
					double acc = 0.0;
					for (std::int64_t ci = 0; ci < cin; ++ci)
						acc += w->value.at(j, ci, co) * x->value.at(b, src, ci);
					out.at(b, t, co) += acc;
				}
			}
	return make_node(std::move(out), {x, w}, [B, len, cin, k, cout, d, out_len](Node& n) {
		auto& x = *n.parents[0];
		auto& w = *n.parents[1];
		for (std::int64_t b = 0; b < B; ++b)
			for (std::int64_t t = 0; t < out_len; ++t)
				for (std::int64_t j = 0; j < k; ++j) {
					std::int64_t src = t + d * (k - 1 - j);
					for (std::int64_t co = 0; co < cout; ++co) {
						double gy = n.grad.at(b, t, co);
						if (gy == 0.0) continue;
						for (std::int64_t ci = 0; ci < cin; ++ci) {
							if (x.requires_grad) x.grad_ref().at((b * len + src) * cin + ci) += gy * w.value.at(j, ci, co);
							if (w.requires_grad) w.grad_ref().at((j * cin + ci) * cout + co) += gy * x.value.at(b, src, ci);
						}
					}
				}
	});
}

/// Max pooling along axis 1 with window 2, stride 2. A length-1 input passes through.
inline Var maxpool1d(const Var& x) {
	std::int64_t B = x->value.dim(0), len = x->value.dim(1), C = x->value.dim(2);
	if (len == 1) return x;
	std::int64_t out_len = len / 2;
	Tensor out({B, out_len, C});
	std::vector<std::int64_t> arg(static_cast<std::size_t>(B * out_len * C));
	for (std::int64_t b = 0; b < B; ++b)
		for (std::int64_t t = 0; t < out_len; ++t)
			for (std::int64_t c = 0; c < C; ++c) {
				double a0 = x->value.at(b, 2 * t, c), a1 = x->value.at(b, 2 * t + 1, c);
				if (a0 >= a1) {
					out.at(b, t, c) = a0;
					arg[static_cast<std::size_t>((b * out_len + t) * C + c)] = 2 * t;
				} else {
					out.at(b, t, c) = a1;
					arg[static_cast<std::size_t>((b * out_len + t) * C + c)] = 2 * t + 1;
				}
			}
	return make_node(std::move(out), {x}, [B, len, C, out_len, arg = std::move(arg)](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		for (std::int64_t i = 0; i < B * out_len * C; ++i) {
			std::int64_t b = i / (out_len * C), rem = i % (out_len * C);
			std::int64_t c = rem % C;
			g.at((b * len + arg[static_cast<std::size_t>(i)]) * C + c) += n.grad.at(i);
		}
	});
}

// ---------------------------------------------------------------------------
// Reductions / losses
// ---------------------------------------------------------------------------

inline Var mean_all(const Var& a) {
	double s = 0.0;
	for (double v : a->value.data) s += v;
	std::int64_t N = a->value.size();
	Tensor out = Tensor::scalar(s / static_cast<double>(N));
	return make_node(std::move(out), {a}, [N](Node& n) {
		auto& g = n.parents[0]->grad_ref();
		double gy = n.grad.data[0] / static_cast<double>(N);
		for (auto& v : g.data) v += gy;
	});
}

/// Mean of |x| over entries where mask != 0. Gradient is exactly zero at
/// masked-out entries.
inline Var masked_abs_mean(const Var& x, Tensor mask) {
	if (mask.shape != x->value.shape) throw LayoutError("masked_abs_mean: mask shape mismatch");
	double cnt = 0.0, s = 0.0;
	for (std::int64_t i = 0; i < x->value.size(); ++i)
		if (mask.at(i) != 0.0) {
			cnt += 1.0;
			s += std::abs(x->value.at(i));
		}
	if (cnt == 0.0) throw DegenerateDataError("masked_abs_mean: no valid entries");
	Tensor out = Tensor::scalar(s / cnt);
	return make_node(std::move(out), {x}, [mask = std::move(mask), cnt](Node& n) {
		auto& x = *n.parents[0];
		auto& g = x.grad_ref();
		double gy = n.grad.data[0] / cnt;
		for (std::int64_t i = 0; i < x.value.size(); ++i) {
			if (mask.at(i) == 0.0) continue;
			double v = x.value.at(i);
			g.at(i) += gy * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
		}
	});
}

inline bool all_finite(const Tensor& t) {
	for (double v : t.data)
		if (!std::isfinite(v)) return false;
	return true;
}

} // namespace lsttn::ad
