/*
 * Copyright 2026 The svdgan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SVDGAN_SVDNET_HPP_
#define SVDGAN_SVDNET_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svdgan/error.hpp"
#include "svdgan/linalg.hpp"
#include "svdgan/mat.hpp"
#include "svdgan/rng.hpp"
#include "svdgan/spectrum.hpp"

namespace svdgan {

inline constexpr double kLeakySlope = 0.1;

inline double leaky(double x) noexcept { return x > 0.0 ? x : kLeakySlope * x; }
inline double leaky_grad(double x) noexcept { return x > 0.0 ? 1.0 : kLeakySlope; }

/// Quantities realized by one forward pass, kept for the backward pass.
struct LayerCache {
	bool valid = false;
	Mat input;            ///< H, batch x d_in
	Mat weight;           ///< W actually applied
	Vec diag;             ///< effective diagonal e'
	double sigma_hat = 1.0;  ///< power-iteration estimate (PowerIterSN), else 1
	Vec power_u;
	Vec power_v;
};

/// W = U diag(e) Vᵀ (d_in x d_out) plus a bias; r = min(d_in, d_out).
struct SvdLayer {
	Mat u;     ///< d_in x r
	Vec e;     ///< r singular-value parameters
	Mat v;     ///< d_out x r
	Vec bias;  ///< d_out
	LayerCache cache;

	std::size_t d_in() const noexcept { return u.rows(); }
	std::size_t d_out() const noexcept { return v.rows(); }
	std::size_t rank() const noexcept { return e.size(); }

	void validate() const {
		if (u.cols() != e.size() || v.cols() != e.size() || bias.size() != v.rows() ||
				e.size() != std::min(u.rows(), v.rows()))
			throw InvalidInput("SvdLayer: inconsistent shapes U " + shape_str(u) + ", V " + shape_str(v) + ", e " +
					std::to_string(e.size()) + ", bias " + std::to_string(bias.size()));
	}
};

struct SvdLayerGrad {
	Mat u;
	Vec e;
	Mat v;
	Vec bias;

	SvdLayerGrad& operator+=(const SvdLayerGrad& o) {
		u += o.u;
		v += o.v;
		for (std::size_t k = 0; k < e.size(); ++k)
			e[k] += o.e[k];
		for (std::size_t k = 0; k < bias.size(); ++k)
			bias[k] += o.bias[k];
		return *this;
	}
};

inline SvdLayerGrad zero_grad_like(const SvdLayer& layer) {
	return {Mat(layer.u.rows(), layer.u.cols()), Vec(layer.rank(), 0.0), Mat(layer.v.rows(), layer.v.cols()),
			Vec(layer.bias.size(), 0.0)};
}

/// Layer with orthonormal random factors, e = 1 and zero bias.
inline SvdLayer init_svd_layer(std::size_t d_in, std::size_t d_out, Rng& rng) {
	if (d_in == 0 || d_out == 0)
		throw InvalidInput("init_svd_layer: zero dimension");
	const std::size_t r = std::min(d_in, d_out);
	SvdLayer layer;
	layer.u = qr_orthonormalize(rng.gaussian_mat(d_in, r));
	layer.v = qr_orthonormalize(rng.gaussian_mat(d_out, r));
	layer.e.assign(r, 1.0);
	layer.bias.assign(d_out, 0.0);
	return layer;
}

/// Re-orthonormalizes U and V in place.
inline void reorthonormalize(SvdLayer& layer) {
	layer.u = qr_orthonormalize(layer.u);
	layer.v = qr_orthonormalize(layer.v);
}

namespace detail {

inline const PowerState& power_state_for(const SpectrumController& ctl, std::size_t index) {
	if (index >= ctl.power_state.size() || ctl.power_state[index].u.empty())
		throw StateError("power iteration state for layer " + std::to_string(index) +
				" is not initialized; run singular_value_update first");
	return ctl.power_state[index];
}

struct Realized {
	Mat weight;
	Vec diag;
	double sigma_hat = 1.0;
	Vec pu, pv;
};

inline Realized realize(const SvdLayer& layer, const SpectrumController& ctl, std::size_t index) {
	Realized out;
	if (ctl.power_iteration()) {
		const PowerState& ps = power_state_for(ctl, index);
		Mat raw = matmul_nt(scale_cols(layer.u, layer.e), layer.v);
		out.sigma_hat = dot(ps.u, matvec(raw, ps.v));
		if (!(std::abs(out.sigma_hat) > kZeroSpectrum))
			throw ZeroSpectrumError("power iteration: sigma_hat vanished on layer " + std::to_string(index));
		out.weight = raw * (1.0 / out.sigma_hat);
		out.diag = layer.e;
		for (double& x : out.diag)
			x /= out.sigma_hat;
		out.pu = ps.u;
		out.pv = ps.v;
		return out;
	}
	out.diag = effective_diagonal(layer.e, ctl);
	out.weight = matmul_nt(scale_cols(layer.u, out.diag), layer.v);
	return out;
}

}  // namespace detail

/// Effective diagonal e' of a layer: e/max(e) under normalization, e/sigma_hat under power
/// iteration, e otherwise.
inline Vec layer_effective_diagonal(const SvdLayer& layer, const SpectrumController& ctl, std::size_t index = 0) {
	return detail::realize(layer, ctl, index).diag;
}

/// W = U diag(e') Vᵀ, shape d_in x d_out.
inline Mat effective_weight(const SvdLayer& layer, const SpectrumController& ctl, std::size_t index = 0) {
	return detail::realize(layer, ctl, index).weight;
}

/// S = H W + bias. Caches H and the realized weight.
inline Mat layer_forward(SvdLayer& layer, const Mat& h, const SpectrumController& ctl, std::size_t index = 0) {
	if (h.cols() != layer.d_in())
		throw InvalidInput("layer_forward: input " + shape_str(h) + " for d_in = " + std::to_string(layer.d_in()));
	detail::Realized r = detail::realize(layer, ctl, index);
	Mat s = matmul(h, r.weight);
	for (std::size_t i = 0; i < s.rows(); ++i) {
		auto row = s.row(i);
		for (std::size_t j = 0; j < row.size(); ++j)
			row[j] += layer.bias[j];
	}
	layer.cache = {true, h, std::move(r.weight), std::move(r.diag), r.sigma_hat, std::move(r.pu), std::move(r.pv)};
	return s;
}

struct LayerBackward {
	Mat g_input;
	SvdLayerGrad grad;
};

/// Backward through S = H W + bias with W = U diag(e') Vᵀ.
///
/// With G_W = Hᵀ G_S: G_U = G_W V diag(e'), G_V = G_Wᵀ U diag(e'), and the gradient w.r.t. e'_k is
/// u_kᵀ G_W v_k, then pulled back through the controller's normalization. Under power iteration
/// W = W_raw / sigma_hat with sigma_hat = uᵀ W_raw v (u, v held fixed), so
/// G_Wraw = G_W / sigma_hat - <G_W, W_raw> / sigma_hat^2 · u vᵀ is pushed through W_raw = U diag(e) Vᵀ.
inline LayerBackward layer_backward(const SvdLayer& layer, const Mat& g_s, const SpectrumController& ctl) {
	const LayerCache& c = layer.cache;
	if (!c.valid)
		throw StateError("layer_backward called before layer_forward");
	if (g_s.rows() != c.input.rows() || g_s.cols() != layer.d_out())
		throw InvalidInput("layer_backward: upstream gradient " + shape_str(g_s) + " for output " +
				std::to_string(c.input.rows()) + "x" + std::to_string(layer.d_out()));

	LayerBackward out;
	out.g_input = matmul_nt(g_s, c.weight);
	Mat g_w = matmul_tn(c.input, g_s);

	Vec scale = c.diag;
	if (ctl.power_iteration()) {
		const double sigma = c.sigma_hat;
		// <G_W, W_raw> = sigma * <G_W, W>
		const double coupling = inner(g_w, c.weight) / sigma;
		g_w *= 1.0 / sigma;
		g_w -= outer(c.power_u, c.power_v) * coupling;
		scale = layer.e;
	}

	Mat gw_v = matmul(g_w, layer.v);            // d_in x r
	Mat gwt_u = matmul_tn(g_w, layer.u);        // d_out x r
	Vec g_diag(layer.rank(), 0.0);
	for (std::size_t i = 0; i < gw_v.rows(); ++i)
		for (std::size_t k = 0; k < layer.rank(); ++k)
			g_diag[k] += layer.u(i, k) * gw_v(i, k);

	out.grad.u = scale_cols(std::move(gw_v), scale);
	out.grad.v = scale_cols(std::move(gwt_u), scale);
	out.grad.e = ctl.power_iteration() ? std::move(g_diag) : chain_effective_grad(layer.e, g_diag, ctl);
	out.grad.bias.assign(layer.d_out(), 0.0);
	for (std::size_t i = 0; i < g_s.rows(); ++i) {
		auto row = g_s.row(i);
		for (std::size_t j = 0; j < row.size(); ++j)
			out.grad.bias[j] += row[j];
	}
	return out;
}

struct OrthPenalty {
	double value = 0.0;
	Mat g_u;
	Mat g_v;
};

/// ‖UᵀU − I‖_F² + ‖VᵀV − I‖_F² and its gradients 4 U (UᵀU − I), 4 V (VᵀV − I).
inline OrthPenalty orth_penalty(const SvdLayer& layer) {
	auto one = [](const Mat& a, double& value) {
		Mat g = matmul_tn(a, a);
		for (std::size_t i = 0; i < g.rows(); ++i)
			g(i, i) -= 1.0;
		value += inner(g, g);
		return matmul(a, g) * 4.0;
	};
	OrthPenalty out;
	out.g_u = one(layer.u, out.value);
	out.g_v = one(layer.v, out.value);
	return out;
}

/// Separate penalties for U and V: {‖UᵀU − I‖_F², ‖VᵀV − I‖_F²}.
inline std::pair<double, double> orth_penalty_parts(const SvdLayer& layer) {
	const double du = gram_deviation(layer.u);
	const double dv = gram_deviation(layer.v);
	return {du * du, dv * dv};
}

/// Discriminator: SVD layers, leaky rectifier (slope 0.1) between them, identity on the last.
struct DiscNet {
	std::vector<SvdLayer> layers;
	std::vector<Mat> pre_activations;  ///< S_{i+1} of the last forward batch

	std::size_t depth() const noexcept { return layers.size(); }
	std::size_t input_dim() const { return layers.front().d_in(); }

	std::vector<std::size_t> dims() const {
		std::vector<std::size_t> d;
		if (layers.empty())
			return d;
		d.push_back(layers.front().d_in());
		for (const auto& l : layers)
			d.push_back(l.d_out());
		return d;
	}

	void validate() const {
		if (layers.empty())
			throw InvalidInput("DiscNet: no layers");
		for (std::size_t i = 0; i < layers.size(); ++i) {
			layers[i].validate();
			if (i + 1 < layers.size() && layers[i].d_out() != layers[i + 1].d_in())
				throw InvalidInput("DiscNet: layer " + std::to_string(i) + " output does not chain");
		}
		if (layers.back().d_out() != 1)
			throw InvalidInput("DiscNet: final output dimension must be 1");
	}
};

inline void check_dims(const std::vector<std::size_t>& dims, const char* who) {
	if (dims.size() < 2)
		throw InvalidInput(std::string(who) + ": need at least two dimensions");
	for (std::size_t d : dims)
		if (d == 0)
			throw InvalidInput(std::string(who) + ": zero dimension");
}

inline DiscNet init_disc(const std::vector<std::size_t>& dims, std::uint64_t seed) {
	check_dims(dims, "init_disc");
	if (dims.back() != 1)
		throw InvalidInput("init_disc: last dimension must be 1");
	Rng rng(seed);
	DiscNet net;
	for (std::size_t i = 0; i + 1 < dims.size(); ++i)
		net.layers.push_back(init_svd_layer(dims[i], dims[i + 1], rng));
	return net;
}

/// Logits for each row of x. Caches every intermediate for disc_backward.
inline Vec disc_forward(DiscNet& net, const Mat& x, const SpectrumController& ctl) {
	if (net.layers.empty())
		throw InvalidInput("disc_forward: empty network");
	net.pre_activations.clear();
	Mat h = x;
	for (std::size_t i = 0; i < net.layers.size(); ++i) {
		Mat s = layer_forward(net.layers[i], h, ctl, i);
		net.pre_activations.push_back(s);
		if (i + 1 < net.layers.size())
			for (double& t : s.flat())
				t = leaky(t);
		h = std::move(s);
	}
	return Vec(h.data().begin(), h.data().end());
}

struct DiscGrad {
	std::vector<SvdLayerGrad> layers;
	Mat input;  ///< gradient w.r.t. the network input (used to train the generator)
};

inline DiscGrad disc_backward(const DiscNet& net, std::span<const double> g_logits, const SpectrumController& ctl) {
	if (net.pre_activations.size() != net.layers.size())
		throw StateError("disc_backward called before disc_forward");
	const std::size_t batch = net.pre_activations.back().rows();
	if (g_logits.size() != batch)
		throw InvalidInput("disc_backward: " + std::to_string(g_logits.size()) + " logit gradients for batch " +
				std::to_string(batch));
	DiscGrad out;
	out.layers.resize(net.layers.size());
	Mat g(batch, 1, Vec(g_logits.begin(), g_logits.end()));
	for (std::size_t i = net.layers.size(); i-- > 0;) {
		if (i + 1 < net.layers.size()) {
			const Mat& s = net.pre_activations[i];
			for (std::size_t k = 0; k < g.size(); ++k)
				g.flat()[k] *= leaky_grad(s.flat()[k]);
		}
		LayerBackward lb = layer_backward(net.layers[i], g, ctl);
		out.layers[i] = std::move(lb.grad);
		g = std::move(lb.g_input);
	}
	out.input = std::move(g);
	return out;
}

/// Applies the controller's per-iteration singular-value rule to one layer.
inline void singular_value_update(SvdLayer& layer, SpectrumController& ctl, std::size_t index = 0) {
	switch (ctl.tag) {
	case ControllerTag::Orthogonal:
		layer.e.assign(layer.rank(), 1.0);
		break;
	case ControllerTag::SpectralConstraint:
	case ControllerTag::DivergencePlusSC:
		layer.e = project_clip(std::move(layer.e));
		break;
	case ControllerTag::SpectralNormSVD:
	case ControllerTag::DOptimalPlusSN: {
		const double top = layer.e[argmax_lowest(layer.e)];
		if (!(top > kZeroSpectrum))
			throw ZeroSpectrumError("spectral normalization: max singular value " + std::to_string(top) + " <= 1e-12");
		break;
	}
	case ControllerTag::LipschitzReg:
		break;
	case ControllerTag::PowerIterSN: {
		if (ctl.power_state.size() <= index)
			ctl.power_state.resize(index + 1);
		PowerState& ps = ctl.power_state[index];
		const Mat raw = matmul_nt(scale_cols(layer.u, layer.e), layer.v);
		std::uint64_t reseed = 0x9e3779b97f4a7c15ULL ^ index;
		for (int attempt = 0;; ++attempt) {
			if (ps.u.size() != layer.d_in()) {
				Rng rng(reseed + static_cast<std::uint64_t>(attempt));
				ps.u = rng.gaussian_vec(layer.d_in());
			}
			try {
				PowerIterResult r = power_iter_sn(raw, ps.u, 1);
				ps.u = std::move(r.u);
				ps.v = std::move(r.v);
				break;
			} catch (const RestartError&) {
				if (attempt >= 8)
					throw;
				ps.u.clear();
			}
		}
		break;
	}
	}
}

inline void singular_value_update(DiscNet& net, SpectrumController& ctl) {
	for (std::size_t i = 0; i < net.layers.size(); ++i)
		singular_value_update(net.layers[i], ctl, i);
}

struct RegularizerValue {
	double value = 0.0;
	std::vector<Vec> g_e;  ///< one per layer, w.r.t. the stored e
};

/// gamma * R(E) for the controller. D-optimal and divergence cover layers 1..L-1; the Lipschitz
/// regularizer covers all L. D-optimal acts on the normalized diagonal and is pulled back through it.
inline RegularizerValue regularizer_dispatch(const SpectrumController& ctl, const DiscNet& net) {
	RegularizerValue out;
	out.g_e.reserve(net.layers.size());
	for (const auto& l : net.layers)
		out.g_e.emplace_back(l.rank(), 0.0);
	const std::size_t hidden = net.layers.empty() ? 0 : net.layers.size() - 1;

	switch (ctl.tag) {
	case ControllerTag::LipschitzReg: {
		Vec maxima;
		std::vector<std::size_t> where;
		for (const auto& l : net.layers) {
			where.push_back(argmax_lowest(l.e));
			maxima.push_back(l.e[where.back()]);
		}
		LipschitzRegResult r = lipschitz_reg(maxima, ctl.gamma);
		out.value = r.value;
		for (std::size_t i = 0; i < net.layers.size(); ++i)
			out.g_e[i][where[i]] = r.grads[i];
		break;
	}
	case ControllerTag::DOptimalPlusSN: {
		std::vector<Vec> eff;
		for (std::size_t i = 0; i < hidden; ++i)
			eff.push_back(effective_diagonal(net.layers[i].e, ctl));
		LayerwiseRegResult r = dopt_reg(eff, ctl.gamma);
		out.value = r.value;
		for (std::size_t i = 0; i < hidden; ++i)
			out.g_e[i] = chain_effective_grad(net.layers[i].e, r.grads[i], ctl);
		break;
	}
	case ControllerTag::DivergencePlusSC: {
		std::vector<Vec> lists;
		for (std::size_t i = 0; i < hidden; ++i)
			lists.push_back(net.layers[i].e);
		LayerwiseRegResult r = divergence_reg(lists, ctl.gamma, ctl.ref_scale);
		out.value = r.value;
		for (std::size_t i = 0; i < hidden; ++i)
			out.g_e[i] = std::move(r.grads[i]);
		break;
	}
	default:
		break;
	}
	return out;
}

/// Plain dense layer X W + b used by the generator.
struct DenseLayer {
	Mat w;  ///< d_in x d_out
	Vec bias;
};

struct GenNet {
	std::vector<DenseLayer> layers;
	std::vector<Mat> inputs;
	std::vector<Mat> pre_activations;

	std::size_t z_dim() const { return layers.front().w.rows(); }
	std::size_t output_dim() const { return layers.back().w.cols(); }

	std::vector<std::size_t> dims() const {
		std::vector<std::size_t> d;
		if (layers.empty())
			return d;
		d.push_back(layers.front().w.rows());
		for (const auto& l : layers)
			d.push_back(l.w.cols());
		return d;
	}
};

struct DenseGrad {
	Mat w;
	Vec bias;
};

struct GenGrad {
	std::vector<DenseGrad> layers;
	Mat input;
};

/// He-scaled Gaussian weights, zero biases.
inline GenNet init_gen(const std::vector<std::size_t>& dims, std::uint64_t seed) {
	check_dims(dims, "init_gen");
	Rng rng(seed);
	GenNet net;
	for (std::size_t i = 0; i + 1 < dims.size(); ++i)
		net.layers.push_back({rng.gaussian_mat(dims[i], dims[i + 1], std::sqrt(2.0 / static_cast<double>(dims[i]))),
				Vec(dims[i + 1], 0.0)});
	return net;
}

inline Mat gen_forward(GenNet& net, const Mat& z) {
	if (net.layers.empty())
		throw InvalidInput("gen_forward: empty network");
	net.inputs.clear();
	net.pre_activations.clear();
	Mat h = z;
	for (std::size_t i = 0; i < net.layers.size(); ++i) {
		const DenseLayer& l = net.layers[i];
		if (h.cols() != l.w.rows())
			throw InvalidInput("gen_forward: input " + shape_str(h) + " for layer " + std::to_string(i) + " " +
					shape_str(l.w));
		Mat s = matmul(h, l.w);
		for (std::size_t r = 0; r < s.rows(); ++r) {
			auto row = s.row(r);
			for (std::size_t j = 0; j < row.size(); ++j)
				row[j] += l.bias[j];
		}
		net.inputs.push_back(std::move(h));
		net.pre_activations.push_back(s);
		if (i + 1 < net.layers.size())
			for (double& t : s.flat())
				t = leaky(t);
		h = std::move(s);
	}
	return h;
}

inline GenGrad gen_backward(const GenNet& net, const Mat& g_x) {
	if (net.inputs.size() != net.layers.size())
		throw StateError("gen_backward called before gen_forward");
	const Mat& last = net.pre_activations.back();
	if (g_x.rows() != last.rows() || g_x.cols() != last.cols())
		throw InvalidInput("gen_backward: upstream gradient " + shape_str(g_x) + " for output " + shape_str(last));
	GenGrad out;
	out.layers.resize(net.layers.size());
	Mat g = g_x;
	for (std::size_t i = net.layers.size(); i-- > 0;) {
		if (i + 1 < net.layers.size()) {
			const Mat& s = net.pre_activations[i];
			for (std::size_t k = 0; k < g.size(); ++k)
				g.flat()[k] *= leaky_grad(s.flat()[k]);
		}
		out.layers[i].w = matmul_tn(net.inputs[i], g);
		out.layers[i].bias.assign(g.cols(), 0.0);
		for (std::size_t r = 0; r < g.rows(); ++r)
			for (std::size_t j = 0; j < g.cols(); ++j)
				out.layers[i].bias[j] += g(r, j);
		g = matmul_nt(g, net.layers[i].w);
	}
	out.input = std::move(g);
	return out;
}

}  // namespace svdgan

#endif  // SVDGAN_SVDNET_HPP_
