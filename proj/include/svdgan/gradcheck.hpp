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

#ifndef SVDGAN_GRADCHECK_HPP_
#define SVDGAN_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "svdgan/linalg.hpp"
#include "svdgan/optim.hpp"
#include "svdgan/rng.hpp"
#include "svdgan/spectrum.hpp"
#include "svdgan/svdnet.hpp"

namespace svdgan {

inline constexpr double kFdStep = 1e-5;

/// Central differences of f w.r.t. every entry of param (restored afterwards).
inline Vec finite_difference(std::span<double> param, const std::function<double()>& f, double h = kFdStep) {
	Vec out(param.size());
	for (std::size_t i = 0; i < param.size(); ++i) {
		const double old = param[i];
		param[i] = old + h;
		const double fp = f();
		param[i] = old - h;
		const double fm = f();
		param[i] = old;
		out[i] = (fp - fm) / (2.0 * h);
	}
	return out;
}

/// |a - b| / max(|a|, |b|) in the 2-norm; zero when both are below 1e-10.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
	double diff = 0.0, na = 0.0, nb = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		diff += (a[i] - b[i]) * (a[i] - b[i]);
		na += a[i] * a[i];
		nb += b[i] * b[i];
	}
	const double scale = std::sqrt(std::max(na, nb));
	if (scale < 1e-10)
		return std::sqrt(diff) < 1e-10 ? 0.0 : 1.0;
	return std::sqrt(diff) / scale;
}

struct GradcheckEntry {
	std::string component;
	double rel_error = 0.0;
	bool passed = false;
};

struct GradcheckReport {
	std::vector<GradcheckEntry> entries;
	double tolerance = 1e-5;

	bool passed() const {
		return std::all_of(entries.begin(), entries.end(), [](const GradcheckEntry& e) { return e.passed; });
	}
	const GradcheckEntry& worst() const {
		return *std::max_element(entries.begin(), entries.end(),
				[](const GradcheckEntry& a, const GradcheckEntry& b) { return a.rel_error < b.rel_error; });
	}
};

struct GradcheckOptions {
	std::uint64_t seed = 1;
	double tolerance = 1e-5;
	/// Component whose analytic gradient is deliberately perturbed (negative control).
	std::string corrupt;
};

namespace detail {

class GradSuite {
public:
	explicit GradSuite(const GradcheckOptions& opt) : opt_(opt), rng_(opt.seed) {}

	/// Compares analytic gradients against central differences, block by block; records the worst.
	void check(const std::string& name, std::vector<std::span<double>> params, std::vector<Vec> analytic,
			const std::function<double()>& f) {
		if (name == opt_.corrupt && !analytic.empty() && !analytic[0].empty())
			analytic[0][0] = analytic[0][0] * 1.1 + 0.1;
		double worst = 0.0;
		for (std::size_t b = 0; b < params.size(); ++b)
			worst = std::max(worst, relative_error(analytic[b], finite_difference(params[b], f)));
		report_.entries.push_back({name, worst, worst <= opt_.tolerance});
	}

	Rng& rng() { return rng_; }
	GradcheckReport take() {
		report_.tolerance = opt_.tolerance;
		return std::move(report_);
	}

private:
	GradcheckOptions opt_;
	Rng rng_;
	GradcheckReport report_;
};

inline double weighted_sum(std::span<const double> x, std::span<const double> w) { return dot(x, w); }

/// Random layer with perturbed (non-orthonormal) factors, generic diagonal, random bias.
inline SvdLayer random_layer(std::size_t din, std::size_t dout, Rng& rng) {
	SvdLayer l = init_svd_layer(din, dout, rng);
	for (double& x : l.u.flat())
		x += 0.1 * rng.gaussian();
	for (double& x : l.v.flat())
		x += 0.1 * rng.gaussian();
	for (double& x : l.e)
		x = rng.uniform(0.2, 1.5);
	for (double& x : l.bias)
		x = 0.1 * rng.gaussian();
	return l;
}

inline DiscNet random_disc(const std::vector<std::size_t>& dims, Rng& rng) {
	DiscNet net;
	for (std::size_t i = 0; i + 1 < dims.size(); ++i)
		net.layers.push_back(random_layer(dims[i], dims[i + 1], rng));
	return net;
}

inline SpectrumController prepared_controller(ControllerTag tag, DiscNet& net) {
	SpectrumController ctl = SpectrumController::make(tag);
	if (ctl.power_iteration())
		singular_value_update(net, ctl);
	if (ctl.clips())
		for (auto& l : net.layers)
			for (double& x : l.e)
				x = std::min(x, 0.95);
	return ctl;
}

inline void check_layer(GradSuite& s, ControllerTag tag) {
	Rng& rng = s.rng();
	DiscNet holder;
	holder.layers.push_back(random_layer(4, 3, rng));
	SpectrumController ctl = prepared_controller(tag, holder);
	SvdLayer& layer = holder.layers[0];
	Mat h = rng.gaussian_mat(5, 4);
	const Mat probe = rng.gaussian_mat(5, 3);
	auto f = [&] {
		SvdLayer copy = layer;
		return weighted_sum(layer_forward(copy, h, ctl, 0).flat(), probe.flat());
	};
	layer_forward(layer, h, ctl, 0);
	LayerBackward lb = layer_backward(layer, probe, ctl);
	s.check("layer_backward/" + std::string(tag_name(tag)),
			{h.flat(), layer.u.flat(), layer.v.flat(), layer.e, layer.bias},
			{lb.g_input.data(), lb.grad.u.data(), lb.grad.v.data(), lb.grad.e, lb.grad.bias}, f);
}

inline void check_disc(GradSuite& s, ControllerTag tag) {
	Rng& rng = s.rng();
	DiscNet net = random_disc({3, 5, 4, 1}, rng);
	SpectrumController ctl = prepared_controller(tag, net);
	Mat x = rng.gaussian_mat(6, 3);
	const Vec probe = rng.gaussian_vec(6);
	auto f = [&] {
		DiscNet copy = net;
		return weighted_sum(disc_forward(copy, x, ctl), probe);
	};
	disc_forward(net, x, ctl);
	DiscGrad g = disc_backward(net, probe, ctl);
	std::vector<std::span<double>> params{x.flat()};
	std::vector<Vec> analytic{g.input.data()};
	for (std::size_t i = 0; i < net.layers.size(); ++i) {
		auto& l = net.layers[i];
		params.insert(params.end(), {l.u.flat(), l.v.flat(), std::span<double>(l.e), std::span<double>(l.bias)});
		analytic.insert(analytic.end(), {g.layers[i].u.data(), g.layers[i].v.data(), g.layers[i].e, g.layers[i].bias});
	}
	s.check("disc_backward/" + std::string(tag_name(tag)), params, analytic, f);
}

}  // namespace detail

/// Finite-difference check of every hand-derived gradient at random generic points.
inline GradcheckReport run_gradcheck(const GradcheckOptions& opt = {}) {
	detail::GradSuite s(opt);
	Rng& rng = s.rng();

	for (const auto& [tag, name] : kControllerNames)
		detail::check_layer(s, tag);
	for (const auto& [tag, name] : kControllerNames)
		detail::check_disc(s, tag);

	{
		SvdLayer l = detail::random_layer(5, 3, rng);
		const OrthPenalty op = orth_penalty(l);
		s.check("orth_penalty", {l.u.flat(), l.v.flat()}, {op.g_u.data(), op.g_v.data()},
				[&] { return orth_penalty(l).value; });
	}
	{
		Vec m{1.7, 0.9, 1.3};
		const LipschitzRegResult r = lipschitz_reg(m, 0.7);
		s.check("lipschitz_reg", {m}, {r.grads}, [&] { return lipschitz_reg(m, 0.7).value; });
	}
	{
		std::vector<Vec> e{{0.3, 0.8, 0.55}, {0.9, 0.15}};
		const LayerwiseRegResult r = dopt_reg(e, 0.8);
		s.check("dopt_reg", {e[0], e[1]}, r.grads, [&] { return dopt_reg(e, 0.8).value; });
	}
	{
		std::vector<Vec> e{{0.62, 0.2, 0.91, 0.45}, {0.1, 0.7, 0.35}};
		const LayerwiseRegResult r = divergence_reg(e, 1.3, 0.5);
		s.check("divergence_reg", {e[0], e[1]}, r.grads, [&] { return divergence_reg(e, 1.3, 0.5).value; });
	}
	for (ControllerTag tag : {ControllerTag::LipschitzReg, ControllerTag::DOptimalPlusSN, ControllerTag::DivergencePlusSC}) {
		DiscNet net = detail::random_disc({3, 5, 4, 1}, rng);
		for (auto& l : net.layers)
			for (double& x : l.e)
				x = rng.uniform(0.05, 0.95) * (tag == ControllerTag::LipschitzReg ? 2.0 : 1.0);
		const SpectrumController ctl = SpectrumController::make(tag);
		const RegularizerValue r = regularizer_dispatch(ctl, net);
		std::vector<std::span<double>> params;
		for (auto& l : net.layers)
			params.push_back(l.e);
		s.check("regularizer_dispatch/" + std::string(tag_name(tag)), params, r.g_e,
				[&] { return regularizer_dispatch(ctl, net).value; });
	}
	{
		Vec real = rng.gaussian_vec(5, 2.0), fake = rng.gaussian_vec(4, 2.0);
		const DiscLoss l = disc_loss_ganlog(real, fake);
		s.check("disc_loss_ganlog", {real, fake}, {l.grad_real, l.grad_fake},
				[&] { return disc_loss_ganlog(real, fake).value; });
	}
	{
		Vec real{1.4, -0.3, 0.2, 2.5}, fake{-1.6, 0.4, -0.2};
		const DiscLoss l = disc_loss_hinge(real, fake);
		s.check("disc_loss_hinge", {real, fake}, {l.grad_real, l.grad_fake},
				[&] { return disc_loss_hinge(real, fake).value; });
	}
	for (GenLossForm form : {GenLossForm::LogD, GenLossForm::Literal}) {
		Vec fake = rng.gaussian_vec(5, 2.0);
		const GenLoss l = gen_loss_logd(fake, form);
		s.check(form == GenLossForm::LogD ? "gen_loss_logd" : "gen_loss_literal", {fake}, {l.grad},
				[&] { return gen_loss_logd(fake, form).value; });
	}
	{
		Vec fake = rng.gaussian_vec(5);
		const GenLoss l = gen_loss_hinge(fake);
		s.check("gen_loss_hinge", {fake}, {l.grad}, [&] { return gen_loss_hinge(fake).value; });
	}
	{
		GenNet gen = init_gen({3, 6, 5, 2}, rng.next_u64());
		for (auto& l : gen.layers)
			for (double& b : l.bias)
				b = 0.1 * rng.gaussian();
		Mat z = rng.gaussian_mat(4, 3);
		const Mat probe = rng.gaussian_mat(4, 2);
		auto f = [&] {
			GenNet copy = gen;
			return detail::weighted_sum(gen_forward(copy, z).flat(), probe.flat());
		};
		gen_forward(gen, z);
		GenGrad g = gen_backward(gen, probe);
		std::vector<std::span<double>> params{z.flat()};
		std::vector<Vec> analytic{g.input.data()};
		for (std::size_t i = 0; i < gen.layers.size(); ++i) {
			params.insert(params.end(), {gen.layers[i].w.flat(), std::span<double>(gen.layers[i].bias)});
			analytic.insert(analytic.end(), {g.layers[i].w.data(), g.layers[i].bias});
		}
		s.check("gen_backward", params, analytic, f);
	}
	{
		// Generator trained through the discriminator with the non-saturating loss.
		GenNet gen = init_gen({2, 5, 2}, rng.next_u64());
		DiscNet disc = detail::random_disc({2, 4, 1}, rng);
		const SpectrumController ctl = SpectrumController::make(ControllerTag::SpectralNormSVD);
		const Mat z = rng.gaussian_mat(5, 2);
		auto f = [&] {
			GenNet g = gen;
			DiscNet d = disc;
			return gen_loss_logd(disc_forward(d, gen_forward(g, z), ctl)).value;
		};
		const Vec logits = disc_forward(disc, gen_forward(gen, z), ctl);
		const GenLoss loss = gen_loss_logd(logits);
		const GenGrad g = gen_backward(gen, disc_backward(disc, loss.grad, ctl).input);
		std::vector<std::span<double>> params;
		std::vector<Vec> analytic;
		for (std::size_t i = 0; i < gen.layers.size(); ++i) {
			params.insert(params.end(), {gen.layers[i].w.flat(), std::span<double>(gen.layers[i].bias)});
			analytic.insert(analytic.end(), {g.layers[i].w.data(), g.layers[i].bias});
		}
		s.check("generator_through_disc", params, analytic, f);
	}
	return s.take();
}

}  // namespace svdgan

#endif  // SVDGAN_GRADCHECK_HPP_
