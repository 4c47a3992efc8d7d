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

#ifndef SVDGAN_OPTIM_HPP_
#define SVDGAN_OPTIM_HPP_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "svdgan/error.hpp"
#include "svdgan/mat.hpp"
#include "svdgan/svdnet.hpp"

namespace svdgan {

struct AdamConfig {
	double lr = 2e-4;
	double beta1 = 0.5;
	double beta2 = 0.999;
	double eps = 1e-8;
};

/// First/second moments per parameter block and the shared step counter.
struct AdamState {
	AdamConfig config;
	std::vector<Vec> m;
	std::vector<Vec> v;
	long t = 0;
};

/// One bias-corrected Adam descent step over matching parameter/gradient blocks.
/// Throws TrainingFault (naming the block) on a non-finite gradient, leaving params untouched.
inline void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
		AdamState& state, long iteration = -1) {
	if (params.size() != grads.size())
		throw InvalidInput("adam_step: " + std::to_string(params.size()) + " parameter blocks vs " +
				std::to_string(grads.size()) + " gradient blocks");
	for (std::size_t b = 0; b < params.size(); ++b) {
		if (params[b].size() != grads[b].size())
			throw InvalidInput("adam_step: block " + std::to_string(b) + " size mismatch");
		for (double g : grads[b])
			if (!std::isfinite(g))
				throw TrainingFault("adam_step: non-finite gradient in parameter block " + std::to_string(b) +
						" at iteration " + std::to_string(iteration), iteration);
	}
	if (state.m.size() != params.size()) {
		state.m.clear();
		state.v.clear();
		for (const auto& p : params) {
			state.m.emplace_back(p.size(), 0.0);
			state.v.emplace_back(p.size(), 0.0);
		}
	}
	const AdamConfig& c = state.config;
	++state.t;
	const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
	const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
	for (std::size_t b = 0; b < params.size(); ++b) {
		Vec& m = state.m[b];
		Vec& v = state.v[b];
		auto p = params[b];
		auto g = grads[b];
		for (std::size_t i = 0; i < p.size(); ++i) {
			m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
			v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
			const double m_hat = m[i] / bc1;
			const double v_hat = v[i] / bc2;
			p[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
		}
	}
}

// Parameter blocks are ordered per layer as U, e, V, bias (discriminator) or W, bias (generator).

inline std::vector<std::span<double>> parameter_blocks(DiscNet& net) {
	std::vector<std::span<double>> out;
	for (auto& l : net.layers) {
		out.push_back(l.u.flat());
		out.push_back(l.e);
		out.push_back(l.v.flat());
		out.push_back(l.bias);
	}
	return out;
}

inline std::vector<std::span<const double>> gradient_blocks(const DiscGrad& g) {
	std::vector<std::span<const double>> out;
	for (const auto& l : g.layers) {
		out.push_back(l.u.flat());
		out.push_back(l.e);
		out.push_back(l.v.flat());
		out.push_back(l.bias);
	}
	return out;
}

inline std::vector<std::span<double>> parameter_blocks(GenNet& net) {
	std::vector<std::span<double>> out;
	for (auto& l : net.layers) {
		out.push_back(l.w.flat());
		out.push_back(l.bias);
	}
	return out;
}

inline std::vector<std::span<const double>> gradient_blocks(const GenGrad& g) {
	std::vector<std::span<const double>> out;
	for (const auto& l : g.layers) {
		out.push_back(l.w.flat());
		out.push_back(l.bias);
	}
	return out;
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) noexcept {
	return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) noexcept {
	if (x >= 0.0)
		return 1.0 / (1.0 + std::exp(-x));
	const double z = std::exp(x);
	return z / (1.0 + z);
}

/// Discriminator objective value and its gradient w.r.t. each logit. The objective is maximized.
struct DiscLoss {
	double value = 0.0;
	Vec grad_real;
	Vec grad_fake;
};

/// Generator objective value and gradient w.r.t. each fake logit. The objective is minimized.
struct GenLoss {
	double value = 0.0;
	Vec grad;
};

enum class LossFamily { GanLog, Hinge };
enum class GenLossForm { LogD, Literal };

/// mean log A(D(x_real)) + mean log(1 - A(D(x_fake))), A the logistic sigmoid.
inline DiscLoss disc_loss_ganlog(std::span<const double> real, std::span<const double> fake) {
	DiscLoss out{0.0, Vec(real.size()), Vec(fake.size())};
	const double nr = static_cast<double>(real.size());
	const double nf = static_cast<double>(fake.size());
	for (std::size_t i = 0; i < real.size(); ++i) {
		out.value -= softplus(-real[i]) / nr;
		out.grad_real[i] = sigmoid(-real[i]) / nr;
	}
	for (std::size_t i = 0; i < fake.size(); ++i) {
		out.value -= softplus(fake[i]) / nf;
		out.grad_fake[i] = -sigmoid(fake[i]) / nf;
	}
	return out;
}

/// Non-saturating generator loss -mean log A(D(G(z))), or the literal -mean A(D(G(z))).
inline GenLoss gen_loss_logd(std::span<const double> fake, GenLossForm form = GenLossForm::LogD) {
	GenLoss out{0.0, Vec(fake.size())};
	const double n = static_cast<double>(fake.size());
	for (std::size_t i = 0; i < fake.size(); ++i) {
		if (form == GenLossForm::LogD) {
			out.value += softplus(-fake[i]) / n;
			out.grad[i] = -sigmoid(-fake[i]) / n;
		} else {
			const double s = sigmoid(fake[i]);
			out.value -= s / n;
			out.grad[i] = -s * (1.0 - s) / n;
		}
	}
	return out;
}

/// mean min(0, -1 - D(x_fake)) + mean min(0, -1 + D(x_real)). Subgradient 0 at the kinks.
inline DiscLoss disc_loss_hinge(std::span<const double> real, std::span<const double> fake) {
	DiscLoss out{0.0, Vec(real.size(), 0.0), Vec(fake.size(), 0.0)};
	const double nr = static_cast<double>(real.size());
	const double nf = static_cast<double>(fake.size());
	for (std::size_t i = 0; i < fake.size(); ++i) {
		const double t = -1.0 - fake[i];
		if (t < 0.0) {
			out.value += t / nf;
			out.grad_fake[i] = -1.0 / nf;
		}
	}
	for (std::size_t i = 0; i < real.size(); ++i) {
		const double t = -1.0 + real[i];
		if (t < 0.0) {
			out.value += t / nr;
			out.grad_real[i] = 1.0 / nr;
		}
	}
	return out;
}

/// Generator partner of the hinge loss: -mean D(G(z)).
inline GenLoss gen_loss_hinge(std::span<const double> fake) {
	GenLoss out{0.0, Vec(fake.size(), -1.0 / static_cast<double>(fake.size()))};
	for (double f : fake)
		out.value -= f / static_cast<double>(fake.size());
	return out;
}

}  // namespace svdgan

#endif  // SVDGAN_OPTIM_HPP_
