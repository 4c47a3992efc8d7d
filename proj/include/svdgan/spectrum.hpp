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

#ifndef SVDGAN_SPECTRUM_HPP_
#define SVDGAN_SPECTRUM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svdgan/error.hpp"
#include "svdgan/mat.hpp"

namespace svdgan {

/// Spectrum-control strategies for the discriminator's singular values.
enum class ControllerTag {
	Orthogonal,          ///< e fixed at 1: plain orthogonal regularization
	SpectralNormSVD,     ///< e' = e / max(e)
	SpectralConstraint,  ///< e clipped into [0, 1]
	LipschitzReg,        ///< free e, penalize max(sum_i log max_k e^i_k, 0)
	DOptimalPlusSN,      ///< spectral normalization plus -sum log e'
	DivergencePlusSC,    ///< clipping plus the reference-distribution divergence penalty
	PowerIterSN,         ///< baseline: W / sigma_hat with one power-iteration step per forward
};

inline constexpr std::array<std::pair<ControllerTag, std::string_view>, 7> kControllerNames{{
		{ControllerTag::Orthogonal, "orthogonal"},
		{ControllerTag::SpectralNormSVD, "sn_svd"},
		{ControllerTag::SpectralConstraint, "constraint"},
		{ControllerTag::LipschitzReg, "lipschitz"},
		{ControllerTag::DOptimalPlusSN, "dopt_sn"},
		{ControllerTag::DivergencePlusSC, "divergence"},
		{ControllerTag::PowerIterSN, "power_iter"},
}};

inline std::string_view tag_name(ControllerTag tag) {
	for (const auto& [t, name] : kControllerNames)
		if (t == tag)
			return name;
	return "unknown";
}

inline std::optional<ControllerTag> parse_tag(std::string_view name) {
	for (const auto& [t, n] : kControllerNames)
		if (n == name)
			return t;
	return std::nullopt;
}

inline constexpr double kDefaultGamma = 1.0;
inline constexpr double kDefaultDivergenceGamma = 0.05;
inline constexpr double kDefaultRefScale = 0.5;
inline constexpr double kGapFloor = 1e-6;
inline constexpr double kLogFloor = 1e-6;
inline constexpr double kZeroSpectrum = 1e-12;

inline double default_gamma(ControllerTag tag) {
	return tag == ControllerTag::DivergencePlusSC ? kDefaultDivergenceGamma : kDefaultGamma;
}

/// Persistent power-iteration vectors for one layer.
struct PowerState {
	Vec u;
	Vec v;
};

struct SpectrumController {
	ControllerTag tag = ControllerTag::Orthogonal;
	double gamma = kDefaultGamma;
	double ref_scale = kDefaultRefScale;
	/// One entry per discriminator layer, PowerIterSN only; empty until the first update.
	std::vector<PowerState> power_state;

	static SpectrumController make(ControllerTag tag, std::optional<double> gamma = std::nullopt,
			double ref_scale = kDefaultRefScale) {
		SpectrumController c{tag, gamma.value_or(default_gamma(tag)), ref_scale, {}};
		c.validate();
		return c;
	}

	void validate() const {
		if (!(gamma >= 0.0) || !std::isfinite(gamma))
			throw InvalidInput("controller: gamma must be finite and >= 0");
		if (!(ref_scale > 0.0) || !std::isfinite(ref_scale))
			throw InvalidInput("controller: ref_scale must be finite and > 0");
	}

	bool normalizes() const noexcept { return tag == ControllerTag::SpectralNormSVD || tag == ControllerTag::DOptimalPlusSN; }
	bool clips() const noexcept { return tag == ControllerTag::SpectralConstraint || tag == ControllerTag::DivergencePlusSC; }
	bool fixes_diagonal() const noexcept { return tag == ControllerTag::Orthogonal; }
	bool power_iteration() const noexcept { return tag == ControllerTag::PowerIterSN; }
};

/// Entrywise clipping into [0, 1].
inline Vec project_clip(Vec e) {
	for (double& t : e)
		t = std::min(std::max(t, 0.0), 1.0);
	return e;
}

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax_lowest(std::span<const double> e) {
	std::size_t best = 0;
	for (std::size_t k = 1; k < e.size(); ++k)
		if (e[k] > e[best])
			best = k;
	return best;
}

/// Diagonal actually realized in the weight, before any power-iteration rescaling.
inline Vec effective_diagonal(std::span<const double> e, const SpectrumController& ctl) {
	Vec out(e.begin(), e.end());
	if (ctl.normalizes()) {
		const double top = e[argmax_lowest(e)];
		if (!(top > kZeroSpectrum))
			throw ZeroSpectrumError("spectral normalization: max singular value " + std::to_string(top) + " <= 1e-12");
		for (double& x : out)
			x /= top;
	}
	return out;
}

/// Pulls a gradient w.r.t. the effective diagonal back to the stored diagonal. Under normalization
/// e' = e / e_a (a = argmax), so de'_k/de_j = [k == j]/e_a - [j == a] e_k / e_a^2.
inline Vec chain_effective_grad(std::span<const double> e, std::span<const double> g_eff, const SpectrumController& ctl) {
	Vec g(g_eff.begin(), g_eff.end());
	if (!ctl.normalizes())
		return g;
	const std::size_t a = argmax_lowest(e);
	const double top = e[a];
	if (!(top > kZeroSpectrum))
		throw ZeroSpectrumError("spectral normalization: max singular value " + std::to_string(top) + " <= 1e-12");
	double coupled = 0.0;
	for (std::size_t k = 0; k < e.size(); ++k) {
		coupled += g_eff[k] * e[k];
		g[k] = g_eff[k] / top;
	}
	g[a] -= coupled / (top * top);
	return g;
}

/// Value plus one gradient per layer maximum.
struct LipschitzRegResult {
	double value = 0.0;
	Vec grads;
};

/// gamma * max(sum_i log e_max_i, 0). The subgradient on the inactive side (sum <= 0) is zero.
inline LipschitzRegResult lipschitz_reg(std::span<const double> e_max, double gamma) {
	double sum = 0.0;
	for (double m : e_max) {
		if (!(m > 0.0))
			throw DomainError("lipschitz_reg: layer maximum " + std::to_string(m) + " is not positive");
		sum += std::log(m);
	}
	LipschitzRegResult out{0.0, Vec(e_max.size(), 0.0)};
	if (sum > 0.0) {
		out.value = gamma * sum;
		for (std::size_t i = 0; i < e_max.size(); ++i)
			out.grads[i] = gamma / e_max[i];
	}
	return out;
}

/// Value plus one gradient vector per layer, aligned with the input lists.
struct LayerwiseRegResult {
	double value = 0.0;
	std::vector<Vec> grads;
};

/// D-optimal design penalty: -gamma * sum_i sum_k log max(e^i_k, floor).
inline LayerwiseRegResult dopt_reg(const std::vector<Vec>& e_lists, double gamma) {
	LayerwiseRegResult out;
	out.grads.reserve(e_lists.size());
	for (const Vec& e : e_lists) {
		Vec g(e.size(), 0.0);
		for (std::size_t k = 0; k < e.size(); ++k) {
			if (e[k] >= kLogFloor) {
				out.value -= gamma * std::log(e[k]);
				g[k] = -gamma / e[k];
			} else {
				out.value -= gamma * std::log(kLogFloor);
			}
		}
		out.grads.push_back(std::move(g));
	}
	return out;
}

/// Density of y = 1 - min(|z|, 1), z ~ N(0, a^2), on the continuous part (0, 1]:
/// the half-normal density of |z| evaluated at 1 - y. The atom at y = 0 is not represented.
inline double reference_density(double y, double a) {
	if (!(y >= 0.0 && y <= 1.0))
		throw DomainError("reference_density: y = " + std::to_string(y) + " outside [0, 1]");
	if (!(a > 0.0))
		throw DomainError("reference_density: scale must be positive");
	const double t = 1.0 - y;
	return std::sqrt(2.0 / (std::numbers::pi * a * a)) * std::exp(-t * t / (2.0 * a * a));
}

/// Discretized divergence between the empirical spacing of each layer's singular values and the
/// reference density:
///   gamma * sum_i 1/(r_i-1) sum_k [ -log(r_i-1) - log(e_(k+1) - e_(k)) - log p(e_(k)) ]
/// over the ascending order statistics e_(1) <= ... <= e_(r_i). Gaps are floored at kGapFloor and
/// a floored gap contributes no gradient.
inline LayerwiseRegResult divergence_reg(const std::vector<Vec>& e_lists, double gamma, double a) {
	if (!(a > 0.0))
		throw DomainError("divergence_reg: scale must be positive");
	LayerwiseRegResult out;
	out.grads.reserve(e_lists.size());
	const double log_norm = 0.5 * std::log(2.0 / (std::numbers::pi * a * a));
	for (std::size_t layer = 0; layer < e_lists.size(); ++layer) {
		const Vec& e = e_lists[layer];
		const std::size_t r = e.size();
		if (r < 2)
			throw InvalidInput("divergence_reg: layer " + std::to_string(layer) + " has rank " + std::to_string(r) + " < 2");
		for (double x : e)
			if (!(x >= 0.0 && x <= 1.0))
				throw DomainError("divergence_reg: entry " + std::to_string(x) + " outside [0, 1]");

		std::vector<std::size_t> order(r);
		std::iota(order.begin(), order.end(), std::size_t{0});
		std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return e[i] < e[j]; });

		const double weight = gamma / static_cast<double>(r - 1);
		const double log_count = std::log(static_cast<double>(r - 1));
		Vec g(r, 0.0);
		double sum = 0.0;
		for (std::size_t k = 0; k + 1 < r; ++k) {
			const std::size_t lo = order[k];
			const std::size_t hi = order[k + 1];
			const double gap = e[hi] - e[lo];
			const double t = 1.0 - e[lo];
			// -log p(y) = -log_norm + (1-y)^2 / (2a^2)
			sum += -log_count - std::log(std::max(gap, kGapFloor)) - log_norm + t * t / (2.0 * a * a);
			if (gap > kGapFloor) {
				g[lo] += weight / gap;
				g[hi] -= weight / gap;
			}
			g[lo] -= weight * t / (a * a);
		}
		out.value += weight * sum;
		out.grads.push_back(std::move(g));
	}
	return out;
}

}  // namespace svdgan

#endif  // SVDGAN_SPECTRUM_HPP_
