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

#ifndef SVDGAN_EVAL_HPP_
#define SVDGAN_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "svdgan/error.hpp"
#include "svdgan/mat.hpp"
#include "svdgan/rng.hpp"
#include "svdgan/spectrum.hpp"
#include "svdgan/svdnet.hpp"

namespace svdgan {

struct RingSpec {
	std::size_t modes = 8;
	double radius = 2.0;
	double sigma = 0.02;
};

/// Mixture centers spaced evenly on a circle, the first on the positive x axis.
inline Mat ring_centers(std::size_t modes, double radius) {
	Mat c(modes, 2);
	for (std::size_t k = 0; k < modes; ++k) {
		const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modes);
		c(k, 0) = radius * std::cos(angle);
		c(k, 1) = radius * std::sin(angle);
	}
	return c;
}

/// Equal-weight isotropic Gaussian mixture on a circle, drawn from a caller-owned stream.
inline Mat sample_ring(std::size_t count, const RingSpec& spec, Rng& rng) {
	if (spec.modes < 1)
		throw InvalidInput("sample_ring: modes must be >= 1");
	if (!(spec.sigma > 0.0))
		throw InvalidInput("sample_ring: sigma must be > 0");
	const Mat centers = ring_centers(spec.modes, spec.radius);
	Mat out(count, 2);
	for (std::size_t i = 0; i < count; ++i) {
		const std::size_t k = rng.index(spec.modes);
		out(i, 0) = centers(k, 0) + spec.sigma * rng.gaussian();
		out(i, 1) = centers(k, 1) + spec.sigma * rng.gaussian();
	}
	return out;
}

inline Mat sample_ring(std::size_t count, std::size_t modes, double radius, double sigma, std::uint64_t seed) {
	Rng rng(seed);
	return sample_ring(count, RingSpec{modes, radius, sigma}, rng);
}

struct ModeCoverage {
	std::size_t modes_covered = 0;
	double hq_fraction = 0.0;
};

/// A sample is high quality when it lies within 3 sigma of its nearest center; a mode is covered
/// when it is the nearest center of at least max(1, 1% of the samples) high-quality samples.
inline ModeCoverage mode_coverage(const Mat& samples, const Mat& centers, double sigma) {
	if (samples.rows() == 0)
		throw InvalidInput("mode_coverage: no samples");
	if (samples.cols() != centers.cols())
		throw InvalidInput("mode_coverage: sample dim " + std::to_string(samples.cols()) + " vs center dim " +
				std::to_string(centers.cols()));
	std::vector<std::size_t> hits(centers.rows(), 0);
	std::size_t hq = 0;
	for (std::size_t i = 0; i < samples.rows(); ++i) {
		double best = std::numeric_limits<double>::infinity();
		std::size_t nearest = 0;
		for (std::size_t k = 0; k < centers.rows(); ++k) {
			double d2 = 0.0;
			for (std::size_t j = 0; j < samples.cols(); ++j) {
				const double diff = samples(i, j) - centers(k, j);
				d2 += diff * diff;
			}
			if (d2 < best) {
				best = d2;
				nearest = k;
			}
		}
		if (std::sqrt(best) <= 3.0 * sigma) {
			++hq;
			++hits[nearest];
		}
	}
	const double needed = std::max(1.0, 0.01 * static_cast<double>(samples.rows()));
	ModeCoverage out;
	for (std::size_t h : hits)
		if (static_cast<double>(h) >= needed)
			++out.modes_covered;
	out.hq_fraction = static_cast<double>(hq) / static_cast<double>(samples.rows());
	return out;
}

struct LayerSpectrum {
	Vec values;           ///< effective singular values, descending
	Vec normalized_rank;  ///< k / r for k = 1..r
	double decay_area = 0.0;
};

struct SpectrumReport {
	long iteration = 0;
	std::vector<LayerSpectrum> layers;
};

/// Mean of the values divided by the largest one (1 = flat spectrum).
inline double decay_area(std::span<const double> values) {
	if (values.empty())
		return 0.0;
	double top = values[0];
	double sum = 0.0;
	for (double v : values) {
		top = std::max(top, v);
		sum += v;
	}
	if (!(top > 0.0))
		return 0.0;
	return sum / static_cast<double>(values.size()) / top;
}

inline LayerSpectrum make_layer_spectrum(Vec values) {
	std::sort(values.begin(), values.end(), std::greater<>());
	LayerSpectrum ls;
	const double r = static_cast<double>(values.size());
	for (std::size_t k = 0; k < values.size(); ++k)
		ls.normalized_rank.push_back(static_cast<double>(k + 1) / r);
	ls.decay_area = decay_area(values);
	ls.values = std::move(values);
	return ls;
}

/// Sorted effective diagonals of every layer after the controller's normalization.
inline SpectrumReport spectrum_report(const DiscNet& net, const SpectrumController& ctl, long iteration) {
	SpectrumReport rep;
	rep.iteration = iteration;
	for (std::size_t i = 0; i < net.layers.size(); ++i)
		rep.layers.push_back(make_layer_spectrum(layer_effective_diagonal(net.layers[i], ctl, i)));
	return rep;
}

/// Mean decay-area over layers of rank >= 2 (rank-one layers are trivially flat).
inline double mean_decay_area(const SpectrumReport& rep) {
	double sum = 0.0;
	std::size_t count = 0;
	for (const auto& l : rep.layers)
		if (l.values.size() >= 2) {
			sum += l.decay_area;
			++count;
		}
	return count ? sum / static_cast<double>(count) : 1.0;
}

/// prod_i max_k |e'^i_k|: the Lipschitz bound for 1-Lipschitz activations when U, V are orthonormal.
inline double product_bound(const DiscNet& net, const SpectrumController& ctl) {
	double prod = 1.0;
	for (std::size_t i = 0; i < net.layers.size(); ++i) {
		double top = 0.0;
		for (double x : layer_effective_diagonal(net.layers[i], ctl, i))
			top = std::max(top, std::abs(x));
		prod *= top;
	}
	return prod;
}

struct LipschitzProbe {
	double empirical_max_ratio = 0.0;
	double product_bound = 0.0;
};

/// Largest |D(x) - D(y)| / |x - y| over random pairs, next to the product bound. Half of the pairs
/// are jittered reference points, half are uniform in the reference bounding box (padded by 10%).
/// Without reference points, pairs are standard normal.
inline LipschitzProbe lipschitz_probe(const DiscNet& net, const SpectrumController& ctl, std::size_t n_pairs,
		std::uint64_t seed, const Mat& reference = {}) {
	if (n_pairs < 1)
		throw InvalidInput("lipschitz_probe: need at least one pair");
	const std::size_t dim = net.input_dim();
	if (reference.rows() > 0 && reference.cols() != dim)
		throw InvalidInput("lipschitz_probe: reference dim " + std::to_string(reference.cols()) + " vs input dim " +
				std::to_string(dim));
	Rng rng(seed);
	Vec lo(dim, -1.0), hi(dim, 1.0);
	if (reference.rows() > 0) {
		for (std::size_t j = 0; j < dim; ++j) {
			lo[j] = hi[j] = reference(0, j);
			for (std::size_t i = 1; i < reference.rows(); ++i) {
				lo[j] = std::min(lo[j], reference(i, j));
				hi[j] = std::max(hi[j], reference(i, j));
			}
			const double pad = 0.1 * std::max(hi[j] - lo[j], 1e-3);
			lo[j] -= pad;
			hi[j] += pad;
		}
	}
	auto draw = [&](std::size_t i, std::span<double> out) {
		if (reference.rows() == 0) {
			for (double& x : out)
				x = rng.gaussian();
		} else if (i % 2 == 0) {
			auto r = reference.row(rng.index(reference.rows()));
			for (std::size_t j = 0; j < dim; ++j)
				out[j] = r[j] + 0.05 * (hi[j] - lo[j]) * rng.uniform(-1.0, 1.0);
		} else {
			for (std::size_t j = 0; j < dim; ++j)
				out[j] = rng.uniform(lo[j], hi[j]);
		}
	};

	Mat xy(2 * n_pairs, dim);
	Vec dist(n_pairs);
	for (std::size_t i = 0; i < n_pairs; ++i) {
		for (;;) {
			draw(i, xy.row(i));
			draw(i, xy.row(n_pairs + i));
			double d2 = 0.0;
			for (std::size_t j = 0; j < dim; ++j) {
				const double diff = xy(i, j) - xy(n_pairs + i, j);
				d2 += diff * diff;
			}
			dist[i] = std::sqrt(d2);
			if (dist[i] >= 1e-12)
				break;
		}
	}
	DiscNet probe = net;
	const Vec out = disc_forward(probe, xy, ctl);
	LipschitzProbe res;
	for (std::size_t i = 0; i < n_pairs; ++i)
		res.empirical_max_ratio = std::max(res.empirical_max_ratio, std::abs(out[i] - out[n_pairs + i]) / dist[i]);
	res.product_bound = product_bound(net, ctl);
	return res;
}

/// Every symbol of the excess-risk bound for an L-layer discriminator class.
struct GenBoundInput {
	double n = 1.0;      ///< sample count
	double d = 1.0;      ///< maximal layer width
	double L = 1.0;      ///< depth
	double b_x = 1.0;    ///< bound on the input norm
	Vec b_w;             ///< spectral-norm bound per layer
	double rho_phi = 1.0;
	double delta = 0.1;  ///< failure probability
	double epsilon = 0.0;

	double beta() const {
		double b = b_x;
		for (double w : b_w)
			b *= w;
		return b;
	}

	void validate() const {
		if (!(n > 0.0 && d > 0.0 && L > 0.0 && b_x > 0.0 && rho_phi > 0.0))
			throw DomainError("genbound: n, d, L, B_x and rho_phi must be positive");
		if (!(delta > 0.0 && delta < 1.0))
			throw DomainError("genbound: delta must lie in (0, 1)");
		if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
			throw DomainError("genbound: epsilon must be finite and >= 0");
		if (b_w.size() != static_cast<std::size_t>(L) || static_cast<double>(b_w.size()) != L)
			throw DomainError("genbound: need exactly L = " + std::to_string(L) + " layer bounds, got " +
					std::to_string(b_w.size()));
		for (double w : b_w)
			if (!(w > 0.0))
				throw DomainError("genbound: layer bounds must be positive");
		if (!std::isfinite(beta()))
			throw DomainError("genbound: beta overflows");
	}
};

/// 16 rho/n + 48 rho beta sqrt(d^2 L log(2 sqrt(d n) L beta)) / sqrt(n) + 12 rho beta sqrt(log(1/delta)/n) + eps,
/// beta = B_x prod B_W, natural logs.
inline double excess_gen_bound(const GenBoundInput& in) {
	in.validate();
	const double beta = in.beta();
	const double log_arg = 2.0 * std::sqrt(in.d * in.n) * in.L * beta;
	if (!(log_arg > 1.0))
		throw DomainError("genbound: log argument 2 sqrt(dn) L beta = " + std::to_string(log_arg) + " must exceed 1");
	const double rho = in.rho_phi;
	return 16.0 * rho / in.n + 48.0 * rho * beta * std::sqrt(in.d * in.d * in.L * std::log(log_arg)) / std::sqrt(in.n) +
			12.0 * rho * beta * std::sqrt(std::log(1.0 / in.delta) / in.n) + in.epsilon;
}

/// d^2 L log(1 + sqrt(d) L beta / eps): log of the sup-norm covering number of the discriminator class.
inline double log_covering_number(double d, double L, double beta, double eps) {
	if (!(eps > 0.0))
		throw DomainError("log_covering_number: eps must be positive");
	if (!(d > 0.0 && L > 0.0 && beta >= 0.0))
		throw DomainError("log_covering_number: d, L must be positive and beta nonnegative");
	return d * d * L * std::log1p(std::sqrt(d) * L * beta / eps);
}

}  // namespace svdgan

#endif  // SVDGAN_EVAL_HPP_
