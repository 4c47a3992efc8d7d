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

#include <cmath>

#include <gtest/gtest.h>

#include "svdgan/gradcheck.hpp"
#include "svdgan/linalg.hpp"
#include "svdgan/optim.hpp"
#include "svdgan/svdnet.hpp"

namespace svdgan {
namespace {

SvdLayer identity_layer(std::size_t n) {
	return {Mat::identity(n), Vec(n, 1.0), Mat::identity(n), Vec(n, 0.0), {}};
}

// Independent forward: one row at a time, weights summed entry by entry from the factors.
Vec fused_forward(const DiscNet& net, const Mat& x, const SpectrumController& ctl) {
	Vec logits;
	for (std::size_t r = 0; r < x.rows(); ++r) {
		Vec h(x.row(r).begin(), x.row(r).end());
		for (std::size_t i = 0; i < net.layers.size(); ++i) {
			const SvdLayer& l = net.layers[i];
			Vec diag = l.e;
			if (ctl.normalizes()) {
				double top = diag[0];
				for (double d : diag)
					top = std::max(top, d);
				for (double& d : diag)
					d /= top;
			}
			Vec next(l.d_out());
			for (std::size_t j = 0; j < l.d_out(); ++j) {
				double s = l.bias[j];
				for (std::size_t a = 0; a < l.d_in(); ++a)
					for (std::size_t k = 0; k < l.rank(); ++k)
						s += h[a] * l.u(a, k) * diag[k] * l.v(j, k);
				next[j] = (i + 1 < net.layers.size() && s < 0) ? 0.1 * s : s;
			}
			h = std::move(next);
		}
		logits.push_back(h[0]);
	}
	return logits;
}

TEST(InitDisc, RankRule) {
	const DiscNet a = init_disc({2, 4, 1}, 3);
	ASSERT_EQ(a.layers.size(), 2u);
	EXPECT_EQ(a.layers[0].rank(), 2u);
	EXPECT_EQ(a.layers[1].rank(), 1u);
	const DiscNet b = init_disc({8, 8, 8, 1}, 4);
	EXPECT_EQ(b.layers[0].rank(), 8u);
	EXPECT_EQ(b.layers[1].rank(), 8u);
	EXPECT_EQ(b.layers[2].rank(), 1u);
	for (const auto& l : b.layers) {
		for (double e : l.e)
			EXPECT_EQ(e, 1.0);
		for (double x : l.bias)
			EXPECT_EQ(x, 0.0);
	}
}

TEST(InitDisc, OrthonormalFactorsForAnySeed) {
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		const DiscNet net = init_disc({5, 7, 3, 1}, seed);
		for (const auto& l : net.layers) {
			EXPECT_LE(gram_deviation(l.u), 1e-12);
			EXPECT_LE(gram_deviation(l.v), 1e-12);
		}
	}
	EXPECT_EQ(init_disc({3, 4, 1}, 9).layers[0].u, init_disc({3, 4, 1}, 9).layers[0].u);
}

TEST(InitDisc, RejectsBadDims) {
	EXPECT_THROW(init_disc({2, 0, 1}, 0), InvalidInput);
	EXPECT_THROW(init_disc({2, 3, 2}, 0), InvalidInput);
	EXPECT_THROW(init_disc({1}, 0), InvalidInput);
}

TEST(EffectiveWeight, IdentityFactors) {
	const SvdLayer l = identity_layer(3);
	EXPECT_EQ(effective_weight(l, SpectrumController::make(ControllerTag::Orthogonal)), Mat::identity(3));
}

TEST(EffectiveWeight, SingularValuesAreTheEffectiveDiagonal) {
	Rng rng(2);
	for (ControllerTag tag : {ControllerTag::SpectralNormSVD, ControllerTag::LipschitzReg}) {
		SvdLayer l = init_svd_layer(6, 4, rng);
		l.e = {0.3, 1.7, 0.9, 1.2};
		const auto ctl = SpectrumController::make(tag);
		Vec expect = layer_effective_diagonal(l, ctl);
		std::sort(expect.begin(), expect.end(), std::greater<>());
		const Vec s = singular_values(effective_weight(l, ctl));
		for (std::size_t k = 0; k < s.size(); ++k)
			EXPECT_NEAR(s[k], expect[k], 1e-10);
	}
}

TEST(EffectiveWeight, SpectralNormalizationDividesByMax) {
	SvdLayer l = identity_layer(2);
	l.e = {2.0, 0.5};
	const Mat w = effective_weight(l, SpectrumController::make(ControllerTag::SpectralNormSVD));
	EXPECT_DOUBLE_EQ(w(0, 0), 1.0);
	EXPECT_DOUBLE_EQ(w(1, 1), 0.25);
}

TEST(LayerForward, IdentityAndRowSelection) {
	const auto ctl = SpectrumController::make(ControllerTag::LipschitzReg);
	SvdLayer l = identity_layer(2);
	const Mat h{{1.5, -2.0}, {0.3, 0.7}};
	EXPECT_EQ(layer_forward(l, h, ctl), h);

	// U = I, e = 1 and V chosen so that W = [[a, b], [c, d]]: V = Wᵀ.
	l.v = Mat{{1.0, 3.0}, {2.0, 4.0}};
	l.bias = {0.5, -0.5};
	const Mat s = layer_forward(l, Mat{{1.0, 0.0}}, ctl);
	EXPECT_DOUBLE_EQ(s(0, 0), 1.0 + 0.5);
	EXPECT_DOUBLE_EQ(s(0, 1), 2.0 - 0.5);
}

TEST(LayerForward, MatchesCompositionOracle) {
	Rng rng(8);
	SvdLayer l = detail::random_layer(5, 3, rng);
	const auto ctl = SpectrumController::make(ControllerTag::SpectralNormSVD);
	const Mat h = rng.gaussian_mat(4, 5);
	const Mat s = layer_forward(l, h, ctl);
	Mat expect = matmul(h, effective_weight(l, ctl));
	for (std::size_t i = 0; i < expect.rows(); ++i)
		for (std::size_t j = 0; j < expect.cols(); ++j)
			expect(i, j) += l.bias[j];
	EXPECT_LE(frobenius(s - expect), 1e-12);
	EXPECT_THROW(layer_forward(l, Mat(2, 3), ctl), InvalidInput);
}

TEST(LayerBackward, IdentityFactors) {
	const auto ctl = SpectrumController::make(ControllerTag::Orthogonal);
	SvdLayer l = identity_layer(3);
	Rng rng(1);
	const Mat h = rng.gaussian_mat(4, 3), gs = rng.gaussian_mat(4, 3);
	layer_forward(l, h, ctl);
	const LayerBackward b = layer_backward(l, gs, ctl);
	const Mat gw = matmul_tn(h, gs);
	EXPECT_LE(frobenius(b.g_input - gs), 1e-14);
	EXPECT_LE(frobenius(b.grad.u - gw), 1e-14);
	for (std::size_t k = 0; k < 3; ++k)
		EXPECT_NEAR(b.grad.e[k], gw(k, k), 1e-14);
}

TEST(LayerBackward, MatchesFiniteDifferencesForEveryController) {
	for (const auto& [tag, name] : kControllerNames) {
		Rng rng(31);
		DiscNet holder;
		holder.layers.push_back(detail::random_layer(4, 6, rng));
		SpectrumController ctl = detail::prepared_controller(tag, holder);
		SvdLayer& l = holder.layers[0];
		Mat h = rng.gaussian_mat(3, 4);
		const Mat probe = rng.gaussian_mat(3, 6);
		auto f = [&] {
			SvdLayer c = l;
			return dot(layer_forward(c, h, ctl).flat(), probe.flat());
		};
		layer_forward(l, h, ctl);
		const LayerBackward b = layer_backward(l, probe, ctl);
		EXPECT_LE(relative_error(b.g_input.flat(), finite_difference(h.flat(), f)), 1e-6) << name;
		EXPECT_LE(relative_error(b.grad.u.flat(), finite_difference(l.u.flat(), f)), 1e-6) << name;
		EXPECT_LE(relative_error(b.grad.v.flat(), finite_difference(l.v.flat(), f)), 1e-6) << name;
		EXPECT_LE(relative_error(b.grad.e, finite_difference(l.e, f)), 1e-6) << name;
		EXPECT_LE(relative_error(b.grad.bias, finite_difference(l.bias, f)), 1e-6) << name;
	}
}

TEST(LayerBackward, BiasGradientIsLinearInBatch) {
	const auto ctl = SpectrumController::make(ControllerTag::LipschitzReg);
	Rng rng(4);
	SvdLayer l = detail::random_layer(3, 2, rng);
	const Vec row = rng.gaussian_vec(3);
	const Vec g = rng.gaussian_vec(2);
	layer_forward(l, Mat(1, 3, row), ctl);
	const Vec single = layer_backward(l, Mat(1, 2, g), ctl).grad.bias;
	Vec rows3 = row, g3 = g;
	for (int i = 0; i < 2; ++i) {
		rows3.insert(rows3.end(), row.begin(), row.end());
		g3.insert(g3.end(), g.begin(), g.end());
	}
	layer_forward(l, Mat(3, 3, rows3), ctl);
	const Vec triple = layer_backward(l, Mat(3, 2, g3), ctl).grad.bias;
	for (std::size_t j = 0; j < 2; ++j)
		EXPECT_NEAR(triple[j], 3.0 * single[j], 1e-14);
}

TEST(LayerBackward, RequiresForward) {
	const SvdLayer l = identity_layer(2);
	EXPECT_THROW(layer_backward(l, Mat(1, 2), SpectrumController::make(ControllerTag::Orthogonal)), StateError);
}

TEST(OrthPenalty, ZeroOnOrthonormalFactors) {
	Rng rng(6);
	const SvdLayer l = init_svd_layer(5, 3, rng);
	const OrthPenalty p = orth_penalty(l);
	EXPECT_LE(p.value, 1e-24);
	EXPECT_LE(frobenius(p.g_u), 1e-12);
	EXPECT_LE(frobenius(p.g_v), 1e-12);
}

TEST(OrthPenalty, HandEvaluation) {
	SvdLayer l = identity_layer(2);
	l.u = Mat{{1, 0}, {0, 2}};
	const OrthPenalty p = orth_penalty(l);
	EXPECT_DOUBLE_EQ(p.value, 9.0);
	EXPECT_EQ(p.g_u, (Mat{{0, 0}, {0, 24}}));
	EXPECT_EQ(frobenius(p.g_v), 0.0);
	Vec fd = finite_difference(l.u.flat(), [&] { return orth_penalty(l).value; });
	EXPECT_LE(relative_error(p.g_u.flat(), fd), 1e-6);
}

TEST(OrthPenalty, FiniteDifferencesOnRandomLayers) {
	Rng rng(12);
	for (int trial = 0; trial < 5; ++trial) {
		SvdLayer l = detail::random_layer(2 + rng.index(5), 2 + rng.index(5), rng);
		const OrthPenalty p = orth_penalty(l);
		auto f = [&] { return orth_penalty(l).value; };
		EXPECT_LE(relative_error(p.g_u.flat(), finite_difference(l.u.flat(), f)), 1e-6);
		EXPECT_LE(relative_error(p.g_v.flat(), finite_difference(l.v.flat(), f)), 1e-6);
	}
}

// One Adam step on the penalty alone lowers it.
TEST(OrthPenalty, AdamStepDecreasesPenalty) {
	Rng rng(14);
	for (int trial = 0; trial < 10; ++trial) {
		SvdLayer l = detail::random_layer(6, 4, rng);
		const OrthPenalty p = orth_penalty(l);
		ASSERT_GT(p.value, 1e-8);
		AdamState st{{1e-3, 0.5, 0.999, 1e-8}, {}, {}, 0};
		std::vector<std::span<double>> params{l.u.flat(), l.v.flat()};
		std::vector<std::span<const double>> grads{p.g_u.flat(), p.g_v.flat()};
		adam_step(params, grads, st);
		EXPECT_LT(orth_penalty(l).value, p.value);
	}
}

TEST(DiscForward, SingleIdentityLayer) {
	DiscNet net;
	net.layers.push_back(identity_layer(1));
	const Mat x{{0.5}, {-2.0}, {3.0}};
	const Vec logits = disc_forward(net, x, SpectrumController::make(ControllerTag::Orthogonal));
	EXPECT_EQ(logits, (Vec{0.5, -2.0, 3.0}));
}

TEST(DiscForward, ZeroInputGivesZeroLogits) {
	DiscNet net = init_disc({3, 6, 4, 1}, 2);
	for (double l : disc_forward(net, Mat(5, 3), SpectrumController::make(ControllerTag::SpectralNormSVD)))
		EXPECT_EQ(l, 0.0);
}

TEST(DiscForward, MatchesFusedOracle) {
	Rng rng(15);
	for (ControllerTag tag : {ControllerTag::LipschitzReg, ControllerTag::SpectralNormSVD, ControllerTag::DOptimalPlusSN}) {
		DiscNet net = detail::random_disc({3, 5, 4, 1}, rng);
		const auto ctl = SpectrumController::make(tag);
		const Mat x = rng.gaussian_mat(7, 3);
		const Vec a = disc_forward(net, x, ctl);
		const Vec b = fused_forward(net, x, ctl);
		for (std::size_t i = 0; i < a.size(); ++i)
			EXPECT_NEAR(a[i], b[i], 1e-12);
	}
}

TEST(DiscBackward, ZeroUpstreamGivesZeroGradients) {
	Rng rng(16);
	DiscNet net = detail::random_disc({3, 4, 1}, rng);
	const auto ctl = SpectrumController::make(ControllerTag::SpectralNormSVD);
	disc_forward(net, rng.gaussian_mat(4, 3), ctl);
	const DiscGrad g = disc_backward(net, Vec(4, 0.0), ctl);
	for (const auto& l : g.layers) {
		EXPECT_EQ(frobenius(l.u), 0.0);
		EXPECT_EQ(frobenius(l.v), 0.0);
		EXPECT_EQ(norm2(l.e), 0.0);
		EXPECT_EQ(norm2(l.bias), 0.0);
	}
}

TEST(DiscBackward, EndToEndFiniteDifferences) {
	for (const auto& [tag, name] : kControllerNames) {
		Rng rng(40);
		DiscNet net = detail::random_disc({3, 6, 5, 1}, rng);
		SpectrumController ctl = detail::prepared_controller(tag, net);
		const Mat x = rng.gaussian_mat(5, 3);
		const Vec probe = rng.gaussian_vec(5);
		auto f = [&] {
			DiscNet c = net;
			return dot(disc_forward(c, x, ctl), probe);
		};
		disc_forward(net, x, ctl);
		const DiscGrad g = disc_backward(net, probe, ctl);
		for (std::size_t i = 0; i < net.layers.size(); ++i) {
			auto& l = net.layers[i];
			EXPECT_LE(relative_error(g.layers[i].u.flat(), finite_difference(l.u.flat(), f)), 1e-6) << name << " U" << i;
			EXPECT_LE(relative_error(g.layers[i].v.flat(), finite_difference(l.v.flat(), f)), 1e-6) << name << " V" << i;
			EXPECT_LE(relative_error(g.layers[i].e, finite_difference(l.e, f)), 1e-6) << name << " e" << i;
			EXPECT_LE(relative_error(g.layers[i].bias, finite_difference(l.bias, f)), 1e-6) << name << " b" << i;
		}
	}
}

TEST(DiscBackward, LinearInUpstreamGradient) {
	Rng rng(18);
	DiscNet net = detail::random_disc({2, 5, 1}, rng);
	const auto ctl = SpectrumController::make(ControllerTag::DOptimalPlusSN);
	disc_forward(net, rng.gaussian_mat(3, 2), ctl);
	const Vec g = rng.gaussian_vec(3);
	Vec g2 = g;
	for (double& x : g2)
		x *= 2.0;
	const DiscGrad a = disc_backward(net, g, ctl), b = disc_backward(net, g2, ctl);
	for (std::size_t i = 0; i < a.layers.size(); ++i) {
		EXPECT_LE(frobenius(b.layers[i].u - a.layers[i].u * 2.0), 1e-14);
		EXPECT_LE(frobenius(b.layers[i].v - a.layers[i].v * 2.0), 1e-14);
		for (std::size_t k = 0; k < a.layers[i].e.size(); ++k)
			EXPECT_NEAR(b.layers[i].e[k], 2.0 * a.layers[i].e[k], 1e-14);
	}
}

TEST(DiscBackward, RequiresForward) {
	const DiscNet net = init_disc({2, 3, 1}, 0);
	EXPECT_THROW(disc_backward(net, Vec{1.0}, SpectrumController::make(ControllerTag::Orthogonal)), StateError);
}

TEST(DiscForward, SecondForwardOverwritesCache) {
	DiscNet net = init_disc({2, 3, 1}, 0);
	const auto ctl = SpectrumController::make(ControllerTag::Orthogonal);
	disc_forward(net, Mat(4, 2, 1.0), ctl);
	disc_forward(net, Mat(2, 2, 1.0), ctl);
	EXPECT_EQ(net.layers[0].cache.input.rows(), 2u);
	EXPECT_THROW(disc_backward(net, Vec(4, 1.0), ctl), InvalidInput);
}

TEST(Generator, IdentityLayerPassesThrough) {
	GenNet g;
	g.layers.push_back({Mat::identity(2), Vec(2, 0.0)});
	const Mat z{{0.5, -1.0}, {2.0, 3.0}};
	EXPECT_EQ(gen_forward(g, z), z);
}

TEST(Generator, BackwardMatchesFiniteDifferences) {
	Rng rng(19);
	GenNet g = init_gen({3, 5, 2}, 1);
	for (auto& l : g.layers)
		for (double& b : l.bias)
			b = 0.2 * rng.gaussian();
	Mat z = rng.gaussian_mat(4, 3);
	const Mat probe = rng.gaussian_mat(4, 2);
	auto f = [&] {
		GenNet c = g;
		return dot(gen_forward(c, z).flat(), probe.flat());
	};
	gen_forward(g, z);
	const GenGrad grad = gen_backward(g, probe);
	EXPECT_LE(relative_error(grad.input.flat(), finite_difference(z.flat(), f)), 1e-6);
	for (std::size_t i = 0; i < g.layers.size(); ++i) {
		EXPECT_LE(relative_error(grad.layers[i].w.flat(), finite_difference(g.layers[i].w.flat(), f)), 1e-6);
		EXPECT_LE(relative_error(grad.layers[i].bias, finite_difference(g.layers[i].bias, f)), 1e-6);
	}
}

TEST(Generator, ZeroUpstreamGivesZeroGradients) {
	Rng rng(20);
	GenNet g = init_gen({2, 4, 2}, 3);
	gen_forward(g, rng.gaussian_mat(3, 2));
	const GenGrad grad = gen_backward(g, Mat(3, 2));
	for (const auto& l : grad.layers)
		EXPECT_EQ(frobenius(l.w), 0.0);
	EXPECT_THROW(gen_backward(init_gen({2, 2}, 0), Mat(1, 2)), StateError);
}

// Exact-SVD property: with re-orthonormalized factors, ‖W‖₂ = max e'.
TEST(Properties, ReorthonormalizedFactorsRealizeTheSvd) {
	Rng rng(22);
	for (int trial = 0; trial < 10; ++trial) {
		SvdLayer l = detail::random_layer(2 + rng.index(6), 2 + rng.index(6), rng);
		reorthonormalize(l);
		const auto ctl = SpectrumController::make(trial % 2 ? ControllerTag::SpectralNormSVD : ControllerTag::LipschitzReg);
		Vec expect = layer_effective_diagonal(l, ctl);
		std::sort(expect.begin(), expect.end(), std::greater<>());
		const Vec s = singular_values(effective_weight(l, ctl));
		for (std::size_t k = 0; k < s.size(); ++k)
			EXPECT_NEAR(s[k], expect[k], 1e-10);
	}
}

// Normalization is degree-0 homogeneous in e.
TEST(Properties, SpectralNormalizationIgnoresScale) {
	Rng rng(23);
	DiscNet net = detail::random_disc({3, 5, 1}, rng);
	const auto ctl = SpectrumController::make(ControllerTag::SpectralNormSVD);
	const Mat x = rng.gaussian_mat(6, 3);
	const Vec before = disc_forward(net, x, ctl);
	for (double c : {0.01, 3.0, 250.0}) {
		DiscNet scaled = net;
		for (double& e : scaled.layers[0].e)
			e *= c;
		const Vec after = disc_forward(scaled, x, ctl);
		for (std::size_t i = 0; i < before.size(); ++i)
			EXPECT_NEAR(after[i], before[i], 1e-12 * (1.0 + std::abs(before[i])));
	}
}

}  // namespace
}  // namespace svdgan
