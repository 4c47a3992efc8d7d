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

#include "svdgan/linalg.hpp"
#include "svdgan/rng.hpp"

namespace svdgan {
namespace {

// Independent reference product.
Mat triple_loop(const Mat& a, const Mat& b) {
	Mat out(a.rows(), b.cols());
	for (std::size_t i = 0; i < a.rows(); ++i)
		for (std::size_t j = 0; j < b.cols(); ++j) {
			double s = 0.0;
			for (std::size_t k = 0; k < a.cols(); ++k)
				s += a(i, k) * b(k, j);
			out(i, j) = s;
		}
	return out;
}

double max_abs_diff(const Mat& a, const Mat& b) {
	double m = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i)
		m = std::max(m, std::abs(a.flat()[i] - b.flat()[i]));
	return m;
}

Mat reconstruct(const Svd& svd) { return matmul_nt(scale_cols(svd.u, svd.s), svd.v); }

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
	const Mat a{{1.5, -2.0, 3.0}, {0.25, 4.0, -1.0}};
	EXPECT_EQ(matmul(Mat::identity(2), a), a);
}

TEST(Matmul, HandArithmetic) {
	const Mat r = matmul(Mat{{1, 2}, {3, 4}}, Mat{{0}, {1}});
	EXPECT_EQ(r, (Mat{{2}, {4}}));
}

TEST(Matmul, MatchesTripleLoopOracle) {
	Rng rng(7);
	const Mat a = rng.gaussian_mat(5, 3), b = rng.gaussian_mat(3, 4);
	const Mat c = matmul(a, b);
	ASSERT_EQ(c.rows(), 5u);
	ASSERT_EQ(c.cols(), 4u);
	EXPECT_LE(max_abs_diff(c, triple_loop(a, b)), 1e-12);
	EXPECT_LE(max_abs_diff(matmul_tn(transpose(a), b), c), 1e-12);
	EXPECT_LE(max_abs_diff(matmul_nt(a, transpose(b)), c), 1e-12);
}

TEST(Matmul, DimensionMismatchRejected) {
	EXPECT_THROW(matmul(Mat(2, 3), Mat(2, 3)), InvalidInput);
	EXPECT_THROW(Mat(2, 2, Vec(3)), InvalidInput);
}

TEST(Qr, IdentityAndDiagonalScaling) {
	EXPECT_LE(max_abs_diff(qr_orthonormalize(Mat::identity(3)), Mat::identity(3)), 1e-15);
	const Mat q = qr_orthonormalize(Mat{{2, 0}, {0, 3}});
	EXPECT_NEAR(std::abs(q(0, 0)), 1.0, 1e-15);
	EXPECT_NEAR(std::abs(q(1, 1)), 1.0, 1e-15);
	EXPECT_EQ(q(0, 1), 0.0);
	EXPECT_EQ(q(1, 0), 0.0);
}

TEST(Qr, RandomTallMatrixIsOrthonormalAndSpanPreserved) {
	Rng rng(11);
	for (int trial = 0; trial < 20; ++trial) {
		const Mat a = rng.gaussian_mat(8, 3);
		const Mat q = qr_orthonormalize(a);
		EXPECT_LE(gram_deviation(q), 1e-12);
		// a lies in span(Q): Q Qᵀ a == a
		EXPECT_LE(max_abs_diff(matmul(q, matmul_tn(q, a)), a), 1e-12);
	}
}

TEST(Qr, IdempotentUpToSigns) {
	Rng rng(3);
	const Mat q = qr_orthonormalize(rng.gaussian_mat(6, 4));
	const Mat q2 = qr_orthonormalize(q);
	for (std::size_t j = 0; j < q.cols(); ++j) {
		const double sign = q(0, j) * q2(0, j) < 0 ? -1.0 : 1.0;
		for (std::size_t i = 0; i < q.rows(); ++i)
			EXPECT_NEAR(q2(i, j), sign * q(i, j), 1e-10);
	}
}

TEST(Qr, RankDeficientInputRejected) {
	EXPECT_THROW(qr_orthonormalize(Mat{{1, 2}, {2, 4}, {3, 6}}), DegeneracyError);
	EXPECT_THROW(qr_orthonormalize(Mat(3, 2)), DegeneracyError);
	EXPECT_THROW(qr_orthonormalize(Mat(2, 3, 1.0)), InvalidInput);
}

TEST(JacobiSvd, DiagonalMatrix) {
	const Svd svd = jacobi_svd(Mat{{3, 0}, {0, 1}});
	EXPECT_NEAR(svd.s[0], 3.0, 1e-15);
	EXPECT_NEAR(svd.s[1], 1.0, 1e-15);
}

TEST(JacobiSvd, ZeroMatrixHasZeroSpectrumAndOrthonormalFactors) {
	const Svd svd = jacobi_svd(Mat(4, 3));
	for (double s : svd.s)
		EXPECT_EQ(s, 0.0);
	EXPECT_LE(gram_deviation(svd.u), 1e-10);
	EXPECT_LE(gram_deviation(svd.v), 1e-10);
}

TEST(JacobiSvd, RandomReconstruction) {
	Rng rng(5);
	const Mat a = rng.gaussian_mat(6, 4);
	const Svd svd = jacobi_svd(a);
	EXPECT_LE(frobenius(reconstruct(svd) - a) / frobenius(a), 1e-10);
	EXPECT_LE(gram_deviation(svd.u), 1e-10);
	EXPECT_LE(gram_deviation(svd.v), 1e-10);
	for (std::size_t k = 0; k + 1 < svd.s.size(); ++k)
		EXPECT_GE(svd.s[k], svd.s[k + 1]);
	EXPECT_GE(svd.s.back(), 0.0);
}

TEST(JacobiSvd, RankDeficientReconstruction) {
	Rng rng(9);
	const Mat a = matmul(rng.gaussian_mat(7, 2), rng.gaussian_mat(2, 5));
	const Svd svd = jacobi_svd(a);
	EXPECT_LE(frobenius(reconstruct(svd) - a) / frobenius(a), 1e-10);
	EXPECT_LE(gram_deviation(svd.u), 1e-10);
	EXPECT_LE(svd.s[2], 1e-12 * svd.s[0]);
}

// Property: singular values of a and aᵀ agree, for random shapes.
TEST(JacobiSvd, TransposeInvariantSpectrum) {
	Rng rng(21);
	for (int trial = 0; trial < 30; ++trial) {
		const std::size_t m = 1 + rng.index(9), n = 1 + rng.index(9);
		const Mat a = rng.gaussian_mat(m, n);
		const Svd s1 = jacobi_svd(a);
		const Vec s2 = singular_values(transpose(a));
		ASSERT_EQ(s1.s.size(), std::min(m, n));
		for (std::size_t k = 0; k < s2.size(); ++k)
			EXPECT_NEAR(s1.s[k], s2[k], 1e-10);
		EXPECT_LE(frobenius(reconstruct(s1) - a), 1e-10 * frobenius(a));
	}
}

TEST(JacobiSvd, RejectsNonFinite) {
	EXPECT_THROW(jacobi_svd(Mat{{1, NAN}}), InvalidInput);
	EXPECT_THROW(jacobi_svd(Mat()), InvalidInput);
}

TEST(PowerIteration, AlignedStartIsExact) {
	const auto r = power_iter_sn(Mat{{3, 0}, {0, 1}}, {1.0, 0.0}, 1);
	EXPECT_DOUBLE_EQ(r.sigma, 3.0);
}

TEST(PowerIteration, OneStepFromDiagonalStart) {
	// v = (3, 1)/sqrt(10), w v = (9, 1)/sqrt(10), sigma = |w v| = sqrt(8.2)
	const auto r = power_iter_sn(Mat{{3, 0}, {0, 1}}, {std::sqrt(0.5), std::sqrt(0.5)}, 1);
	EXPECT_NEAR(r.sigma, std::sqrt(8.2), 1e-14);
	EXPECT_LT(r.sigma, 3.0);
}

TEST(PowerIteration, ConvergesToJacobiSigmaMax) {
	Rng rng(13);
	const Mat w = rng.gaussian_mat(10, 10);
	const double s1 = jacobi_svd(w).s[0];
	const auto r = power_iter_sn(w, rng.gaussian_vec(10), 50);
	EXPECT_LE(std::abs(r.sigma - s1), 1e-8 * s1);
}

// Property: the estimate never exceeds the top singular value, for any step count.
TEST(PowerIteration, NeverOverestimates) {
	Rng rng(17);
	for (int trial = 0; trial < 50; ++trial) {
		const std::size_t m = 2 + rng.index(8), n = 2 + rng.index(8);
		const Mat w = rng.gaussian_mat(m, n);
		const double s1 = jacobi_svd(w).s[0];
		const int steps = 1 + static_cast<int>(rng.index(10));
		EXPECT_LE(power_iter_sn(w, rng.gaussian_vec(m), steps).sigma, s1 + 1e-10);
	}
}

TEST(PowerIteration, OrthogonalStartNeedsRestart) {
	EXPECT_THROW(power_iter_sn(Mat{{1, 0}, {0, 0}}, {0.0, 1.0}, 1), RestartError);
	EXPECT_THROW(power_iter_sn(Mat{{1, 0}, {0, 1}}, {1.0}, 1), InvalidInput);
	EXPECT_THROW(power_iter_sn(Mat{{1, 0}, {0, 1}}, {1.0, 0.0}, 0), InvalidInput);
}

TEST(Rng, SameSeedSameStream) {
	Rng a(42), b(42);
	for (int i = 0; i < 100; ++i)
		EXPECT_EQ(a.gaussian(), b.gaussian());
	Rng c(1);
	c.gaussian();
	Rng d(0);
	d.set_state(c.state());
	EXPECT_EQ(c.gaussian(), d.gaussian());
	EXPECT_EQ(c.uniform(), d.uniform());
}

}  // namespace
}  // namespace svdgan
