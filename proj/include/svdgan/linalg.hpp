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

#ifndef SVDGAN_LINALG_HPP_
#define SVDGAN_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "svdgan/error.hpp"
#include "svdgan/mat.hpp"

namespace svdgan {

namespace detail {

// Subtract from x its projection onto each of the (orthonormal) rows of basis[0..count).
inline void project_out(std::span<double> x, const Mat& basis, std::size_t count) {
	for (std::size_t k = 0; k < count; ++k) {
		auto b = basis.row(k);
		const double c = dot(x, b);
		for (std::size_t i = 0; i < x.size(); ++i)
			x[i] -= c * b[i];
	}
}

// Fill rows [first, rows) of an n-row basis (orthonormal in rows [0, first)) with unit vectors orthogonal
// to everything before them.
inline void complete_basis(Mat& basis, std::size_t first) {
	const std::size_t dim = basis.cols();
	for (std::size_t k = first; k < basis.rows(); ++k) {
		Vec best;
		double best_norm = -1.0;
		for (std::size_t i = 0; i < dim; ++i) {
			Vec cand(dim, 0.0);
			cand[i] = 1.0;
			project_out(cand, basis, k);
			project_out(cand, basis, k);
			const double n = norm2(cand);
			if (n > best_norm) {
				best_norm = n;
				best = std::move(cand);
			}
		}
		auto row = basis.row(k);
		for (std::size_t i = 0; i < dim; ++i)
			row[i] = best[i] / best_norm;
	}
}

}  // namespace detail

/// Orthonormalizes the columns of a (rows >= cols) by modified Gram-Schmidt with one
/// reorthogonalization pass. Columns keep their orientation: the implied R has a positive diagonal.
inline Mat qr_orthonormalize(const Mat& a) {
	if (a.rows() < a.cols())
		throw InvalidInput("qr_orthonormalize: need rows >= cols, got " + shape_str(a));
	Mat cols = transpose(a);  // row k holds column k
	for (std::size_t k = 0; k < cols.rows(); ++k) {
		auto x = cols.row(k);
		const double original = norm2(x);
		detail::project_out(x, cols, k);
		detail::project_out(x, cols, k);
		const double n = norm2(x);
		if (!(n > 1e-12 * std::max(original, 1.0) && n > 1e-12))
			throw DegeneracyError("qr_orthonormalize: column " + std::to_string(k) + " is linearly dependent (pivot " +
					std::to_string(n) + ")");
		for (double& v : x)
			v /= n;
	}
	return transpose(cols);
}

/// Thin SVD a = U·diag(s)·Vᵀ with U (rows×k), V (cols×k), k = min(rows, cols), s descending.
struct Svd {
	Mat u;
	Vec s;
	Mat v;
};

inline constexpr int kJacobiMaxSweeps = 60;

/// One-sided (Hestenes) Jacobi SVD with cyclic sweeps.
inline Svd jacobi_svd(const Mat& a) {
	if (a.rows() == 0 || a.cols() == 0)
		throw InvalidInput("jacobi_svd: empty matrix");
	if (!a.all_finite())
		throw InvalidInput("jacobi_svd: non-finite entry");
	if (a.rows() < a.cols()) {
		Svd t = jacobi_svd(transpose(a));
		return {std::move(t.v), std::move(t.s), std::move(t.u)};
	}

	const std::size_t m = a.rows();
	const std::size_t n = a.cols();
	const double fro = frobenius(a);
	const double abs_tol = 1e-14 * fro * fro;
	const double rel_tol = std::max(1e-15, static_cast<double>(m) * std::numeric_limits<double>::epsilon());

	Mat w = transpose(a);          // row p = column p of the working matrix
	Mat vt = Mat::identity(n);     // row p = column p of V

	auto rotate = [](std::span<double> x, std::span<double> y, double c, double s) {
		for (std::size_t i = 0; i < x.size(); ++i) {
			const double xi = x[i];
			const double yi = y[i];
			x[i] = c * xi - s * yi;
			y[i] = s * xi + c * yi;
		}
	};

	bool converged = false;
	double off = 0.0;
	for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
		converged = true;
		off = 0.0;
		for (std::size_t p = 0; p + 1 < n; ++p) {
			for (std::size_t q = p + 1; q < n; ++q) {
				auto wp = w.row(p);
				auto wq = w.row(q);
				const double alpha = dot(wp, wp);
				const double beta = dot(wq, wq);
				const double gamma = dot(wp, wq);
				off = std::max(off, std::abs(gamma));
				if (std::abs(gamma) <= abs_tol || std::abs(gamma) <= rel_tol * std::sqrt(alpha * beta))
					continue;
				converged = false;
				const double zeta = (beta - alpha) / (2.0 * gamma);
				const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
				const double c = 1.0 / std::sqrt(1.0 + t * t);
				const double s = c * t;
				rotate(wp, wq, c, s);
				rotate(vt.row(p), vt.row(q), c, s);
			}
		}
	}
	if (!converged)
		throw NumericError("jacobi_svd: no convergence after " + std::to_string(kJacobiMaxSweeps) + " sweeps", off);

	Vec norms(n);
	for (std::size_t j = 0; j < n; ++j)
		norms[j] = norm2(w.row(j));
	std::vector<std::size_t> order(n);
	std::iota(order.begin(), order.end(), std::size_t{0});
	std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

	Svd out{Mat(m, n), Vec(n), Mat(n, n)};
	Mat ut(n, m);
	const double s_max = norms[order[0]];
	std::size_t good = 0;
	for (std::size_t k = 0; k < n; ++k) {
		const std::size_t j = order[k];
		out.s[k] = norms[j];
		auto vrow = vt.row(j);
		for (std::size_t i = 0; i < n; ++i)
			out.v(i, k) = vrow[i];
		if (norms[j] > 1e-12 * s_max && norms[j] > 0.0) {
			auto wrow = w.row(j);
			auto urow = ut.row(k);
			for (std::size_t i = 0; i < m; ++i)
				urow[i] = wrow[i] / norms[j];
			good = k + 1;
		}
	}
	// Columns of U for (numerically) zero singular values carry no information; complete them to an
	// orthonormal set.
	detail::complete_basis(ut, good);
	out.u = transpose(ut);
	return out;
}

inline Vec singular_values(const Mat& a) { return jacobi_svd(a).s; }

struct PowerIterResult {
	double sigma = 0.0;  ///< uᵀ w v, never above the true spectral norm
	Vec u;               ///< left vector to persist for the next call
	Vec v;               ///< matching right vector
};

/// Power iteration for the spectral norm as used by SN-GAN: each step sets v <- wᵀu/|wᵀu|,
/// u <- wv/|wv|, and the estimate is uᵀ w v.
inline PowerIterResult power_iter_sn(const Mat& w, Vec u, int steps) {
	if (u.size() != w.rows())
		throw InvalidInput("power_iter_sn: u has length " + std::to_string(u.size()) + ", w is " + shape_str(w));
	if (steps < 1)
		throw InvalidInput("power_iter_sn: steps must be >= 1");
	const double un = norm2(u);
	if (!(un > 0.0))
		throw InvalidInput("power_iter_sn: zero start vector");
	const double tiny = 1e-14 * std::max(frobenius(w), std::numeric_limits<double>::min());
	Vec v;
	for (int step = 0; step < steps; ++step) {
		v = matvec_t(w, u);
		const double vn = norm2(v);
		if (!(vn > tiny * norm2(u)))
			throw RestartError("power_iter_sn: w^T u vanished; reseed u");
		for (double& x : v)
			x /= vn;
		u = matvec(w, v);
		const double n = norm2(u);
		for (double& x : u)
			x /= n;
	}
	const Vec wv = matvec(w, v);
	return {dot(u, wv), std::move(u), std::move(v)};
}

}  // namespace svdgan

#endif  // SVDGAN_LINALG_HPP_
