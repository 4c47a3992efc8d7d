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

#ifndef SVDGAN_MAT_HPP_
#define SVDGAN_MAT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "svdgan/error.hpp"

namespace svdgan {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Mat {
public:
	Mat() = default;
	Mat(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
	Mat(std::size_t rows, std::size_t cols, Vec data) : rows_(rows), cols_(cols), data_(std::move(data)) {
		if (data_.size() != rows_ * cols_)
			throw InvalidInput("Mat: data length " + std::to_string(data_.size()) + " != " + std::to_string(rows_) + "x" +
					std::to_string(cols_));
	}
	Mat(std::initializer_list<std::initializer_list<double>> rows) : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
		data_.reserve(rows_ * cols_);
		for (const auto& r : rows) {
			if (r.size() != cols_)
				throw InvalidInput("Mat: ragged initializer");
			data_.insert(data_.end(), r.begin(), r.end());
		}
	}

	static Mat identity(std::size_t n) {
		Mat m(n, n);
		for (std::size_t i = 0; i < n; ++i)
			m(i, i) = 1.0;
		return m;
	}

	std::size_t rows() const noexcept { return rows_; }
	std::size_t cols() const noexcept { return cols_; }
	std::size_t size() const noexcept { return data_.size(); }

	double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
	double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

	std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
	std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

	Vec col(std::size_t c) const {
		Vec out(rows_);
		for (std::size_t r = 0; r < rows_; ++r)
			out[r] = (*this)(r, c);
		return out;
	}

	std::span<double> flat() noexcept { return data_; }
	std::span<const double> flat() const noexcept { return data_; }
	const Vec& data() const noexcept { return data_; }

	bool all_finite() const noexcept {
		return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
	}

	Mat& operator+=(const Mat& o) {
		check_same(o, "+=");
		for (std::size_t i = 0; i < data_.size(); ++i)
			data_[i] += o.data_[i];
		return *this;
	}
	Mat& operator-=(const Mat& o) {
		check_same(o, "-=");
		for (std::size_t i = 0; i < data_.size(); ++i)
			data_[i] -= o.data_[i];
		return *this;
	}
	Mat& operator*=(double s) noexcept {
		for (double& x : data_)
			x *= s;
		return *this;
	}

	friend Mat operator+(Mat a, const Mat& b) { return a += b; }
	friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
	friend Mat operator*(Mat a, double s) { return a *= s; }
	friend Mat operator*(double s, Mat a) { return a *= s; }

	friend bool operator==(const Mat&, const Mat&) = default;

private:
	void check_same(const Mat& o, const char* op) const {
		if (o.rows_ != rows_ || o.cols_ != cols_)
			throw InvalidInput(std::string("Mat ") + op + ": shape mismatch");
	}

	std::size_t rows_ = 0;
	std::size_t cols_ = 0;
	Vec data_;
};

inline std::string shape_str(const Mat& m) {
	return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// a·b. Throws InvalidInput when a.cols != b.rows.
inline Mat matmul(const Mat& a, const Mat& b) {
	if (a.cols() != b.rows())
		throw InvalidInput("matmul: " + shape_str(a) + " * " + shape_str(b));
	Mat out(a.rows(), b.cols());
	for (std::size_t i = 0; i < a.rows(); ++i) {
		auto orow = out.row(i);
		for (std::size_t k = 0; k < a.cols(); ++k) {
			const double aik = a(i, k);
			if (aik == 0.0)
				continue;
			auto brow = b.row(k);
			for (std::size_t j = 0; j < b.cols(); ++j)
				orow[j] += aik * brow[j];
		}
	}
	return out;
}

/// aᵀ·b without forming the transpose.
inline Mat matmul_tn(const Mat& a, const Mat& b) {
	if (a.rows() != b.rows())
		throw InvalidInput("matmul_tn: " + shape_str(a) + "^T * " + shape_str(b));
	Mat out(a.cols(), b.cols());
	for (std::size_t k = 0; k < a.rows(); ++k) {
		auto arow = a.row(k);
		auto brow = b.row(k);
		for (std::size_t i = 0; i < a.cols(); ++i) {
			const double aki = arow[i];
			if (aki == 0.0)
				continue;
			auto orow = out.row(i);
			for (std::size_t j = 0; j < b.cols(); ++j)
				orow[j] += aki * brow[j];
		}
	}
	return out;
}

/// a·bᵀ without forming the transpose.
inline Mat matmul_nt(const Mat& a, const Mat& b) {
	if (a.cols() != b.cols())
		throw InvalidInput("matmul_nt: " + shape_str(a) + " * " + shape_str(b) + "^T");
	Mat out(a.rows(), b.rows());
	for (std::size_t i = 0; i < a.rows(); ++i) {
		auto arow = a.row(i);
		for (std::size_t j = 0; j < b.rows(); ++j) {
			auto brow = b.row(j);
			double s = 0.0;
			for (std::size_t k = 0; k < a.cols(); ++k)
				s += arow[k] * brow[k];
			out(i, j) = s;
		}
	}
	return out;
}

inline Mat transpose(const Mat& a) {
	Mat t(a.cols(), a.rows());
	for (std::size_t i = 0; i < a.rows(); ++i)
		for (std::size_t j = 0; j < a.cols(); ++j)
			t(j, i) = a(i, j);
	return t;
}

/// a·v for a column vector v.
inline Vec matvec(const Mat& a, std::span<const double> v) {
	if (a.cols() != v.size())
		throw InvalidInput("matvec: " + shape_str(a) + " * vector of " + std::to_string(v.size()));
	Vec out(a.rows(), 0.0);
	for (std::size_t i = 0; i < a.rows(); ++i) {
		auto r = a.row(i);
		double s = 0.0;
		for (std::size_t k = 0; k < r.size(); ++k)
			s += r[k] * v[k];
		out[i] = s;
	}
	return out;
}

/// aᵀ·v.
inline Vec matvec_t(const Mat& a, std::span<const double> v) {
	if (a.rows() != v.size())
		throw InvalidInput("matvec_t: " + shape_str(a) + "^T * vector of " + std::to_string(v.size()));
	Vec out(a.cols(), 0.0);
	for (std::size_t i = 0; i < a.rows(); ++i) {
		auto r = a.row(i);
		for (std::size_t k = 0; k < r.size(); ++k)
			out[k] += r[k] * v[i];
	}
	return out;
}

/// a·diag(d): scales column j by d[j].
inline Mat scale_cols(Mat a, std::span<const double> d) {
	if (a.cols() != d.size())
		throw InvalidInput("scale_cols: " + shape_str(a) + " with diagonal of " + std::to_string(d.size()));
	for (std::size_t i = 0; i < a.rows(); ++i) {
		auto r = a.row(i);
		for (std::size_t j = 0; j < r.size(); ++j)
			r[j] *= d[j];
	}
	return a;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i)
		s += a[i] * b[i];
	return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius(const Mat& a) { return norm2(a.flat()); }

/// Frobenius inner product ⟨a, b⟩ = tr(aᵀb).
inline double inner(const Mat& a, const Mat& b) {
	if (a.rows() != b.rows() || a.cols() != b.cols())
		throw InvalidInput("inner: " + shape_str(a) + " vs " + shape_str(b));
	return dot(a.flat(), b.flat());
}

/// ‖aᵀa − I‖_F.
inline double gram_deviation(const Mat& a) {
	Mat g = matmul_tn(a, a);
	for (std::size_t i = 0; i < g.rows(); ++i)
		g(i, i) -= 1.0;
	return frobenius(g);
}

/// Outer product u vᵀ.
inline Mat outer(std::span<const double> u, std::span<const double> v) {
	Mat out(u.size(), v.size());
	for (std::size_t i = 0; i < u.size(); ++i)
		for (std::size_t j = 0; j < v.size(); ++j)
			out(i, j) = u[i] * v[j];
	return out;
}

inline Mat vstack(const Mat& top, const Mat& bottom) {
	if (top.cols() != bottom.cols())
		throw InvalidInput("vstack: " + shape_str(top) + " over " + shape_str(bottom));
	Vec d(top.data());
	d.insert(d.end(), bottom.data().begin(), bottom.data().end());
	return Mat(top.rows() + bottom.rows(), top.cols(), std::move(d));
}

}  // namespace svdgan

#endif  // SVDGAN_MAT_HPP_
