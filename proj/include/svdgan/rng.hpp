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

#ifndef SVDGAN_RNG_HPP_
#define SVDGAN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "svdgan/mat.hpp"

namespace svdgan {

/// Seeded 64-bit Mersenne Twister with portable uniform and Gaussian draws.
/// std::normal_distribution is implementation-defined, so Gaussians come from Box-Muller
/// on raw engine output; the stream depends only on the seed.
class Rng {
public:
	explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

	std::uint64_t seed() const noexcept { return seed_; }

	std::uint64_t next_u64() { return engine_(); }

	/// Uniform in [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Uniform integer in [0, n).
	std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

	double gaussian() {
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		// 1 - u lies in (0, 1], keeping the log finite.
		const double u1 = 1.0 - uniform();
		const double u2 = uniform();
		const double radius = std::sqrt(-2.0 * std::log(u1));
		const double angle = 2.0 * std::numbers::pi * u2;
		spare_ = radius * std::sin(angle);
		has_spare_ = true;
		return radius * std::cos(angle);
	}

	Mat gaussian_mat(std::size_t rows, std::size_t cols, double stddev = 1.0) {
		Mat m(rows, cols);
		for (double& x : m.flat())
			x = stddev * gaussian();
		return m;
	}

	Vec gaussian_vec(std::size_t n, double stddev = 1.0) {
		Vec v(n);
		for (double& x : v)
			x = stddev * gaussian();
		return v;
	}

	/// Full engine state including the cached Box-Muller spare.
	std::string state() const {
		std::ostringstream os;
		os << engine_ << ' ' << has_spare_ << ' ';
		os.precision(17);
		os << std::hexfloat << spare_;
		return os.str();
	}

	void set_state(const std::string& s) {
		std::istringstream is(s);
		std::string spare;
		is >> engine_ >> has_spare_ >> spare;
		if (!is && !is.eof())
			throw InvalidInput("Rng: malformed state string");
		spare_ = std::strtod(spare.c_str(), nullptr);
	}

private:
	std::mt19937_64 engine_;
	std::uint64_t seed_;
	double spare_ = 0.0;
	bool has_spare_ = false;
};

}  // namespace svdgan

#endif  // SVDGAN_RNG_HPP_
