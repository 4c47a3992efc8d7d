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

#ifndef SVDGAN_ERROR_HPP_
#define SVDGAN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace svdgan {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Shapes or arguments that violate an operation's precondition.
class InvalidInput : public Error {
public:
	using Error::Error;
};

/// Argument outside the mathematical domain of a function (log of a nonpositive value, y outside [0,1], ...).
class DomainError : public Error {
public:
	using Error::Error;
};

/// Rank-deficient input to an orthonormalization.
class DegeneracyError : public Error {
public:
	using Error::Error;
};

/// An iterative method failed to converge. Carries the last residual.
class NumericError : public Error {
public:
	NumericError(const std::string& what, double residual)
			: Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
	double residual() const noexcept { return residual_; }

private:
	double residual_;
};

/// Power iteration hit a vector orthogonal to the row space; the caller must reseed.
class RestartError : public Error {
public:
	using Error::Error;
};

/// Spectral normalization of an all-zero spectrum.
class ZeroSpectrumError : public Error {
public:
	using Error::Error;
};

/// Backward called without a cached forward pass.
class StateError : public Error {
public:
	using Error::Error;
};

/// A checkpoint or CSV file that cannot be parsed back into a valid object.
class CorruptArtifact : public Error {
public:
	using Error::Error;
};

/// Non-finite value encountered while training.
class TrainingFault : public Error {
public:
	TrainingFault(const std::string& what, long iteration) : Error(what), iteration_(iteration) {}
	long iteration() const noexcept { return iteration_; }

private:
	long iteration_;
};

}  // namespace svdgan

#endif  // SVDGAN_ERROR_HPP_
