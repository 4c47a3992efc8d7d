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

#ifndef SVDGAN_TRAIN_HPP_
#define SVDGAN_TRAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "svdgan/error.hpp"
#include "svdgan/eval.hpp"
#include "svdgan/optim.hpp"
#include "svdgan/rng.hpp"
#include "svdgan/spectrum.hpp"
#include "svdgan/svdnet.hpp"

namespace svdgan {

struct TrainConfig {
	ControllerTag controller = ControllerTag::DOptimalPlusSN;
	double gamma = kDefaultGamma;
	double ref_scale = kDefaultRefScale;
	double lambda = 10.0;
	LossFamily loss = LossFamily::GanLog;
	GenLossForm gen_loss = GenLossForm::LogD;
	int n_dis = 1;
	std::size_t batch_size = 64;
	long iterations = 1000;
	AdamConfig adam_disc{2e-4, 0.5, 0.999, 1e-8};
	AdamConfig adam_gen{2e-4, 0.5, 0.999, 1e-8};
	std::size_t z_dim = 2;
	std::vector<std::size_t> disc_hidden{32, 32};
	std::vector<std::size_t> gen_hidden{32, 32};
	RingSpec data;
	std::uint64_t seed = 0;
	long eval_interval = 500;
	std::size_t eval_samples = 2000;
	std::size_t lip_pairs = 10000;

	std::vector<std::size_t> disc_dims() const {
		std::vector<std::size_t> d{2};
		d.insert(d.end(), disc_hidden.begin(), disc_hidden.end());
		d.push_back(1);
		return d;
	}
	std::vector<std::size_t> gen_dims() const {
		std::vector<std::size_t> d{z_dim};
		d.insert(d.end(), gen_hidden.begin(), gen_hidden.end());
		d.push_back(2);
		return d;
	}

	void validate() const {
		if (!(lambda >= 0.0))
			throw InvalidInput("lambda must be >= 0");
		if (n_dis < 1)
			throw InvalidInput("n_dis must be >= 1");
		if (batch_size < 1)
			throw InvalidInput("batch_size must be >= 1");
		if (iterations < 0)
			throw InvalidInput("iterations must be >= 0");
		if (eval_interval < 1)
			throw InvalidInput("eval_interval must be >= 1");
		if (z_dim < 1)
			throw InvalidInput("z_dim must be >= 1");
		if (eval_samples < 1 || lip_pairs < 1)
			throw InvalidInput("eval_samples and lip_pairs must be >= 1");
		SpectrumController::make(controller, gamma, ref_scale);
		check_dims(disc_dims(), "disc_hidden");
		check_dims(gen_dims(), "gen_hidden");
		if (controller == ControllerTag::DivergencePlusSC)
			for (std::size_t i = 0; i + 1 < disc_dims().size() - 1; ++i)
				if (std::min(disc_dims()[i], disc_dims()[i + 1]) < 2)
					throw InvalidInput("divergence controller needs every hidden layer to have rank >= 2");
	}
};

/// One row of metrics.csv.
struct MetricRow {
	long iter = 0;
	std::size_t modes_covered = 0;
	double hq_fraction = 0.0;
	double lip_empirical = 0.0;
	double lip_bound = 0.0;
	double orth_penalty_max = 0.0;
	double reg_value = 0.0;
	double disc_loss = 0.0;
	double gen_loss = 0.0;
};

/// Everything that evolves during a run.
struct TrainState {
	DiscNet disc;
	GenNet gen;
	SpectrumController ctl;
	AdamState adam_disc;
	AdamState adam_gen;
	Rng rng;
	long iteration = 0;
	double last_disc_loss = 0.0;
	double last_gen_loss = 0.0;
};

inline TrainState init_train_state(const TrainConfig& cfg) {
	cfg.validate();
	TrainState s{init_disc(cfg.disc_dims(), cfg.seed),
			init_gen(cfg.gen_dims(), cfg.seed ^ 0x6a09e667f3bcc908ULL),
			SpectrumController::make(cfg.controller, cfg.gamma, cfg.ref_scale),
			AdamState{cfg.adam_disc, {}, {}, 0},
			AdamState{cfg.adam_gen, {}, {}, 0},
			Rng(cfg.seed ^ 0xbb67ae8584caa73bULL),
			0, 0.0, 0.0};
	return s;
}

/// Drops forward caches so snapshots only carry parameters.
inline void clear_caches(TrainState& s) {
	for (auto& l : s.disc.layers)
		l.cache = {};
	s.disc.pre_activations.clear();
	s.gen.inputs.clear();
	s.gen.pre_activations.clear();
}

namespace detail {

inline void enforce_constraint(DiscNet& net, const SpectrumController& ctl) {
	for (auto& l : net.layers) {
		if (ctl.clips())
			l.e = project_clip(std::move(l.e));
		else if (ctl.fixes_diagonal())
			l.e.assign(l.rank(), 1.0);
	}
}

inline void check_finite(std::span<const double> xs, const char* what, long iteration) {
	for (double x : xs)
		if (!std::isfinite(x))
			throw TrainingFault(std::string("non-finite ") + what + " at iteration " + std::to_string(iteration), iteration);
}

}  // namespace detail

/// One ascent step on f_D - lambda L_orth - gamma R(E) (realized as descent on its negation).
inline void discriminator_step(TrainState& s, const TrainConfig& cfg) {
	singular_value_update(s.disc, s.ctl);
	const std::size_t m = cfg.batch_size;
	Mat real = sample_ring(m, cfg.data, s.rng);
	Mat z = s.rng.gaussian_mat(m, cfg.z_dim);
	Mat fake = gen_forward(s.gen, z);
	const Vec logits = disc_forward(s.disc, vstack(real, fake), s.ctl);
	detail::check_finite(logits, "discriminator logits", s.iteration);
	std::span<const double> lr(logits.data(), m);
	std::span<const double> lf(logits.data() + m, m);
	const DiscLoss loss = cfg.loss == LossFamily::GanLog ? disc_loss_ganlog(lr, lf) : disc_loss_hinge(lr, lf);
	s.last_disc_loss = loss.value;

	Vec g_logits(2 * m);
	for (std::size_t i = 0; i < m; ++i) {
		g_logits[i] = -loss.grad_real[i];
		g_logits[m + i] = -loss.grad_fake[i];
	}
	DiscGrad grad = disc_backward(s.disc, g_logits, s.ctl);
	const RegularizerValue reg = regularizer_dispatch(s.ctl, s.disc);
	for (std::size_t i = 0; i < s.disc.layers.size(); ++i) {
		SvdLayerGrad& g = grad.layers[i];
		const OrthPenalty op = orth_penalty(s.disc.layers[i]);
		g.u += op.g_u * cfg.lambda;
		g.v += op.g_v * cfg.lambda;
		for (std::size_t k = 0; k < g.e.size(); ++k)
			g.e[k] = s.ctl.fixes_diagonal() ? 0.0 : g.e[k] + reg.g_e[i][k];
	}
	adam_step(parameter_blocks(s.disc), gradient_blocks(grad), s.adam_disc, s.iteration);
	detail::enforce_constraint(s.disc, s.ctl);
}

/// One descent step on the generator loss through the current discriminator.
inline void generator_step(TrainState& s, const TrainConfig& cfg) {
	Mat z = s.rng.gaussian_mat(cfg.batch_size, cfg.z_dim);
	Mat fake = gen_forward(s.gen, z);
	const Vec logits = disc_forward(s.disc, fake, s.ctl);
	detail::check_finite(logits, "generator logits", s.iteration);
	const GenLoss loss = cfg.loss == LossFamily::GanLog ? gen_loss_logd(logits, cfg.gen_loss) : gen_loss_hinge(logits);
	s.last_gen_loss = loss.value;
	const DiscGrad through = disc_backward(s.disc, loss.grad, s.ctl);
	const GenGrad grad = gen_backward(s.gen, through.input);
	adam_step(parameter_blocks(s.gen), gradient_blocks(grad), s.adam_gen, s.iteration);
}

/// max over layers of max(‖UᵀU − I‖_F², ‖VᵀV − I‖_F²).
inline double max_orth_penalty(const DiscNet& net) {
	double worst = 0.0;
	for (const auto& l : net.layers) {
		const auto [pu, pv] = orth_penalty_parts(l);
		worst = std::max({worst, pu, pv});
	}
	return worst;
}

/// Metrics at the current state. Uses its own stream keyed by (seed, iteration) so evaluation never
/// perturbs training.
inline MetricRow evaluate(const TrainState& s, const TrainConfig& cfg) {
	Rng rng(cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(s.iteration) + 1);
	GenNet gen = s.gen;
	const Mat samples = gen_forward(gen, rng.gaussian_mat(cfg.eval_samples, cfg.z_dim));
	const ModeCoverage cov = mode_coverage(samples, ring_centers(cfg.data.modes, cfg.data.radius), cfg.data.sigma);
	const Mat reference = sample_ring(std::min<std::size_t>(cfg.eval_samples, 1000), cfg.data, rng);
	const LipschitzProbe lip = lipschitz_probe(s.disc, s.ctl, cfg.lip_pairs, rng.next_u64(), reference);
	MetricRow row;
	row.iter = s.iteration;
	row.modes_covered = cov.modes_covered;
	row.hq_fraction = cov.hq_fraction;
	row.lip_empirical = lip.empirical_max_ratio;
	row.lip_bound = lip.product_bound;
	row.orth_penalty_max = max_orth_penalty(s.disc);
	row.reg_value = regularizer_dispatch(s.ctl, s.disc).value;
	row.disc_loss = s.last_disc_loss;
	row.gen_loss = s.last_gen_loss;
	return row;
}

struct TrainObserver {
	std::function<void(const TrainState&)> on_iteration;
	std::function<void(const TrainState&, const MetricRow&)> on_eval;
	/// Receives the last state that completed an iteration without a fault.
	std::function<void(const TrainState&, const TrainingFault&)> on_fault;
};

/// Alternating training: per outer iteration n_dis discriminator steps, then one generator step.
/// Metrics are taken after every eval_interval-th iteration and after the last one.
inline TrainState train(const TrainConfig& cfg, const TrainObserver& obs = {}) {
	TrainState s = init_train_state(cfg);
	TrainState last_good = s;
	while (s.iteration < cfg.iterations) {
		try {
			for (int d = 0; d < cfg.n_dis; ++d)
				discriminator_step(s, cfg);
			generator_step(s, cfg);
			++s.iteration;
			for (const auto& l : s.disc.layers) {
				detail::check_finite(l.u.flat(), "U", s.iteration);
				detail::check_finite(l.v.flat(), "V", s.iteration);
				detail::check_finite(l.e, "e", s.iteration);
			}
		} catch (const TrainingFault& fault) {
			if (obs.on_fault)
				obs.on_fault(last_good, fault);
			throw;
		}
		if (obs.on_iteration)
			obs.on_iteration(s);
		if (obs.on_eval && (s.iteration % cfg.eval_interval == 0 || s.iteration == cfg.iterations))
			obs.on_eval(s, evaluate(s, cfg));
		if (obs.on_fault) {
			last_good = s;
			clear_caches(last_good);
		}
	}
	clear_caches(s);
	return s;
}

}  // namespace svdgan

#endif  // SVDGAN_TRAIN_HPP_
