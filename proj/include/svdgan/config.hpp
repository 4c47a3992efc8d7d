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

#ifndef SVDGAN_CONFIG_HPP_
#define SVDGAN_CONFIG_HPP_

#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "svdgan/error.hpp"
#include "svdgan/io.hpp"
#include "svdgan/train.hpp"

namespace svdgan {

/// Training hyperparameters plus where and how to write the run.
struct RunConfig {
	TrainConfig train;
	std::string output_dir = "run";
	bool plot = false;
	bool spectra_snapshots = true;
};

/// Field-level configuration problems, one message per offending key.
class ConfigError : public InvalidInput {
public:
	explicit ConfigError(std::vector<std::string> problems)
			: InvalidInput(join(problems)), problems_(std::move(problems)) {}
	const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
	static std::string join(const std::vector<std::string>& p) {
		std::string s = "invalid config:";
		for (const auto& x : p)
			s += "\n  " + x;
		return s;
	}
	std::vector<std::string> problems_;
};

struct ParsedConfig {
	RunConfig config;
	std::vector<std::string> defaults_applied;  ///< keys that were absent and took their default
};

inline std::string loss_name(LossFamily f) { return f == LossFamily::GanLog ? "gan_log" : "hinge"; }
inline std::string gen_loss_name(GenLossForm f) { return f == GenLossForm::LogD ? "logd" : "literal"; }

namespace detail {

class ConfigReader {
public:
	ConfigReader(const json& doc, std::vector<std::string>& problems, std::vector<std::string>& defaults, std::string prefix)
			: doc_(doc), problems_(problems), defaults_(defaults), prefix_(std::move(prefix)) {}

	template <typename T, typename Check>
	T get(const std::string& key, T fallback, Check check, const char* requirement) {
		seen_.insert(key);
		if (!doc_.contains(key)) {
			defaults_.push_back(prefix_ + key);
			return fallback;
		}
		try {
			T v = doc_.at(key).get<T>();
			if (!check(v)) {
				problems_.push_back(prefix_ + key + ": " + requirement);
				return fallback;
			}
			return v;
		} catch (const json::exception&) {
			problems_.push_back(prefix_ + key + ": wrong type (" + requirement + ")");
			return fallback;
		}
	}

	template <typename T>
	T get(const std::string& key, T fallback) {
		return get<T>(key, fallback, [](const T&) { return true; }, "any");
	}

	bool has(const std::string& key) const { return doc_.contains(key); }

	json object(const std::string& key) {
		seen_.insert(key);
		if (!doc_.contains(key))
			return json::object();
		if (!doc_.at(key).is_object()) {
			problems_.push_back(prefix_ + key + ": must be an object");
			return json::object();
		}
		return doc_.at(key);
	}

	void reject_unknown() {
		for (auto it = doc_.begin(); it != doc_.end(); ++it)
			if (!seen_.count(it.key()))
				problems_.push_back(prefix_ + it.key() + ": unknown key");
	}

private:
	const json& doc_;
	std::vector<std::string>& problems_;
	std::vector<std::string>& defaults_;
	std::string prefix_;
	std::set<std::string> seen_;
};

inline AdamConfig read_adam(ConfigReader& parent, const std::string& key, const AdamConfig& def,
		std::vector<std::string>& problems, std::vector<std::string>& defaults) {
	const json obj = parent.object(key);
	if (!parent.has(key)) {
		defaults.push_back(key);
		return def;
	}
	ConfigReader r(obj, problems, defaults, key + ".");
	AdamConfig a;
	a.lr = r.get<double>("lr", def.lr, [](double x) { return x > 0.0; }, "must be > 0");
	a.beta1 = r.get<double>("beta1", def.beta1, [](double x) { return x >= 0.0 && x < 1.0; }, "must lie in [0, 1)");
	a.beta2 = r.get<double>("beta2", def.beta2, [](double x) { return x >= 0.0 && x < 1.0; }, "must lie in [0, 1)");
	a.eps = def.eps;
	r.reject_unknown();
	return a;
}

}  // namespace detail

/// Reads a run config. Missing keys take defaults (DC-GAN regime for gan_log, the hinge regime
/// n_dis = 5, beta1 = 0, beta2 = 0.9 for hinge; gamma = 0.05 for divergence, 1 otherwise) and are
/// listed in defaults_applied. Unknown keys and bad values are collected into one ConfigError.
inline ParsedConfig parse_run_config(const json& doc) {
	std::vector<std::string> problems;
	ParsedConfig out;
	auto& defaults = out.defaults_applied;
	if (!doc.is_object())
		throw ConfigError({"<root>: config must be a JSON object"});
	detail::ConfigReader r(doc, problems, defaults, "");
	TrainConfig& t = out.config.train;

	const std::string ctl_name = r.get<std::string>("controller", std::string(tag_name(t.controller)),
			[](const std::string& s) { return parse_tag(s).has_value(); },
			"one of orthogonal, sn_svd, constraint, lipschitz, dopt_sn, divergence, power_iter");
	t.controller = parse_tag(ctl_name).value_or(t.controller);
	t.gamma = r.get<double>("gamma", default_gamma(t.controller), [](double x) { return x >= 0.0; }, "must be >= 0");
	t.ref_scale = r.get<double>("ref_scale", kDefaultRefScale, [](double x) { return x > 0.0; }, "must be > 0");
	t.lambda = r.get<double>("lambda", 10.0, [](double x) { return x >= 0.0; }, "must be >= 0");

	const std::string loss = r.get<std::string>("loss", "gan_log",
			[](const std::string& s) { return s == "gan_log" || s == "hinge"; }, "gan_log or hinge");
	t.loss = loss == "hinge" ? LossFamily::Hinge : LossFamily::GanLog;
	const std::string gl = r.get<std::string>("gen_loss", "logd",
			[](const std::string& s) { return s == "logd" || s == "literal"; }, "logd or literal");
	t.gen_loss = gl == "literal" ? GenLossForm::Literal : GenLossForm::LogD;

	const bool hinge = t.loss == LossFamily::Hinge;
	const AdamConfig regime = hinge ? AdamConfig{2e-4, 0.0, 0.9, 1e-8} : AdamConfig{2e-4, 0.5, 0.999, 1e-8};
	t.n_dis = r.get<int>("n_dis", hinge ? 5 : 1, [](int x) { return x >= 1; }, "must be >= 1");
	t.batch_size = r.get<std::size_t>("batch_size", 64, [](std::size_t x) { return x >= 1; }, "must be >= 1");
	t.iterations = r.get<long>("iterations", 1000, [](long x) { return x >= 0; }, "must be >= 0");
	t.adam_disc = detail::read_adam(r, "adam_disc", regime, problems, defaults);
	t.adam_gen = detail::read_adam(r, "adam_gen", regime, problems, defaults);
	t.z_dim = r.get<std::size_t>("z_dim", 2, [](std::size_t x) { return x >= 1; }, "must be >= 1");
	auto positive_dims = [](const std::vector<std::size_t>& v) {
		return std::all_of(v.begin(), v.end(), [](std::size_t x) { return x >= 1; });
	};
	t.disc_hidden = r.get<std::vector<std::size_t>>("disc_hidden", {32, 32}, positive_dims, "list of widths >= 1");
	t.gen_hidden = r.get<std::vector<std::size_t>>("gen_hidden", {32, 32}, positive_dims, "list of widths >= 1");

	{
		const json ds = r.object("dataset");
		if (!r.has("dataset"))
			defaults.push_back("dataset");
		detail::ConfigReader d(ds, problems, defaults, "dataset.");
		const std::string kind = d.get<std::string>("kind", "ring", [](const std::string& s) { return s == "ring"; }, "ring");
		(void)kind;
		t.data.modes = d.get<std::size_t>("modes", 8, [](std::size_t x) { return x >= 1; }, "must be >= 1");
		t.data.radius = d.get<double>("radius", 2.0, [](double x) { return x >= 0.0; }, "must be >= 0");
		t.data.sigma = d.get<double>("sigma", 0.02, [](double x) { return x > 0.0; }, "must be > 0");
		d.reject_unknown();
	}

	t.seed = r.get<std::uint64_t>("seed", 0);
	t.eval_interval = r.get<long>("eval_interval", 500, [](long x) { return x >= 1; }, "must be >= 1");
	t.eval_samples = r.get<std::size_t>("eval_samples", 2000, [](std::size_t x) { return x >= 1; }, "must be >= 1");
	t.lip_pairs = r.get<std::size_t>("lip_pairs", 10000, [](std::size_t x) { return x >= 1; }, "must be >= 1");
	out.config.output_dir = r.get<std::string>("output_dir", "run");
	out.config.plot = r.get<bool>("plot", false);
	out.config.spectra_snapshots = r.get<bool>("spectra_snapshots", true);
	r.reject_unknown();

	if (problems.empty()) {
		try {
			t.validate();
		} catch (const InvalidInput& e) {
			problems.push_back(e.what());
		}
	}
	if (!problems.empty())
		throw ConfigError(std::move(problems));
	return out;
}

/// Fully resolved config: every key explicit. Parsing it back yields the same RunConfig.
inline json run_config_json(const RunConfig& c) {
	const TrainConfig& t = c.train;
	auto adam = [](const AdamConfig& a) { return json{{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}}; };
	return json{
			{"controller", std::string(tag_name(t.controller))},
			{"gamma", t.gamma},
			{"ref_scale", t.ref_scale},
			{"lambda", t.lambda},
			{"loss", loss_name(t.loss)},
			{"gen_loss", gen_loss_name(t.gen_loss)},
			{"n_dis", t.n_dis},
			{"batch_size", t.batch_size},
			{"iterations", t.iterations},
			{"adam_disc", adam(t.adam_disc)},
			{"adam_gen", adam(t.adam_gen)},
			{"z_dim", t.z_dim},
			{"disc_hidden", t.disc_hidden},
			{"gen_hidden", t.gen_hidden},
			{"dataset", {{"kind", "ring"}, {"modes", t.data.modes}, {"radius", t.data.radius}, {"sigma", t.data.sigma}}},
			{"seed", t.seed},
			{"eval_interval", t.eval_interval},
			{"eval_samples", t.eval_samples},
			{"lip_pairs", t.lip_pairs},
			{"output_dir", c.output_dir},
			{"plot", c.plot},
			{"spectra_snapshots", c.spectra_snapshots},
	};
}

/// Manifest written next to every run; cmd_train accepts it in place of a config.
inline json run_manifest(const ParsedConfig& p) {
	return json{{"tool", "svdgan"},
			{"version", kVersion},
			{"seed", p.config.train.seed},
			{"config", run_config_json(p.config)},
			{"defaults_applied", p.defaults_applied}};
}

/// Accepts either a config document or a manifest (whose "config" member is used).
inline ParsedConfig parse_config_or_manifest(const json& doc) {
	if (doc.is_object() && doc.contains("config") && doc.contains("tool") && doc.at("config").is_object())
		return parse_run_config(doc.at("config"));
	return parse_run_config(doc);
}

}  // namespace svdgan

#endif  // SVDGAN_CONFIG_HPP_
