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

#ifndef SVDGAN_IO_HPP_
#define SVDGAN_IO_HPP_

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "svdgan/error.hpp"
#include "svdgan/eval.hpp"
#include "svdgan/spectrum.hpp"
#include "svdgan/svdnet.hpp"
#include "svdgan/train.hpp"

namespace svdgan {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCheckpointFormat = "svdgan-checkpoint";

/// Shortest form that reads back to the same double.
inline std::string format_double(double x) {
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", x);
	return buf;
}

inline std::string read_file(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw InvalidInput("cannot open " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out)
		throw InvalidInput("cannot write " + path);
	out << text;
}

// --- CSV -------------------------------------------------------------------------------------

inline constexpr const char* kMetricsHeader =
		"iter,modes_covered,hq_fraction,lip_empirical,lip_bound,orth_penalty_max,reg_value,disc_loss,gen_loss";
inline constexpr const char* kSpectraHeader = "layer,k,normalized_rank,value";
inline constexpr const char* kGenboundHeader = "n,d,L,beta,rho_phi,delta,epsilon,bound";

inline std::string metrics_csv_row(const MetricRow& r) {
	return std::to_string(r.iter) + "," + std::to_string(r.modes_covered) + "," + format_double(r.hq_fraction) + "," +
			format_double(r.lip_empirical) + "," + format_double(r.lip_bound) + "," + format_double(r.orth_penalty_max) +
			"," + format_double(r.reg_value) + "," + format_double(r.disc_loss) + "," + format_double(r.gen_loss) + "\n";
}

/// Layers and ranks are 1-based.
inline std::string spectra_csv(const SpectrumReport& rep) {
	std::string out = std::string(kSpectraHeader) + "\n";
	for (std::size_t i = 0; i < rep.layers.size(); ++i) {
		const LayerSpectrum& l = rep.layers[i];
		for (std::size_t k = 0; k < l.values.size(); ++k)
			out += std::to_string(i + 1) + "," + std::to_string(k + 1) + "," + format_double(l.normalized_rank[k]) + "," +
					format_double(l.values[k]) + "\n";
	}
	return out;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
	std::vector<std::string> out;
	std::string cur;
	std::istringstream ss(line);
	while (std::getline(ss, cur, sep))
		out.push_back(cur);
	return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
	try {
		std::size_t used = 0;
		const double v = std::stod(s, &used);
		if (used != s.size())
			throw CorruptArtifact(what + ": trailing characters in '" + s + "'");
		return v;
	} catch (const std::logic_error&) {
		throw CorruptArtifact(what + ": not a number: '" + s + "'");
	}
}

inline SpectrumReport parse_spectra_csv(const std::string& text, long iteration = 0) {
	std::istringstream in(text);
	std::string line;
	if (!std::getline(in, line) || line != kSpectraHeader)
		throw CorruptArtifact("spectra csv: bad header");
	SpectrumReport rep;
	rep.iteration = iteration;
	std::vector<Vec> values;
	while (std::getline(in, line)) {
		if (line.empty())
			continue;
		const auto f = split(line, ',');
		if (f.size() != 4)
			throw CorruptArtifact("spectra csv: expected 4 fields in '" + line + "'");
		const auto layer = static_cast<std::size_t>(parse_number(f[0], "layer"));
		const auto k = static_cast<std::size_t>(parse_number(f[1], "k"));
		if (layer < 1 || k < 1)
			throw CorruptArtifact("spectra csv: layer and k are 1-based");
		if (values.size() < layer)
			values.resize(layer);
		if (values[layer - 1].size() + 1 != k)
			throw CorruptArtifact("spectra csv: ranks out of order in '" + line + "'");
		values[layer - 1].push_back(parse_number(f[3], "value"));
	}
	for (Vec& v : values)
		rep.layers.push_back(make_layer_spectrum(std::move(v)));
	return rep;
}

inline std::string genbound_csv_row(const GenBoundInput& in, double bound) {
	return format_double(in.n) + "," + format_double(in.d) + "," + format_double(in.L) + "," + format_double(in.beta()) +
			"," + format_double(in.rho_phi) + "," + format_double(in.delta) + "," + format_double(in.epsilon) + "," +
			format_double(bound) + "\n";
}

/// Appends a row, writing the header first when the file is new or empty.
inline void append_csv_row(const std::string& path, const char* header, const std::string& row) {
	bool fresh = true;
	{
		std::ifstream probe(path, std::ios::binary | std::ios::ate);
		fresh = !probe || probe.tellg() == 0;
	}
	std::ofstream out(path, std::ios::binary | std::ios::app);
	if (!out)
		throw InvalidInput("cannot append to " + path);
	if (fresh)
		out << header << "\n";
	out << row;
}

// --- checkpoint ------------------------------------------------------------------------------

struct Checkpoint {
	DiscNet disc;
	std::optional<GenNet> gen;
	SpectrumController ctl;
	long iteration = 0;
	std::uint64_t seed = 0;
	std::string rng_state;
};

inline json checkpoint_json(const Checkpoint& c) {
	json j;
	j["format"] = kCheckpointFormat;
	j["version"] = kVersion;
	j["iteration"] = c.iteration;
	j["seed"] = c.seed;
	j["rng_state"] = c.rng_state;

	json ctl;
	ctl["tag"] = std::string(tag_name(c.ctl.tag));
	ctl["gamma"] = c.ctl.gamma;
	ctl["ref_scale"] = c.ctl.ref_scale;
	ctl["power_state"] = json::array();
	for (const auto& ps : c.ctl.power_state)
		ctl["power_state"].push_back({{"u", ps.u}, {"v", ps.v}});
	j["controller"] = ctl;

	json disc;
	disc["dims"] = c.disc.dims();
	disc["layers"] = json::array();
	for (const auto& l : c.disc.layers)
		disc["layers"].push_back({{"U", l.u.data()}, {"e", l.e}, {"V", l.v.data()}, {"bias", l.bias}});
	j["disc"] = disc;

	if (c.gen) {
		json gen;
		gen["dims"] = c.gen->dims();
		gen["layers"] = json::array();
		for (const auto& l : c.gen->layers)
			gen["layers"].push_back({{"W", l.w.data()}, {"bias", l.bias}});
		j["gen"] = gen;
	}
	return j;
}

inline std::string save_checkpoint(const Checkpoint& c) { return checkpoint_json(c).dump(1) + "\n"; }

inline Checkpoint make_checkpoint(const TrainState& s, std::uint64_t seed) {
	return {s.disc, s.gen, s.ctl, s.iteration, seed, s.rng.state()};
}

namespace detail {

inline Vec read_vec(const json& j, const char* key, std::size_t expected, const std::string& where) {
	if (!j.contains(key) || !j.at(key).is_array())
		throw CorruptArtifact(where + ": missing array '" + key + "'");
	Vec v = j.at(key).get<Vec>();
	if (v.size() != expected)
		throw CorruptArtifact(where + ": '" + key + "' has " + std::to_string(v.size()) + " entries, expected " +
				std::to_string(expected));
	for (double x : v)
		if (!std::isfinite(x))
			throw CorruptArtifact(where + ": non-finite entry in '" + key + "'");
	return v;
}

}  // namespace detail

inline Checkpoint load_checkpoint(const std::string& text) {
	try {
		const json j = json::parse(text);
		if (j.value("format", "") != kCheckpointFormat)
			throw CorruptArtifact("checkpoint: unknown format");
		Checkpoint c;
		c.iteration = j.at("iteration").get<long>();
		c.seed = j.at("seed").get<std::uint64_t>();
		c.rng_state = j.value("rng_state", "");

		const json& ctl = j.at("controller");
		const auto tag = parse_tag(ctl.at("tag").get<std::string>());
		if (!tag)
			throw CorruptArtifact("checkpoint: unknown controller tag");
		c.ctl = SpectrumController::make(*tag, ctl.at("gamma").get<double>(), ctl.at("ref_scale").get<double>());
		for (const auto& ps : ctl.value("power_state", json::array()))
			c.ctl.power_state.push_back({ps.at("u").get<Vec>(), ps.at("v").get<Vec>()});

		const json& disc = j.at("disc");
		const auto dims = disc.at("dims").get<std::vector<std::size_t>>();
		check_dims(dims, "checkpoint");
		const json& layers = disc.at("layers");
		if (layers.size() + 1 != dims.size())
			throw CorruptArtifact("checkpoint: layer count does not match dims");
		for (std::size_t i = 0; i < layers.size(); ++i) {
			const std::string where = "checkpoint disc layer " + std::to_string(i);
			const std::size_t din = dims[i], dout = dims[i + 1], r = std::min(din, dout);
			SvdLayer l;
			l.u = Mat(din, r, detail::read_vec(layers[i], "U", din * r, where));
			l.e = detail::read_vec(layers[i], "e", r, where);
			l.v = Mat(dout, r, detail::read_vec(layers[i], "V", dout * r, where));
			l.bias = detail::read_vec(layers[i], "bias", dout, where);
			c.disc.layers.push_back(std::move(l));
		}
		c.disc.validate();
		for (std::size_t i = 0; i < c.ctl.power_state.size(); ++i) {
			const auto& ps = c.ctl.power_state[i];
			if (i >= c.disc.layers.size() || ps.u.size() != c.disc.layers[i].d_in() || ps.v.size() != c.disc.layers[i].d_out())
				throw CorruptArtifact("checkpoint: power state does not match layer " + std::to_string(i));
		}

		if (j.contains("gen")) {
			const json& gen = j.at("gen");
			const auto gdims = gen.at("dims").get<std::vector<std::size_t>>();
			check_dims(gdims, "checkpoint");
			const json& glayers = gen.at("layers");
			if (glayers.size() + 1 != gdims.size())
				throw CorruptArtifact("checkpoint: generator layer count does not match dims");
			GenNet g;
			for (std::size_t i = 0; i < glayers.size(); ++i) {
				const std::string where = "checkpoint gen layer " + std::to_string(i);
				g.layers.push_back({Mat(gdims[i], gdims[i + 1], detail::read_vec(glayers[i], "W", gdims[i] * gdims[i + 1], where)),
						detail::read_vec(glayers[i], "bias", gdims[i + 1], where)});
			}
			c.gen = std::move(g);
		}
		return c;
	} catch (const CorruptArtifact&) {
		throw;
	} catch (const std::exception& e) {
		throw CorruptArtifact(std::string("checkpoint: ") + e.what());
	}
}

}  // namespace svdgan

#endif  // SVDGAN_IO_HPP_
