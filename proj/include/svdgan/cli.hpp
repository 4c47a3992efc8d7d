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

#ifndef SVDGAN_CLI_HPP_
#define SVDGAN_CLI_HPP_

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "svdgan/config.hpp"
#include "svdgan/eval.hpp"
#include "svdgan/gradcheck.hpp"
#include "svdgan/io.hpp"
#include "svdgan/train.hpp"

namespace svdgan::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kBadInput = 2, kCorrupt = 3 };

inline constexpr const char* kOutputDirEnv = "SVDGAN_OUTPUT_DIR";

inline std::optional<std::string> env_output_dir() {
	const char* v = std::getenv(kOutputDirEnv);
	if (v && *v)
		return std::string(v);
	return std::nullopt;
}

/// Value-vs-normalized-rank curves, one polyline per layer.
inline std::string spectra_svg(const SpectrumReport& rep) {
	static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
	const double w = 480, h = 320, pad = 40;
	double top = 1.0;
	for (const auto& l : rep.layers)
		for (double v : l.values)
			top = std::max(top, v);
	std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\">\n"
					"<rect width=\"480\" height=\"320\" fill=\"white\"/>\n"
					"<line x1=\"40\" y1=\"280\" x2=\"460\" y2=\"280\" stroke=\"black\"/>\n"
					"<line x1=\"40\" y1=\"20\" x2=\"40\" y2=\"280\" stroke=\"black\"/>\n";
	s += "<text x=\"200\" y=\"310\" font-size=\"12\">normalized rank</text>\n";
	s += "<text x=\"4\" y=\"14\" font-size=\"12\">value (max " + format_double(top) + ")</text>\n";
	for (std::size_t i = 0; i < rep.layers.size(); ++i) {
		const auto& l = rep.layers[i];
		s += "<polyline fill=\"none\" stroke=\"" + std::string(colors[i % 6]) + "\" points=\"";
		for (std::size_t k = 0; k < l.values.size(); ++k) {
			const double x = pad + l.normalized_rank[k] * (w - 2 * pad + 20);
			const double y = h - pad - std::max(l.values[k], 0.0) / top * (h - 2 * pad + 20);
			s += format_double(x) + "," + format_double(y) + " ";
		}
		s += "\"/>\n";
	}
	return s + "</svg>\n";
}

/// Runs training from a config (or manifest) file. Output directory precedence: explicit override,
/// then $SVDGAN_OUTPUT_DIR, then the config's output_dir.
inline int cmd_train(const std::string& config_path, std::optional<std::string> out_override, std::ostream& out,
		std::ostream& err) {
	ParsedConfig parsed;
	try {
		parsed = parse_config_or_manifest(json::parse(read_file(config_path)));
	} catch (const ConfigError& e) {
		err << e.what() << "\n";
		return kBadInput;
	} catch (const std::exception& e) {
		err << "cannot read config " << config_path << ": " << e.what() << "\n";
		return kBadInput;
	}
	RunConfig& rc = parsed.config;
	if (out_override)
		rc.output_dir = *out_override;
	else if (auto env = env_output_dir())
		rc.output_dir = *env;
	const std::filesystem::path dir(rc.output_dir);
	const TrainConfig& cfg = rc.train;

	try {
		std::filesystem::create_directories(dir);
		write_file((dir / "manifest.json").string(), run_manifest(parsed).dump(1) + "\n");
		std::filesystem::remove(dir / "metrics.csv");

		TrainObserver obs;
		obs.on_eval = [&](const TrainState& s, const MetricRow& row) {
			append_csv_row((dir / "metrics.csv").string(), kMetricsHeader, metrics_csv_row(row));
			if (rc.spectra_snapshots)
				write_file((dir / ("spectra_" + std::to_string(s.iteration) + ".csv")).string(),
						spectra_csv(spectrum_report(s.disc, s.ctl, s.iteration)));
			out << "iter " << row.iter << ": modes " << row.modes_covered << ", hq " << format_double(row.hq_fraction)
				<< ", orth " << format_double(row.orth_penalty_max) << "\n";
		};
		obs.on_fault = [&](const TrainState& s, const TrainingFault&) {
			write_file((dir / "checkpoint_last_good.json").string(), save_checkpoint(make_checkpoint(s, cfg.seed)));
		};
		const TrainState final_state = train(cfg, obs);
		write_file((dir / "checkpoint.json").string(), save_checkpoint(make_checkpoint(final_state, cfg.seed)));
		if (rc.plot)
			write_file((dir / "spectra_final.svg").string(),
					spectra_svg(spectrum_report(final_state.disc, final_state.ctl, final_state.iteration)));
		out << "wrote " << dir.string() << "\n";
		return kOk;
	} catch (const TrainingFault& e) {
		err << "training fault: " << e.what() << " (last good checkpoint in " << (dir / "checkpoint_last_good.json").string()
			<< ")\n";
		return kCheckFailed;
	} catch (const std::exception& e) {
		err << "train failed: " << e.what() << "\n";
		return kBadInput;
	}
}

/// Writes the spectrum of a checkpoint's discriminator as CSV (and optionally an SVG next to it).
inline int cmd_spectra(const std::string& checkpoint_path, const std::string& out_path, bool plot, std::ostream& out,
		std::ostream& err) {
	std::string text;
	try {
		text = read_file(checkpoint_path);
	} catch (const std::exception& e) {
		err << e.what() << "\n";
		return kBadInput;
	}
	SpectrumReport rep;
	try {
		const Checkpoint c = load_checkpoint(text);
		rep = spectrum_report(c.disc, c.ctl, c.iteration);
	} catch (const std::exception& e) {
		err << "corrupt checkpoint " << checkpoint_path << ": " << e.what() << "\n";
		return kCorrupt;
	}
	try {
		write_file(out_path, spectra_csv(rep));
		if (plot)
			write_file(out_path + ".svg", spectra_svg(rep));
	} catch (const std::exception& e) {
		err << e.what() << "\n";
		return kBadInput;
	}
	std::size_t rows = 0;
	for (const auto& l : rep.layers)
		rows += l.values.size();
	out << "wrote " << rows << " rows to " << out_path << "\n";
	return kOk;
}

inline int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& out) {
	const GradcheckReport rep = run_gradcheck(opt);
	for (const auto& e : rep.entries) {
		char line[160];
		std::snprintf(line, sizeof line, "%-36s rel_err %.3e  %s\n", e.component.c_str(), e.rel_error,
				e.passed ? "ok" : "FAIL");
		out << line;
	}
	const GradcheckEntry& worst = rep.worst();
	out << rep.entries.size() << " components, tolerance " << format_double(rep.tolerance) << ", worst " << worst.component
		<< " (" << format_double(worst.rel_error) << ")\n";
	return rep.passed() ? kOk : kCheckFailed;
}

/// Prints the excess-risk bound and appends it to a CSV.
inline int cmd_genbound(const GenBoundInput& in, const std::string& csv_path, std::ostream& out, std::ostream& err) {
	double bound = 0.0;
	try {
		bound = excess_gen_bound(in);
	} catch (const DomainError& e) {
		err << e.what() << "\n";
		return kBadInput;
	}
	const double beta = in.beta();
	out << "beta = " << format_double(beta) << "\n";
	out << "bound = " << format_double(bound) << "\n";
	const bool constrained = std::all_of(in.b_w.begin(), in.b_w.end(), [](double b) { return b == 1.0; });
	if (constrained)
		out << "note: spectrum-constrained regime (every B_W = 1, so beta = B_x)\n";
	else if (std::any_of(in.b_w.begin(), in.b_w.end(), [](double b) { return b > 1.0; }))
		out << "note: beta grows geometrically with depth (beta / B_x = " << format_double(beta / in.b_x) << ")\n";
	try {
		if (auto parent = std::filesystem::path(csv_path).parent_path(); !parent.empty())
			std::filesystem::create_directories(parent);
		append_csv_row(csv_path, kGenboundHeader, genbound_csv_row(in, bound));
	} catch (const std::exception& e) {
		err << e.what() << "\n";
		return kBadInput;
	}
	return kOk;
}

}  // namespace svdgan::cli

#endif  // SVDGAN_CLI_HPP_
