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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "svdgan/cli.hpp"

int main(int argc, char** argv) {
	using namespace svdgan;
	CLI::App app{"SVD-reparameterized discriminators with spectrum control"};
	app.require_subcommand(1);

	std::string config_path;
	std::string out_dir;
	auto* train = app.add_subcommand("train", "train a GAN on the ring-of-Gaussians task");
	train->add_option("config", config_path, "run config or manifest (JSON)")->required();
	train->add_option("--out", out_dir, "output directory (overrides $SVDGAN_OUTPUT_DIR and the config)");

	std::string checkpoint_path, spectra_out;
	bool plot = false;
	auto* spectra = app.add_subcommand("spectra", "write the discriminator spectrum of a checkpoint as CSV");
	spectra->add_option("checkpoint", checkpoint_path, "checkpoint JSON")->required();
	spectra->add_option("out", spectra_out, "output CSV path")->required();
	spectra->add_flag("--plot", plot, "also write <out>.svg");

	GradcheckOptions gc;
	auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every hand-derived gradient");
	gradcheck->add_option("--seed", gc.seed, "seed for the random check points");
	gradcheck->add_option("--inject-fault", gc.corrupt, "perturb one component's analytic gradient");

	GenBoundInput gb;
	std::size_t n = 0, d = 0, depth = 0;
	std::string csv_path;
	auto* genbound = app.add_subcommand("genbound", "evaluate the excess-risk bound for a discriminator class");
	genbound->add_option("--n", n, "sample count")->required();
	genbound->add_option("--d", d, "maximal layer width")->required();
	genbound->add_option("--L", depth, "depth")->required();
	genbound->add_option("--Bx", gb.b_x, "input-norm bound")->required();
	genbound->add_option("--Bw", gb.b_w, "per-layer spectral-norm bounds (one per layer)")->required()->expected(1, -1);
	genbound->add_option("--rho", gb.rho_phi, "Lipschitz constant of phi");
	genbound->add_option("--delta", gb.delta, "failure probability");
	genbound->add_option("--epsilon", gb.epsilon, "optimization accuracy");
	genbound->add_option("--csv", csv_path, "CSV to append to (default: $SVDGAN_OUTPUT_DIR/genbound.csv or ./genbound.csv)");

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return cli::kBadInput;
	}

	if (*train)
		return cli::cmd_train(config_path, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir), std::cout,
				std::cerr);
	if (*spectra)
		return cli::cmd_spectra(checkpoint_path, spectra_out, plot, std::cout, std::cerr);
	if (*gradcheck)
		return cli::cmd_gradcheck(gc, std::cout);
	if (*genbound) {
		gb.n = static_cast<double>(n);
		gb.d = static_cast<double>(d);
		gb.L = static_cast<double>(depth);
		if (csv_path.empty())
			csv_path = cli::env_output_dir().value_or(".") + "/genbound.csv";
		return cli::cmd_genbound(gb, csv_path, std::cout, std::cerr);
	}
	return cli::kBadInput;
}
