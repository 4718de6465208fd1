#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparse_lsq/errors.hpp"
#include "sparse_lsq/run.hpp"

int main(int argc, char** argv) {
  using namespace sparse_lsq;

  CLI::App app{"Sparse least-squares solutions via column subset selection"};
  RunSpec spec;
  std::string matrix, vector, generator, mode = "det", suites = "structural", frontier, out;
  std::uint64_t seed = 0;
  Index r = 0;

  auto* matrix_opt = app.add_option("--matrix", matrix, "Matrix Market or CSV file holding A");
  auto* vector_opt = app.add_option("--vector", vector, "vector file holding b, one value per line");
  auto* gen_opt = app.add_option("--generate", generator,
                                 "synthetic instance, e.g. m=30,n=20,gamma=0.5,eta=0,seed=1");
  app.add_option("--k", spec.k, "rank parameter")->required();
  app.add_option("--eps", spec.epsilon, "accuracy parameter in (0, 1/2)")->required();
  app.add_option("--mode", mode, "det or rand")->check(CLI::IsMember({"det", "rand"}));
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed (required for rand)");
  auto* r_opt = app.add_option("--r", r, "override the sparsity budget r");
  app.add_option("--suite", suites, "structural|theorem1|theorem2|lemmas|all (comma list)");
  auto* frontier_opt = app.add_option("--frontier", frontier, "comma list of r values; emits CSV");
  app.add_option("--trials", spec.trials, "seeds/trials for the Monte Carlo suites");
  auto* out_opt = app.add_option("--out", out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*matrix_opt) spec.matrix_path = matrix;
    if (*vector_opt) spec.vector_path = vector;
    if (*gen_opt) spec.generator = generator;
    spec.mode = mode == "rand" ? Mode::randomized : Mode::deterministic;
    if (*seed_opt) spec.seed = seed;
    if (*r_opt) spec.r_override = r;
    if (*out_opt) spec.out_path = out;
    spec.suites = parse_suites(suites);
    if (*frontier_opt) {
      for (const auto& item : CLI::detail::split(frontier, ',')) {
        spec.frontier.push_back(std::stol(item));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  return run(spec, std::cout, std::cerr);
}
