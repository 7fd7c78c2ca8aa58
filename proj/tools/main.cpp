#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ndsts/commands.hpp"
#include "ndsts/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence-pair similarity via natural deduction proofs"};
  app.require_subcommand(1);

  std::string corpus, kb, config, out, proofs, features, model, id;
  std::string fit_split, scaler_in, scaler_out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  CLI::App* prove = app.add_subcommand("prove", "Prove each corpus pair in both directions");
  prove->add_option("--corpus", corpus, "corpus JSONL")->required();
  prove->add_option("--kb", kb, "knowledge base JSONL");
  prove->add_option("--config", config, "run config JSON");
  prove->add_option("--seed", seed, "seed override");
  prove->add_option("--out", out, "proof results file")->required();
  prove->add_option("--jobs", jobs, "worker threads");

  CLI::App* feat = app.add_subcommand("features", "Extract feature vectors from proofs");
  feat->add_option("--corpus", corpus, "corpus JSONL")->required();
  feat->add_option("--proofs", proofs, "proof results file")->required();
  feat->add_option("--kb", kb, "knowledge base JSONL");
  feat->add_option("--config", config, "run config JSON");
  feat->add_option("--seed", seed, "seed override");
  feat->add_option("--out", out, "feature CSV")->required();
  feat->add_option("--fit-split", fit_split, "fit the scaler on this split (all | first:N | after:N)");
  feat->add_option("--scaler", scaler_in, "apply a previously saved scaler");
  feat->add_option("--scaler-out", scaler_out, "where to save the fitted scaler");
  feat->add_option("--jobs", jobs, "worker threads");

  CLI::App* train = app.add_subcommand("train", "Grid-search and fit the regression forest");
  train->add_option("--features", features, "feature CSV")->required();
  train->add_option("--config", config, "run config JSON");
  train->add_option("--seed", seed, "seed override");
  train->add_option("--out", out, "model JSON")->required();

  CLI::App* predict = app.add_subcommand("predict", "Score feature rows with a trained model");
  predict->add_option("--model", model, "model JSON")->required();
  predict->add_option("--features", features, "feature CSV")->required();
  predict->add_option("--out", out, "predictions CSV")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model against gold scores");
  eval->add_option("--model", model, "model JSON")->required();
  eval->add_option("--features", features, "feature CSV")->required();
  eval->add_option("--out", out, "evaluation report JSON")->required();

  CLI::App* explain = app.add_subcommand("explain", "Print the proof narrative for one pair");
  explain->add_option("--proofs", proofs, "proof results file")->required();
  explain->add_option("--id", id, "pair id")->required();

  CLI::App* check = app.add_subcommand("check", "Cross-validate stored proofs against the finite-model oracle");
  check->add_option("--corpus", corpus, "corpus JSONL")->required();
  check->add_option("--proofs", proofs, "proof results file")->required();
  check->add_option("--config", config, "run config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (prove->parsed()) {
      ndsts::cmd_prove({corpus, kb, config, out, seed, jobs});
    } else if (feat->parsed()) {
      ndsts::cmd_features({corpus, proofs, kb, config, out, fit_split,
                           scaler_in, scaler_out, seed, jobs});
    } else if (train->parsed()) {
      ndsts::cmd_train({features, config, out, seed});
    } else if (predict->parsed()) {
      ndsts::cmd_predict({model, features, out});
    } else if (eval->parsed()) {
      ndsts::cmd_eval({model, features, out});
    } else if (explain->parsed()) {
      ndsts::cmd_explain({proofs, id}, std::cout);
    } else if (check->parsed()) {
      ndsts::cmd_check({corpus, proofs, config}, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
