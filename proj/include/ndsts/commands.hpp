#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ndsts/corpus.hpp"
#include "ndsts/prover.hpp"

namespace ndsts {

/// Data-level failure (unreadable input, schema mismatch, unknown id, ...);
/// the command line maps it to exit code 2.
struct CommandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Status names used in output records ("proved", "proved_with_skips", ...).
std::string status_json_name(ProofStatus s);
ProofStatus status_from_json_name(const std::string& name);

/// FNV-1a of a file's bytes, as fixed-width hex. Missing optional files hash
/// to "-".
std::string file_hash(const std::string& path);

struct ProveArgs {
  std::string corpus;
  std::string kb;      // optional
  std::string config;  // optional, defaults apply
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};
void cmd_prove(const ProveArgs& args);

struct FeaturesArgs {
  std::string corpus;
  std::string proofs;
  std::string kb;      // optional
  std::string config;  // optional
  std::string out;     // CSV
  std::string fit_split;   // fit scaler+stats on this split when nonempty
  std::string scaler_in;   // apply a saved scaler instead of fitting
  std::string scaler_out;  // default: out + ".scaler.json"
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};
void cmd_features(const FeaturesArgs& args);

struct TrainArgs {
  std::string features;  // CSV from cmd_features
  std::string config;    // optional
  std::string out;       // model JSON
  std::optional<std::uint64_t> seed;
};
void cmd_train(const TrainArgs& args);

struct PredictArgs {
  std::string model;
  std::string features;
  std::string out;  // CSV of id,prediction
};
void cmd_predict(const PredictArgs& args);

struct EvalArgs {
  std::string model;
  std::string features;
  std::string out;  // report JSON
};
void cmd_eval(const EvalArgs& args);

struct ExplainArgs {
  std::string proofs;
  std::string id;
};
void cmd_explain(const ExplainArgs& args, std::ostream& os);

struct CheckArgs {
  std::string corpus;
  std::string proofs;
  std::string config;  // optional; oracle_bound comes from here
};
/// Oracle cross-validation of stored proofs. Throws CommandError when any
/// axiom-free Proved/NegationProved outcome disagrees with the bounded oracle.
void cmd_check(const CheckArgs& args, std::ostream& os);

/// Proof results file contents (JSON lines written by cmd_prove).
struct StoredProofs {
  RunConfig config;
  std::map<std::string, std::string> input_hashes;
  struct Entry {
    std::string id;
    std::string error;  // entry-level failure; result is empty when set
    BidirectionalResult result;
  };
  std::vector<Entry> entries;
};
StoredProofs proofs_from_file(const std::string& path);

/// Feature CSV contents (written by cmd_features).
struct FeatureTable {
  RunConfig config;
  std::map<std::string, std::string> input_hashes;
  std::uint64_t schema_hash = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::vector<double> gold_scores;
  std::vector<std::string> gold_labels;
};
FeatureTable features_from_file(const std::string& path);

}  // namespace ndsts
