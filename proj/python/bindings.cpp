#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "ndsts/commands.hpp"
#include "ndsts/corpus.hpp"
#include "ndsts/features.hpp"
#include "ndsts/formula.hpp"
#include "ndsts/lexicon.hpp"
#include "ndsts/prover.hpp"
#include "ndsts/util.hpp"

namespace py = pybind11;
using namespace ndsts;

namespace {

py::dict direction_dict(const DirectionResult& d) {
  py::list axioms;
  for (const Axiom& a : d.axioms_used) {
    py::dict ax;
    ax["source"] = a.source;
    ax["target"] = a.target;
    ax["relation"] = relation_name(a.relation);
    ax["negated"] = a.negated;
    ax["probability"] = a.probability;
    axioms.append(ax);
  }
  py::list skipped, matched;
  for (const FormulaPtr& f : d.skipped_subgoals)
    skipped.append(print_formula(f));
  for (const FormulaPtr& f : d.matched_subgoals)
    matched.append(print_formula(f));
  py::dict subgoals;
  subgoals["total"] = d.subgoal_stats.total_subgoals;
  subgoals["proved_before_injection"] = d.subgoal_stats.proved_before_injection;
  subgoals["proved_after_injection"] = d.subgoal_stats.proved_after_injection;
  py::dict out;
  out["status"] = status_json_name(d.status);
  out["axioms"] = axioms;
  out["skipped"] = skipped;
  out["matched"] = matched;
  out["subgoals"] = subgoals;
  out["steps"] = d.trace.proof_steps();
  return out;
}

py::object json_loads(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_ndsts, m) {
  m.doc() = "Sentence-pair similarity via natural deduction proofs";

  py::register_exception<FormulaError>(m, "FormulaError", PyExc_ValueError);
  py::register_exception<LexiconError>(m, "LexiconError", PyExc_ValueError);
  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);
  py::register_exception<CommandError>(m, "CommandError", PyExc_ValueError);

  m.def(
      "prove_pair",
      [](const std::string& formula1, const std::string& formula2,
         const std::string& kb, const std::string& config) {
        RunConfig cfg = load_config(config);
        Lexicon lex = kb.empty() ? Lexicon{} : load_lexicon(kb);
        Signature sig;
        FormulaPtr f1 = parse_formula(formula1, sig);
        FormulaPtr f2 = parse_formula(formula2, sig);
        ProverConfig pc;
        pc.step_budget = cfg.step_budget;
        pc.lexicon.require_same_case = cfg.require_same_case;
        pc.lexicon.disconnected_probability = cfg.disconnected_probability;
        BidirectionalResult r = run_pipeline(f1, f2, lex, pc);
        py::dict out;
        out["forward"] = direction_dict(r.forward);
        out["backward"] = direction_dict(r.backward);
        return out;
      },
      py::arg("formula1"), py::arg("formula2"), py::arg("kb") = "",
      py::arg("config") = "",
      "Prove both directions of one formula pair; returns per-direction "
      "status, axioms, skipped and matched sub-goals, and step counts.");

  m.def("string_similarity", &string_similarity, py::arg("s1"), py::arg("s2"),
        "Greedy longest-common-substring similarity in [0, 1].");

  m.def(
      "feature_names",
      []() {
        std::vector<std::string> names;
        for (const FeatureSpec& s : feature_schema()) names.push_back(s.name);
        return names;
      },
      "Column names of the assembled feature vector, in order.");

  m.def(
      "prove",
      [](const std::string& corpus, const std::string& kb,
         const std::string& out, const std::string& config,
         std::optional<std::uint64_t> seed, int jobs) {
        cmd_prove({corpus, kb, config, out, seed, jobs});
      },
      py::arg("corpus"), py::arg("kb"), py::arg("out"), py::arg("config") = "",
      py::arg("seed") = py::none(), py::arg("jobs") = 1,
      "Run the prover over a corpus file and write a proofs JSONL file.");

  m.def(
      "features",
      [](const std::string& corpus, const std::string& proofs,
         const std::string& kb, const std::string& out,
         const std::string& config, const std::string& fit,
         const std::string& scaler, const std::string& scaler_out,
         std::optional<std::uint64_t> seed, int jobs) {
        cmd_features({corpus, proofs, kb, config, out, fit, scaler, scaler_out,
                      seed, jobs});
      },
      py::arg("corpus"), py::arg("proofs"), py::arg("kb"), py::arg("out"),
      py::arg("config") = "", py::arg("fit") = "", py::arg("scaler") = "",
      py::arg("scaler_out") = "", py::arg("seed") = py::none(),
      py::arg("jobs") = 1,
      "Extract the feature table for a corpus given its proofs file.");

  m.def(
      "train",
      [](const std::string& features, const std::string& out,
         const std::string& config, std::optional<std::uint64_t> seed) {
        cmd_train({features, config, out, seed});
      },
      py::arg("features"), py::arg("out"), py::arg("config") = "",
      py::arg("seed") = py::none(),
      "Grid-search and fit a random forest on a feature table.");

  m.def(
      "predict",
      [](const std::string& model, const std::string& features,
         const std::string& out) { cmd_predict({model, features, out}); },
      py::arg("model"), py::arg("features"), py::arg("out"),
      "Score a feature table with a trained model; writes a predictions "
      "CSV.");

  m.def(
      "evaluate",
      [](const std::string& model, const std::string& features,
         const std::string& out) {
        cmd_eval({model, features, out});
        return json_loads(read_file(out));
      },
      py::arg("model"), py::arg("features"), py::arg("out"),
      "Evaluate a model against gold scores; writes and returns the report.");

  m.def(
      "explain",
      [](const std::string& proofs, const std::string& id) {
        std::ostringstream os;
        cmd_explain({proofs, id}, os);
        return os.str();
      },
      py::arg("proofs"), py::arg("id"),
      "Human-readable account of one stored proof pair.");

  m.def(
      "check",
      [](const std::string& corpus, const std::string& proofs,
         const std::string& config) {
        std::ostringstream os;
        cmd_check({corpus, proofs, config}, os);
        return os.str();
      },
      py::arg("corpus"), py::arg("proofs"), py::arg("config") = "",
      "Replay stored axiom-free verdicts against the bounded model oracle.");
}
