#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "beamtune/corpus.hpp"
#include "beamtune/distribution.hpp"
#include "beamtune/evaluation.hpp"
#include "beamtune/experiment.hpp"
#include "beamtune/model_io.hpp"
#include "beamtune/scoring.hpp"
#include "beamtune/search.hpp"
#include "beamtune/table_model.hpp"
#include "beamtune/toy_transducer.hpp"
#include "beamtune/tuning.hpp"
#include "beamtune/vocabulary.hpp"

namespace py = pybind11;

namespace beamtune {
namespace {

// The python layer works in surface strings; ids stay an implementation
// detail of the C++ core.
struct PyHypothesis {
  std::vector<std::string> tokens;
  double score = 0.0;
  bool complete = false;
};

std::vector<PyHypothesis> ranked_to_py(const DecodeResult& result,
                                       const Vocabulary& vocab) {
  std::vector<PyHypothesis> ranked;
  ranked.reserve(result.ranked.size());
  for (const Hypothesis& hyp : result.ranked) {
    ranked.push_back({vocab.decode(hyp.tokens), hyp.base_score, hyp.complete});
  }
  return ranked;
}

std::vector<TokenId> encode_checked(const ConditionalModel& model,
                                    const std::vector<std::string>& tokens,
                                    const char* what) {
  if (tokens.empty()) {
    throw std::invalid_argument(std::string(what) + " must not be empty");
  }
  return model.vocabulary().encode(tokens);
}

std::size_t resolve_max_len(const std::optional<std::size_t>& max_len,
                            std::size_t source_len) {
  return max_len ? *max_len : default_max_len(source_len);
}

// Pairs up python-side token lists into an id corpus under the model's
// vocabulary; unknown words map to <unk>.
ParallelCorpus corpus_from(const ConditionalModel& model,
                           const std::vector<std::vector<std::string>>& sources,
                           const std::vector<std::vector<std::string>>& targets) {
  if (sources.size() != targets.size()) {
    throw std::invalid_argument("sources and targets differ in length: " +
                                std::to_string(sources.size()) + " vs " +
                                std::to_string(targets.size()));
  }
  ParallelCorpus corpus;
  corpus.pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    corpus.pairs.push_back(
        {encode_checked(model, sources[i], "source sentence"),
         model.vocabulary().encode(targets[i])});
  }
  return corpus;
}

std::shared_ptr<ConditionalModel> py_train_model(
    const std::vector<std::vector<std::string>>& sources,
    const std::vector<std::vector<std::string>>& targets, double lambda,
    double k_smooth) {
  if (sources.size() != targets.size()) {
    throw std::invalid_argument("sources and targets differ in length: " +
                                std::to_string(sources.size()) + " vs " +
                                std::to_string(targets.size()));
  }
  Vocabulary vocab;
  const auto grow = [&vocab](const std::vector<std::vector<std::string>>& side) {
    for (const auto& sentence : side) {
      for (const std::string& token : sentence) {
        if (token == Vocabulary::kBosSurface ||
            token == Vocabulary::kEosSurface ||
            token == Vocabulary::kUnkSurface) {
          continue;  // sentinel surfaces in raw text encode as <unk>
        }
        if (!vocab.find(token)) vocab.add(token);
      }
    }
  };
  grow(sources);
  grow(targets);

  ParallelCorpus corpus;
  corpus.pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].empty()) {
      throw std::invalid_argument("source sentence must not be empty");
    }
    corpus.pairs.push_back(
        {vocab.encode(sources[i]), vocab.encode(targets[i])});
  }
  return std::make_shared<ToyTransducer>(
      ToyTransducer::train(corpus, vocab, lambda, k_smooth));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Beam search over locally-normalized sequence models, with length "
      "corrections (length normalization, the GNMT penalty, a per-word "
      "reward), corpus BLEU, and a perceptron tuner for the reward weight.";
  m.attr("__version__") = "1.0.0";

  py::class_<ScoringMode>(m, "ScoringMode",
                          "How hypothesis scores are corrected for length "
                          "during search and final ranking.")
      .def(py::init(&ScoringMode::parse), py::arg("spec"),
           "Parse \"baseline\", \"norm\", \"gnmt:alpha=A\", or "
           "\"reward:gamma=G\".")
      .def_static("baseline", &ScoringMode::baseline)
      .def_static("length_norm", &ScoringMode::length_norm)
      .def_static("gnmt", &ScoringMode::gnmt, py::arg("alpha"))
      .def_static("word_reward", &ScoringMode::word_reward, py::arg("gamma"))
      .def_static("parse", &ScoringMode::parse, py::arg("spec"))
      .def_readonly("alpha", &ScoringMode::alpha)
      .def_readonly("gamma", &ScoringMode::gamma)
      .def("corrected", &ScoringMode::corrected, py::arg("score"),
           py::arg("length"),
           "The corrected score of a hypothesis with the given model score "
           "and word count.")
      .def("__str__", &ScoringMode::to_string)
      .def("__repr__",
           [](const ScoringMode& mode) {
             return "ScoringMode(\"" + mode.to_string() + "\")";
           })
      .def("__eq__",
           [](const ScoringMode& a, const ScoringMode& b) { return a == b; });
  py::implicitly_convertible<py::str, ScoringMode>();

  py::class_<PyHypothesis>(m, "Hypothesis",
                           "One completed output: surface tokens (without "
                           "the end-of-sentence marker) and the model "
                           "log-probability including the final "
                           "end-of-sentence step.")
      .def_readonly("tokens", &PyHypothesis::tokens)
      .def_readonly("score", &PyHypothesis::score)
      .def_readonly("complete", &PyHypothesis::complete)
      .def("__repr__", [](const PyHypothesis& hyp) {
        std::string text = "Hypothesis([";
        for (std::size_t i = 0; i < hyp.tokens.size(); ++i) {
          if (i > 0) text += ", ";
          text += "\"" + hyp.tokens[i] + "\"";
        }
        text += "], score=" + std::to_string(hyp.score) + ")";
        return text;
      });

  py::class_<ConditionalModel, std::shared_ptr<ConditionalModel>>(
      m, "Model",
      "A conditional next-token model; immutable and shareable across "
      "decoding workers.")
      .def_property_readonly(
          "vocab_tokens",
          [](const ConditionalModel& model) {
            std::vector<std::string> tokens;
            tokens.reserve(model.vocabulary().size());
            for (std::size_t id = 0; id < model.vocabulary().size(); ++id) {
              tokens.push_back(
                  model.vocabulary().surface(static_cast<TokenId>(id)));
            }
            return tokens;
          },
          "Every surface token, reserved sentinels first.")
      .def(
          "sequence_logprob",
          [](const ConditionalModel& model,
             const std::vector<std::string>& source,
             const std::vector<std::string>& target) {
            return model.sequence_logprob(
                encode_checked(model, source, "source sentence"),
                model.vocabulary().encode(target));
          },
          py::arg("source"), py::arg("target"),
          "Log-probability of `target` given `source`, including the final "
          "end-of-sentence step.")
      .def(
          "next_token_logprobs",
          [](const ConditionalModel& model,
             const std::vector<std::string>& source,
             const std::vector<std::string>& prefix) {
            const LogDistribution dist = model.next_logprobs(
                encode_checked(model, source, "source sentence"),
                model.vocabulary().encode(prefix));
            py::dict result;
            for (std::size_t id = 0; id < dist.size(); ++id) {
              if (id == Vocabulary::kBos || id == Vocabulary::kUnk) continue;
              result[py::str(model.vocabulary().surface(
                  static_cast<TokenId>(id)))] = dist.logp[id];
            }
            return result;
          },
          py::arg("source"), py::arg("prefix"),
          "The next-token log-distribution after `prefix`, keyed by surface "
          "token (\"</s>\" is the end-of-sentence entry).");

  m.def(
      "table_model_from_text",
      [](const std::string& text) {
        return std::shared_ptr<ConditionalModel>(
            std::make_shared<TableModel>(TableModel::from_spec_text(text)));
      },
      py::arg("text"),
      "Build a table model from its text form: one `context<TAB>token<TAB>"
      "weight` row per line, contexts written as space-joined prefixes with "
      "`*` for the any-source root.");
  m.def("label_bias_model_text",
        []() { return std::string(kLabelBiasModelSpec); },
        "Text form of the bundled greedy-trap model used by the label-bias "
        "demo.");
  m.def("train_model", &py_train_model, py::arg("sources"), py::arg("targets"),
        py::arg("lambda_") = 0.5, py::arg("k_smooth") = 0.5,
        "Train the count-based toy transducer on aligned token lists and "
        "return it as a Model.");
  m.def(
      "save_model",
      [](const ConditionalModel& model, const std::string& path) {
        save_model(model, path);
      },
      py::arg("model"), py::arg("path"),
      "Serialize a model; training the same model twice saves byte-identical "
      "files.");
  m.def(
      "load_model",
      [](const std::string& path) {
        return std::shared_ptr<ConditionalModel>(load_model(path));
      },
      py::arg("path"), "Load a model saved by save_model().");

  m.def("default_max_len", &default_max_len, py::arg("source_len"),
        "The default output length cap for a source of the given length.");

  m.def(
      "greedy_decode",
      [](const ConditionalModel& model, const std::vector<std::string>& source,
         const ScoringMode& mode, std::optional<std::size_t> max_len) {
        const std::vector<TokenId> ids =
            encode_checked(model, source, "source sentence");
        return ranked_to_py(greedy_decode(model, ids, mode,
                                          resolve_max_len(max_len, ids.size())),
                            model.vocabulary());
      },
      py::arg("model"), py::arg("source"),
      py::arg("mode") = ScoringMode::baseline(),
      py::arg("max_len") = std::nullopt,
      "Follow the locally best extension until the end-of-sentence token "
      "wins; returns the single resulting hypothesis.");
  m.def(
      "beam_decode",
      [](const ConditionalModel& model, const std::vector<std::string>& source,
         const ScoringMode& mode, std::size_t beam_size,
         std::optional<std::size_t> max_len) {
        const std::vector<TokenId> ids =
            encode_checked(model, source, "source sentence");
        return ranked_to_py(
            beam_decode(model, ids, mode, beam_size,
                        resolve_max_len(max_len, ids.size())),
            model.vocabulary());
      },
      py::arg("model"), py::arg("source"),
      py::arg("mode") = ScoringMode::baseline(), py::arg("beam_size") = 10,
      py::arg("max_len") = std::nullopt,
      "Beam search; returns the final beam, best hypothesis first.");
  m.def(
      "exhaustive_decode",
      [](const ConditionalModel& model, const std::vector<std::string>& source,
         const ScoringMode& mode, std::optional<std::size_t> max_len,
         std::uint64_t budget_limit) {
        const std::vector<TokenId> ids =
            encode_checked(model, source, "source sentence");
        return ranked_to_py(
            exhaustive_decode(model, ids, mode,
                              resolve_max_len(max_len, ids.size()),
                              budget_limit),
            model.vocabulary());
      },
      py::arg("model"), py::arg("source"),
      py::arg("mode") = ScoringMode::baseline(),
      py::arg("max_len") = std::nullopt,
      py::arg("budget_limit") = kDefaultExhaustiveBudget,
      "Score every word sequence up to max_len and return the full ranking; "
      "refuses to run past `budget_limit` sequences.");
  m.def(
      "decode_corpus",
      [](const ConditionalModel& model,
         const std::vector<std::vector<std::string>>& sources,
         const ScoringMode& mode, std::size_t beam_size, int workers,
         std::optional<std::size_t> max_len) {
        ParallelCorpus corpus;
        corpus.pairs.reserve(sources.size());
        for (const auto& source : sources) {
          corpus.pairs.push_back(
              {encode_checked(model, source, "source sentence"), {}});
        }
        std::vector<std::vector<TokenId>> decoded;
        {
          py::gil_scoped_release release;
          decoded = decode_corpus(model, corpus, mode, beam_size, workers,
                                  max_len);
        }
        std::vector<std::vector<std::string>> result;
        result.reserve(decoded.size());
        for (const auto& tokens : decoded) {
          result.push_back(model.vocabulary().decode(tokens));
        }
        return result;
      },
      py::arg("model"), py::arg("sources"),
      py::arg("mode") = ScoringMode::baseline(), py::arg("beam_size") = 10,
      py::arg("workers") = 1, py::arg("max_len") = std::nullopt,
      "Beam-decode every source sentence; worker count changes only the "
      "wall time, never the outputs.");

  py::class_<BleuScore>(m, "BleuScore",
                        "Unsmoothed corpus BLEU: brevity penalty times the "
                        "geometric mean of clipped n-gram precisions.")
      .def_readonly("score", &BleuScore::score)
      .def_readonly("precisions", &BleuScore::precisions)
      .def_readonly("brevity_penalty", &BleuScore::brevity_penalty)
      .def_readonly("candidate_length", &BleuScore::candidate_length)
      .def_readonly("reference_length", &BleuScore::reference_length)
      .def("__repr__", [](const BleuScore& bleu) {
        return "BleuScore(score=" + std::to_string(bleu.score) + ")";
      });
  m.def("corpus_bleu", &corpus_bleu, py::arg("hypotheses"),
        py::arg("references"), py::arg("max_order") = 4,
        "Corpus-level BLEU with one reference per sentence.");

  py::class_<LengthReport>(m, "LengthReport",
                           "Length statistics of decoded output against its "
                           "references.")
      .def_readonly("ratio", &LengthReport::ratio)
      .def_readonly("mean_sentence_ratio", &LengthReport::mean_sentence_ratio)
      .def_readonly("fraction_empty", &LengthReport::fraction_empty)
      .def_readonly("count", &LengthReport::count)
      .def_readonly("candidate_length", &LengthReport::candidate_length)
      .def_readonly("reference_length", &LengthReport::reference_length)
      .def("__repr__", [](const LengthReport& report) {
        return "LengthReport(ratio=" + std::to_string(report.ratio) +
               ", fraction_empty=" + std::to_string(report.fraction_empty) +
               ")";
      });
  m.def("length_report", &length_report, py::arg("hypotheses"),
        py::arg("references"), py::arg("bin_width") = 0.05,
        "Corpus and per-sentence length ratios plus the share of empty "
        "outputs.");

  py::class_<GradientStep>(m, "GradientStep",
                           "The arithmetic of one tuner epoch: mean lengths, "
                           "the scaled gradient, and the clipped update.")
      .def_readonly("mean_ref_len", &GradientStep::mean_ref_len)
      .def_readonly("mean_hyp_len", &GradientStep::mean_hyp_len)
      .def_readonly("raw_grad", &GradientStep::raw_grad)
      .def_readonly("update", &GradientStep::update);
  m.def("word_reward_gradient_step", &word_reward_gradient_step,
        py::arg("ref_length_total"), py::arg("hyp_length_total"),
        py::arg("sentences"), py::arg("learning_rate"), py::arg("clip"),
        "One perceptron step toward matching mean output length to mean "
        "reference length.");

  py::class_<TunerConfig>(m, "TunerConfig",
                          "Perceptron schedule for the word-reward weight.")
      .def(py::init<>())
      .def_readwrite("initial_gamma", &TunerConfig::initial_gamma)
      .def_readwrite("learning_rate", &TunerConfig::learning_rate)
      .def_readwrite("update_clip", &TunerConfig::update_clip)
      .def_readwrite("tolerance", &TunerConfig::tolerance)
      .def_readwrite("max_epochs", &TunerConfig::max_epochs)
      .def_readwrite("beam_size", &TunerConfig::beam_size)
      .def_readwrite("max_len", &TunerConfig::max_len)
      .def_readwrite("workers", &TunerConfig::workers);

  py::class_<TunerEpoch>(m, "TunerEpoch",
                         "One tuning epoch; `gamma` is the value the epoch "
                         "decoded with, before its own update.")
      .def_readonly("epoch", &TunerEpoch::epoch)
      .def_readonly("gamma", &TunerEpoch::gamma)
      .def_readonly("mean_ref_len", &TunerEpoch::mean_ref_len)
      .def_readonly("mean_hyp_len", &TunerEpoch::mean_hyp_len)
      .def_readonly("raw_grad", &TunerEpoch::raw_grad)
      .def_readonly("update", &TunerEpoch::update)
      .def_readonly("seconds", &TunerEpoch::seconds);

  py::class_<TunerState>(m, "TunerState", "Tuning outcome and epoch history.")
      .def_readonly("gamma", &TunerState::gamma)
      .def_readonly("history", &TunerState::history)
      .def_readonly("stop_reason", &TunerState::stop_reason);

  m.def(
      "tune_word_reward",
      [](const ConditionalModel& model,
         const std::vector<std::vector<std::string>>& sources,
         const std::vector<std::vector<std::string>>& targets,
         const TunerConfig& config) {
        const ParallelCorpus dev = corpus_from(model, sources, targets);
        py::gil_scoped_release release;
        return tune_word_reward(model, dev, config);
      },
      py::arg("model"), py::arg("sources"), py::arg("targets"),
      py::arg("config") = TunerConfig(),
      "Fit the word-reward weight so mean output length matches the "
      "references.");

  py::class_<GammaGridRow>(m, "GammaGridRow",
                           "Quality and length statistics of one full decode "
                           "at a fixed word reward.")
      .def_readonly("gamma", &GammaGridRow::gamma)
      .def_readonly("bleu", &GammaGridRow::bleu)
      .def_readonly("lengths", &GammaGridRow::lengths);
  m.def(
      "evaluate_gamma_grid",
      [](const ConditionalModel& model,
         const std::vector<std::vector<std::string>>& sources,
         const std::vector<std::vector<std::string>>& targets,
         const std::vector<double>& gammas, std::size_t beam_size,
         int workers) {
        const ParallelCorpus dev = corpus_from(model, sources, targets);
        py::gil_scoped_release release;
        return evaluate_gamma_grid(model, dev, gammas, beam_size, workers);
      },
      py::arg("model"), py::arg("sources"), py::arg("targets"),
      py::arg("gammas"), py::arg("beam_size") = 10, py::arg("workers") = 1,
      "Decode once per grid value with that word reward and score each "
      "pass.");
}

}  // namespace beamtune
