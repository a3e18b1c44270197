#include "beamtune/cli.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "beamtune/experiment.hpp"

namespace beamtune {
namespace {

// One shared value store: exactly one subcommand parses per invocation, so
// the flags of the active subcommand are the only writers.
struct CliState {
  std::string config_path;
  std::string out_dir;
  std::string score;
  std::string model;
  std::string source;
  std::string hypotheses;
  std::string references;
  std::string train_source, train_target;
  std::string dev_source, dev_target;
  std::string test_source, test_target;
  std::uint64_t seed = 0;
  std::size_t beam = 0;
  int workers = 0;
  bool dump_defaults = false;
  bool demo_budget = false;
};

// The options a subcommand registered, so overrides apply only when the
// flag was actually given.
struct CommandFlags {
  CLI::Option* config = nullptr;
  CLI::Option* out_dir = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* score = nullptr;
  CLI::Option* beam = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* model = nullptr;
  CLI::Option* source = nullptr;
  CLI::Option* hypotheses = nullptr;
  CLI::Option* references = nullptr;
  CLI::Option* train_source = nullptr;
  CLI::Option* train_target = nullptr;
  CLI::Option* dev_source = nullptr;
  CLI::Option* dev_target = nullptr;
  CLI::Option* test_source = nullptr;
  CLI::Option* test_target = nullptr;
};

bool given(const CLI::Option* option) {
  return option != nullptr && option->count() > 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Sequence decoding workbench: beam search over locally-normalized "
      "models, length corrections, reward tuning, and sweep reports."};
  app.require_subcommand(1);

  CliState state;
  std::map<const CLI::App*, CommandFlags> flags_by_command;

  const auto add_config = [&](CLI::App* cmd) -> CommandFlags& {
    CommandFlags& flags = flags_by_command[cmd];
    flags.config =
        cmd->add_option("--config", state.config_path, "experiment config file");
    flags.out_dir =
        cmd->add_option("--out-dir", state.out_dir, "report output directory");
    return flags;
  };
  const auto add_workers = [&](CLI::App* cmd, CommandFlags& flags) {
    flags.workers = cmd->add_option(
        "--workers", state.workers,
        "decode worker threads (default: BEAMTUNE_WORKERS or 1); never "
        "changes output bytes");
  };

  CLI::App* gen_data = app.add_subcommand(
      "gen-data", "generate a synthetic parallel corpus and split it");
  {
    CommandFlags& flags = add_config(gen_data);
    flags.seed = gen_data->add_option("--seed", state.seed,
                                      "seed for all generated randomness");
  }

  CLI::App* train = app.add_subcommand(
      "train", "train the count-based toy model on a parallel corpus");
  {
    CommandFlags& flags = add_config(train);
    flags.train_source =
        train->add_option("--train-source", state.train_source,
                          "training source sentences, one per line");
    flags.train_target =
        train->add_option("--train-target", state.train_target,
                          "training target sentences, one per line");
  }

  CLI::App* decode = app.add_subcommand(
      "decode", "beam-decode a source file and write hypotheses");
  {
    CommandFlags& flags = add_config(decode);
    flags.model = decode->add_option("--model", state.model, "model file");
    flags.source = decode->add_option("--source", state.source,
                                      "source sentences, one per line");
    flags.score = decode->add_option(
        "--score", state.score,
        "scoring mode: baseline | norm | gnmt:alpha=A | reward:gamma=G | "
        "reward:gamma=@file");
    flags.beam = decode->add_option("--beam", state.beam, "beam size");
    add_workers(decode, flags);
  }

  CLI::App* tune = app.add_subcommand(
      "tune", "fit the word reward on a dev corpus and write the gamma file");
  {
    CommandFlags& flags = add_config(tune);
    flags.model = tune->add_option("--model", state.model, "model file");
    flags.dev_source = tune->add_option("--dev-source", state.dev_source,
                                        "dev source sentences");
    flags.dev_target = tune->add_option("--dev-target", state.dev_target,
                                        "dev reference sentences");
    add_workers(tune, flags);
  }

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score hypotheses against references and write reports");
  {
    CommandFlags& flags = add_config(evaluate);
    flags.hypotheses = evaluate->add_option(
        "--hypotheses", state.hypotheses, "system output, one line per input");
    flags.references = evaluate->add_option(
        "--references", state.references, "references, one line per input");
  }

  CLI::App* sweep_beam_cmd = app.add_subcommand(
      "sweep-beam",
      "decode the test set at every (mode, beam) cell and tabulate quality");
  {
    CommandFlags& flags = add_config(sweep_beam_cmd);
    flags.model =
        sweep_beam_cmd->add_option("--model", state.model, "model file");
    flags.test_source = sweep_beam_cmd->add_option(
        "--test-source", state.test_source, "test source sentences");
    flags.test_target = sweep_beam_cmd->add_option(
        "--test-target", state.test_target, "test reference sentences");
    add_workers(sweep_beam_cmd, flags);
  }

  CLI::App* sweep_gamma_cmd = app.add_subcommand(
      "sweep-gamma",
      "decode the test set across the word-reward grid and tabulate quality");
  {
    CommandFlags& flags = add_config(sweep_gamma_cmd);
    flags.model =
        sweep_gamma_cmd->add_option("--model", state.model, "model file");
    flags.test_source = sweep_gamma_cmd->add_option(
        "--test-source", state.test_source, "test source sentences");
    flags.test_target = sweep_gamma_cmd->add_option(
        "--test-target", state.test_target, "test reference sentences");
    flags.beam =
        sweep_gamma_cmd->add_option("--beam", state.beam, "beam size");
    sweep_gamma_cmd->add_flag("--demo-budget", state.demo_budget,
                              "sweep the built-in budget demo instead of a "
                              "model/corpus from disk");
    add_workers(sweep_gamma_cmd, flags);
  }

  CLI::App* demo_label_bias = app.add_subcommand(
      "demo-label-bias",
      "show greedy search committing to the wrong first word; self-checking");
  (void)demo_label_bias;

  CLI::App* demo_budget_cmd = app.add_subcommand(
      "demo-budget",
      "show wide uncorrected beams preferring empty outputs, then repair "
      "them with a tuned word reward");
  {
    CommandFlags& flags = add_config(demo_budget_cmd);
    add_workers(demo_budget_cmd, flags);
  }

  CLI::App* config_cmd = app.add_subcommand(
      "config", "print the resolved configuration (or the defaults)");
  {
    CommandFlags& flags = add_config(config_cmd);
    flags.seed =
        config_cmd->add_option("--seed", state.seed, "override run.seed");
    flags.score =
        config_cmd->add_option("--score", state.score, "override scoring.score");
    flags.beam = config_cmd->add_option("--beam", state.beam,
                                        "override search.beam_size");
    config_cmd->add_flag("--dump-defaults", state.dump_defaults,
                         "print the built-in defaults and ignore overrides");
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& parse_error) {
      return app.exit(parse_error, out, err);
    }

    CLI::App* active = app.get_subcommands().front();
    const CommandFlags& flags = flags_by_command[active];

    ExperimentConfig config = given(flags.config)
                                  ? ExperimentConfig::load(state.config_path)
                                  : ExperimentConfig::defaults();
    if (given(flags.out_dir)) config.out_dir = state.out_dir;
    if (given(flags.seed)) config.seed = state.seed;
    if (given(flags.score)) config.score = state.score;
    if (given(flags.beam)) {
      if (state.beam < 1) {
        throw std::invalid_argument("search beam size must be at least 1");
      }
      config.beam_size = state.beam;
    }
    if (given(flags.model)) config.model_path = state.model;
    if (given(flags.source)) config.source_path = state.source;
    if (given(flags.hypotheses)) config.hypotheses_path = state.hypotheses;
    if (given(flags.references)) config.references_path = state.references;
    if (given(flags.train_source)) config.train_source_path = state.train_source;
    if (given(flags.train_target)) config.train_target_path = state.train_target;
    if (given(flags.dev_source)) config.dev_source_path = state.dev_source;
    if (given(flags.dev_target)) config.dev_target_path = state.dev_target;
    if (given(flags.test_source)) config.test_source_path = state.test_source;
    if (given(flags.test_target)) config.test_target_path = state.test_target;

    const int workers = resolve_workers(
        given(flags.workers) ? std::optional<int>(state.workers)
                             : std::nullopt);

    if (active == gen_data) {
      run_gen_data(config, out);
    } else if (active == train) {
      run_train(config, out);
    } else if (active == decode) {
      run_decode(config, workers, out);
    } else if (active == tune) {
      run_tune(config, workers, out);
    } else if (active == evaluate) {
      run_evaluate(config, out);
    } else if (active == sweep_beam_cmd) {
      run_sweep_beam(config, workers, out);
    } else if (active == sweep_gamma_cmd) {
      run_sweep_gamma(config, state.demo_budget, workers, out);
    } else if (active == demo_label_bias) {
      return run_label_bias_demo(out);
    } else if (active == demo_budget_cmd) {
      run_budget_demo(config.out_dir, workers, out);
    } else if (active == config_cmd) {
      out << (state.dump_defaults ? ExperimentConfig::defaults().dump()
                                  : config.dump());
    } else {
      throw std::logic_error("unhandled subcommand " + active->get_name());
    }
    return 0;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << '\n';
    return 1;
  }
}

}  // namespace beamtune
