#include "beamtune/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "beamtune/budget_demo.hpp"
#include "beamtune/model_io.hpp"
#include "beamtune/rng.hpp"
#include "beamtune/table_model.hpp"
#include "beamtune/toy_transducer.hpp"

namespace beamtune {
namespace {

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
  return std::string(text.substr(begin, end - begin));
}

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value) {
  char buffer[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

std::string fixed6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw std::invalid_argument("invalid value for config key " + key + ": \"" +
                              value + "\" (" + why + ")");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-' || value[0] == '+') {
    bad_value(key, value, "expected a non-negative integer");
  }
  try {
    std::size_t consumed = 0;
    const std::uint64_t parsed = std::stoull(value, &consumed);
    if (consumed != value.size()) {
      bad_value(key, value, "expected a non-negative integer");
    }
    return parsed;
  } catch (const std::invalid_argument&) {
    bad_value(key, value, "expected a non-negative integer");
  } catch (const std::out_of_range&) {
    bad_value(key, value, "out of range");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

int parse_positive_int(const std::string& key, const std::string& value) {
  const std::uint64_t parsed = parse_u64(key, value);
  if (parsed < 1 || parsed > std::numeric_limits<int>::max()) {
    bad_value(key, value, "expected a positive integer");
  }
  return static_cast<int>(parsed);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size() || !std::isfinite(parsed)) {
      bad_value(key, value, "expected a finite number");
    }
    return parsed;
  } catch (const std::invalid_argument&) {
    bad_value(key, value, "expected a finite number");
  } catch (const std::out_of_range&) {
    bad_value(key, value, "out of range");
  }
}

std::vector<std::string> split_list(const std::string& key,
                                    const std::string& value) {
  std::vector<std::string> items;
  std::size_t begin = 0;
  while (begin <= value.size()) {
    const std::size_t comma = value.find(',', begin);
    const std::size_t end = comma == std::string::npos ? value.size() : comma;
    const std::string item = trim(std::string_view(value).substr(begin, end - begin));
    if (item.empty()) bad_value(key, value, "empty list item");
    items.push_back(item);
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return items;
}

template <typename T>
std::string join_list(const std::vector<T>& items,
                      std::string (*format)(T)) {
  std::string joined;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) joined += ',';
    joined += format(items[i]);
  }
  return joined;
}

// Every recognized key, in dump order.  Parsing validates against this
// list; dump() walks it, so the two can never drift apart.
constexpr const char* kKnownKeys[] = {
    "paths.model", "paths.source", "paths.hypotheses", "paths.references",
    "paths.train_source", "paths.train_target", "paths.dev_source",
    "paths.dev_target", "paths.test_source", "paths.test_target",
    "paths.out_dir",
    "run.seed",
    "data.num_pairs", "data.source_vocab", "data.target_vocab",
    "data.min_len", "data.max_len", "data.fertility_two_prob",
    "data.train_fraction", "data.dev_fraction", "data.test_fraction",
    "train.lambda", "train.k_smooth",
    "scoring.score",
    "search.beam_size", "search.max_len",
    "tuning.initial_gamma", "tuning.learning_rate", "tuning.update_clip",
    "tuning.tolerance", "tuning.max_epochs", "tuning.beam_size",
    "sweep.beam_sizes", "sweep.gammas", "sweep.modes",
};

bool is_known_key(const std::string& key) {
  for (const char* known : kKnownKeys) {
    if (key == known) return true;
  }
  return false;
}

void set_value(ExperimentConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "paths.model") config.model_path = value;
  else if (key == "paths.source") config.source_path = value;
  else if (key == "paths.hypotheses") config.hypotheses_path = value;
  else if (key == "paths.references") config.references_path = value;
  else if (key == "paths.train_source") config.train_source_path = value;
  else if (key == "paths.train_target") config.train_target_path = value;
  else if (key == "paths.dev_source") config.dev_source_path = value;
  else if (key == "paths.dev_target") config.dev_target_path = value;
  else if (key == "paths.test_source") config.test_source_path = value;
  else if (key == "paths.test_target") config.test_target_path = value;
  else if (key == "paths.out_dir") config.out_dir = value;
  else if (key == "run.seed") config.seed = parse_u64(key, value);
  else if (key == "data.num_pairs") config.data.num_pairs = parse_size(key, value);
  else if (key == "data.source_vocab") config.data.source_vocab_size = parse_size(key, value);
  else if (key == "data.target_vocab") config.data.target_vocab_size = parse_size(key, value);
  else if (key == "data.min_len") config.data.min_source_len = parse_size(key, value);
  else if (key == "data.max_len") config.data.max_source_len = parse_size(key, value);
  else if (key == "data.fertility_two_prob") config.data.fertility_two_prob = parse_double(key, value);
  else if (key == "data.train_fraction") config.fractions.train = parse_double(key, value);
  else if (key == "data.dev_fraction") config.fractions.dev = parse_double(key, value);
  else if (key == "data.test_fraction") config.fractions.test = parse_double(key, value);
  else if (key == "train.lambda") config.train_lambda = parse_double(key, value);
  else if (key == "train.k_smooth") config.train_k_smooth = parse_double(key, value);
  else if (key == "scoring.score") config.score = value;
  else if (key == "search.beam_size") config.beam_size = parse_size(key, value);
  else if (key == "search.max_len") {
    config.max_len = value.empty()
                         ? std::nullopt
                         : std::optional<std::size_t>(parse_size(key, value));
  }
  else if (key == "tuning.initial_gamma") config.tuner.initial_gamma = parse_double(key, value);
  else if (key == "tuning.learning_rate") config.tuner.learning_rate = parse_double(key, value);
  else if (key == "tuning.update_clip") config.tuner.update_clip = parse_double(key, value);
  else if (key == "tuning.tolerance") config.tuner.tolerance = parse_double(key, value);
  else if (key == "tuning.max_epochs") config.tuner.max_epochs = parse_positive_int(key, value);
  else if (key == "tuning.beam_size") config.tuner.beam_size = parse_size(key, value);
  else if (key == "sweep.beam_sizes") {
    config.sweep_beam_sizes.clear();
    for (const std::string& item : split_list(key, value)) {
      config.sweep_beam_sizes.push_back(parse_size(key, item));
    }
  } else if (key == "sweep.gammas") {
    config.sweep_gammas.clear();
    for (const std::string& item : split_list(key, value)) {
      config.sweep_gammas.push_back(parse_double(key, item));
    }
  } else if (key == "sweep.modes") {
    config.sweep_modes = split_list(key, value);
  } else {
    throw std::logic_error("set_value missing known key " + key);
  }
}

std::string get_value(const ExperimentConfig& config, const std::string& key) {
  const auto size_text = +[](std::size_t v) { return std::to_string(v); };
  const auto double_text = +[](double v) { return format_double(v); };
  if (key == "paths.model") return config.model_path;
  if (key == "paths.source") return config.source_path;
  if (key == "paths.hypotheses") return config.hypotheses_path;
  if (key == "paths.references") return config.references_path;
  if (key == "paths.train_source") return config.train_source_path;
  if (key == "paths.train_target") return config.train_target_path;
  if (key == "paths.dev_source") return config.dev_source_path;
  if (key == "paths.dev_target") return config.dev_target_path;
  if (key == "paths.test_source") return config.test_source_path;
  if (key == "paths.test_target") return config.test_target_path;
  if (key == "paths.out_dir") return config.out_dir;
  if (key == "run.seed") return std::to_string(config.seed);
  if (key == "data.num_pairs") return std::to_string(config.data.num_pairs);
  if (key == "data.source_vocab") return std::to_string(config.data.source_vocab_size);
  if (key == "data.target_vocab") return std::to_string(config.data.target_vocab_size);
  if (key == "data.min_len") return std::to_string(config.data.min_source_len);
  if (key == "data.max_len") return std::to_string(config.data.max_source_len);
  if (key == "data.fertility_two_prob") return format_double(config.data.fertility_two_prob);
  if (key == "data.train_fraction") return format_double(config.fractions.train);
  if (key == "data.dev_fraction") return format_double(config.fractions.dev);
  if (key == "data.test_fraction") return format_double(config.fractions.test);
  if (key == "train.lambda") return format_double(config.train_lambda);
  if (key == "train.k_smooth") return format_double(config.train_k_smooth);
  if (key == "scoring.score") return config.score;
  if (key == "search.beam_size") return std::to_string(config.beam_size);
  if (key == "search.max_len") {
    return config.max_len ? std::to_string(*config.max_len) : std::string();
  }
  if (key == "tuning.initial_gamma") return format_double(config.tuner.initial_gamma);
  if (key == "tuning.learning_rate") return format_double(config.tuner.learning_rate);
  if (key == "tuning.update_clip") return format_double(config.tuner.update_clip);
  if (key == "tuning.tolerance") return format_double(config.tuner.tolerance);
  if (key == "tuning.max_epochs") return std::to_string(config.tuner.max_epochs);
  if (key == "tuning.beam_size") return std::to_string(config.tuner.beam_size);
  if (key == "sweep.beam_sizes") return join_list(config.sweep_beam_sizes, size_text);
  if (key == "sweep.gammas") return join_list(config.sweep_gammas, double_text);
  if (key == "sweep.modes") {
    std::string joined;
    for (std::size_t i = 0; i < config.sweep_modes.size(); ++i) {
      if (i > 0) joined += ',';
      joined += config.sweep_modes[i];
    }
    return joined;
  }
  throw std::logic_error("get_value missing known key " + key);
}

std::string section_of(const std::string& key) {
  return key.substr(0, key.find('.'));
}

std::filesystem::path joined(const std::string& dir, const std::string& name) {
  return std::filesystem::path(dir) / name;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

void require_path(const std::string& key, const std::string& value) {
  if (value.empty()) {
    throw std::invalid_argument("missing required config path: " + key);
  }
  if (!std::filesystem::exists(value)) {
    throw std::runtime_error("config path does not exist: " + key + " = " +
                             value);
  }
}

// Reads a whitespace-tokenized text file, one sentence per line; leading
// '#' lines are header comments.  Empty lines are empty sentences.
std::vector<Sentence> read_sentence_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open text file: " + path);
  std::vector<Sentence> sentences;
  std::string raw;
  bool in_header = true;
  while (std::getline(in, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (in_header && !raw.empty() && raw[0] == '#') continue;
    in_header = false;
    sentences.push_back(tokenize(raw));
  }
  return sentences;
}

void write_tune_outputs(const std::string& out_dir, const TunerState& state) {
  {
    std::ofstream out = open_for_write(joined(out_dir, "tuner_report.tsv"));
    write_tuner_report_tsv(out, state);
  }
  write_gamma_file(joined(out_dir, "tuned_gamma.txt").string(), state.gamma);
  {
    std::ofstream out = open_for_write(joined(out_dir, "tune_summary.tsv"));
    out << "stop_reason\tepochs\tfinal_gamma\tfinal_mean_ref_len\t"
           "final_mean_hyp_len\n";
    const TunerEpoch& last = state.history.back();
    out << state.stop_reason << '\t' << state.history.size() << '\t'
        << fixed6(state.gamma) << '\t' << fixed6(last.mean_ref_len) << '\t'
        << fixed6(last.mean_hyp_len) << '\n';
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig config;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::invalid_argument("invalid config section on line " +
                                    std::to_string(line_number) + ": \"" +
                                    line + "\"");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) {
        throw std::invalid_argument("invalid config section on line " +
                                    std::to_string(line_number) + ": \"" +
                                    line + "\"");
      }
      continue;
    }
    const std::size_t equals = line.find('=');
    if (equals == std::string::npos) {
      throw std::invalid_argument("invalid config line " +
                                  std::to_string(line_number) +
                                  " (expected key = value): \"" + line + "\"");
    }
    const std::string key = trim(std::string_view(line).substr(0, equals));
    const std::string value = trim(std::string_view(line).substr(equals + 1));
    if (key.empty()) {
      throw std::invalid_argument("invalid config line " +
                                  std::to_string(line_number) +
                                  " (empty key): \"" + line + "\"");
    }
    if (section.empty()) {
      throw std::invalid_argument("config key before any [section]: " + key);
    }
    const std::string full_key = section + "." + key;
    if (!is_known_key(full_key)) {
      throw std::invalid_argument("unknown config key: " + full_key);
    }
    if (!seen.insert(full_key).second) {
      throw std::invalid_argument("duplicate config key: " + full_key);
    }
    set_value(config, full_key, value);
  }
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse(text.str());
  } catch (const std::exception& error) {
    throw std::runtime_error(path + ": " + error.what());
  }
}

void ExperimentConfig::validate() const {
  if (beam_size < 1) {
    throw std::invalid_argument("search beam size must be at least 1");
  }
  tuner.validate();
  data.validate();
  if (sweep_beam_sizes.empty()) {
    throw std::invalid_argument("sweep beam sizes must not be empty");
  }
  for (std::size_t i = 0; i < sweep_beam_sizes.size(); ++i) {
    const bool ascending = i == 0 || sweep_beam_sizes[i - 1] < sweep_beam_sizes[i];
    if (sweep_beam_sizes[i] < 1 || !ascending) {
      throw std::invalid_argument(
          "sweep beam sizes must be positive and strictly ascending");
    }
  }
  if (sweep_gammas.empty()) {
    throw std::invalid_argument("sweep gamma grid must not be empty");
  }
  for (std::size_t i = 0; i < sweep_gammas.size(); ++i) {
    const bool ascending = i == 0 || sweep_gammas[i - 1] < sweep_gammas[i];
    if (!std::isfinite(sweep_gammas[i]) || !ascending) {
      throw std::invalid_argument(
          "sweep gamma grid must be finite and strictly ascending");
    }
  }
  if (sweep_modes.empty()) {
    throw std::invalid_argument("sweep modes must not be empty");
  }
  for (const std::string& spec : sweep_modes) {
    if (spec.rfind("reward:gamma=@", 0) == 0) continue;  // file read at use
    try {
      ScoringMode::parse(spec);
    } catch (const std::exception& error) {
      throw std::invalid_argument("invalid sweep mode \"" + spec +
                                  "\": " + error.what());
    }
  }
}

std::string ExperimentConfig::dump() const {
  std::string text;
  std::string section;
  for (const char* key : kKnownKeys) {
    const std::string full_key(key);
    const std::string key_section = section_of(full_key);
    if (key_section != section) {
      if (!text.empty()) text += '\n';
      text += '[' + key_section + "]\n";
      section = key_section;
    }
    text += full_key.substr(key_section.size() + 1) + " = " +
            get_value(*this, full_key) + '\n';
  }
  return text;
}

ScoringMode resolve_score(const std::string& spec) {
  constexpr std::string_view kFilePrefix = "reward:gamma=@";
  if (spec.rfind(kFilePrefix, 0) == 0) {
    const std::string path = spec.substr(kFilePrefix.size());
    if (path.empty()) {
      throw std::invalid_argument(
          "missing gamma file path in score specification: \"" + spec + "\"");
    }
    return ScoringMode::word_reward(read_gamma_file(path));
  }
  return ScoringMode::parse(spec);
}

int resolve_workers(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) {
      throw std::invalid_argument("worker count must be at least 1");
    }
    return *flag;
  }
  const char* env = std::getenv("BEAMTUNE_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  const std::string value(env);
  try {
    std::size_t consumed = 0;
    const int workers = std::stoi(value, &consumed);
    if (consumed == value.size() && workers >= 1) return workers;
  } catch (const std::exception&) {
    // fall through to the shared diagnostic
  }
  throw std::invalid_argument("invalid BEAMTUNE_WORKERS value: \"" + value +
                              "\"");
}

std::vector<SweepBeamCell> sweep_beam(const ConditionalModel& model,
                                      const ParallelCorpus& corpus,
                                      const std::vector<ScoringMode>& modes,
                                      const std::vector<std::size_t>& beam_sizes,
                                      int workers) {
  if (corpus.empty()) {
    throw std::invalid_argument("cannot sweep an empty corpus");
  }
  if (modes.empty() || beam_sizes.empty()) {
    throw std::invalid_argument(
        "beam sweep needs at least one scoring mode and one beam size");
  }
  const Vocabulary& vocab = model.vocabulary();
  std::vector<Sentence> references;
  references.reserve(corpus.size());
  for (const SentencePair& pair : corpus.pairs) {
    references.push_back(surface_sentence(vocab, pair.target));
  }
  std::vector<SweepBeamCell> cells;
  cells.reserve(modes.size() * beam_sizes.size());
  for (const ScoringMode& mode : modes) {
    for (const std::size_t beam : beam_sizes) {
      const auto decoded = decode_corpus(model, corpus, mode, beam, workers);
      const auto hypotheses = surface_sentences(vocab, decoded);
      SweepBeamCell cell;
      cell.mode_label = mode.to_string();
      cell.beam_size = beam;
      cell.bleu = corpus_bleu(hypotheses, references);
      cell.lengths = length_report(hypotheses, references);
      if (mode.kind == ScoringMode::Kind::kWordReward) {
        cell.gamma = mode.gamma;
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_sweep_beam_tsv(std::ostream& out,
                          const std::vector<SweepBeamCell>& cells) {
  out << "mode\tbeam\tbleu\tlength_ratio\tfraction_empty\tgamma\n";
  for (const SweepBeamCell& cell : cells) {
    out << cell.mode_label << '\t' << cell.beam_size << '\t'
        << fixed6(cell.bleu.score) << '\t' << fixed6(cell.lengths.ratio)
        << '\t' << fixed6(cell.lengths.fraction_empty) << '\t'
        << (cell.gamma ? fixed6(*cell.gamma) : std::string()) << '\n';
  }
}

void write_gamma_grid_tsv(std::ostream& out,
                          const std::vector<GammaGridRow>& rows) {
  out << "gamma\tbleu\tlength_ratio\tfraction_empty\n";
  for (const GammaGridRow& row : rows) {
    out << fixed6(row.gamma) << '\t' << fixed6(row.bleu.score) << '\t'
        << fixed6(row.lengths.ratio) << '\t'
        << fixed6(row.lengths.fraction_empty) << '\n';
  }
}

void write_evaluation_summary_tsv(std::ostream& out, const BleuScore& bleu,
                                  const LengthReport& lengths) {
  out << "bleu\tbrevity_penalty";
  for (std::size_t order = 1; order <= bleu.precisions.size(); ++order) {
    out << "\tp" << order;
  }
  out << "\tcandidate_length\treference_length\tlength_ratio\t"
         "mean_sentence_ratio\tfraction_empty\tsentences\t"
         "excluded_zero_reference\n";
  out << fixed6(bleu.score) << '\t' << fixed6(bleu.brevity_penalty);
  for (const double precision : bleu.precisions) {
    out << '\t' << fixed6(precision);
  }
  out << '\t' << bleu.candidate_length << '\t' << bleu.reference_length
      << '\t' << fixed6(lengths.ratio) << '\t'
      << fixed6(lengths.mean_sentence_ratio) << '\t'
      << fixed6(lengths.fraction_empty) << '\t' << lengths.count << '\t'
      << lengths.excluded_zero_reference << '\n';
}

namespace {

// Exact decimal form of a ratio measured in 1e-4 steps (1500 -> "0.15").
std::string scaled_text(long long scaled) {
  std::string text = std::to_string(scaled / 10000);
  long long fraction = scaled % 10000;
  if (fraction == 0) return text;
  char digits[8];
  std::snprintf(digits, sizeof(digits), "%04lld", fraction);
  std::string fraction_text(digits);
  while (fraction_text.back() == '0') fraction_text.pop_back();
  return text + "." + fraction_text;
}

}  // namespace

void write_length_histogram_tsv(std::ostream& out,
                                const LengthReport& report) {
  const long long width_scaled = std::llround(report.bin_width * 1e4);
  out << "bin\tcount\n";
  out << "exact_0\t" << report.exact_zero << '\n';
  out << "exact_1\t" << report.exact_one << '\n';
  for (std::size_t i = 0; i < report.bins.size(); ++i) {
    const long long lower = static_cast<long long>(i) * width_scaled;
    const long long upper = lower + width_scaled;
    out << '[' << scaled_text(lower) << ',' << scaled_text(std::min(upper, 20000LL))
        << ")\t" << report.bins[i] << '\n';
  }
  out << ">=2\t" << report.overflow << '\n';
  out << "excluded_zero_reference\t" << report.excluded_zero_reference << '\n';
}

void write_cumulative_bleu_tsv(std::ostream& out,
                               const std::vector<CumulativeBleuPoint>& points) {
  out << "max_ref_len\tpairs\tbleu\n";
  for (const CumulativeBleuPoint& point : points) {
    if (std::isinf(point.threshold)) {
      out << "inf";
    } else {
      out << format_double(point.threshold);
    }
    out << '\t' << point.pairs << '\t'
        << (point.bleu ? fixed6(point.bleu->score) : std::string()) << '\n';
  }
}

// Byte-identical to data/label_bias.model.
const char kLabelBiasModelSpec[] =
    "# Hand-built table model in which greedy search and narrow beams commit to\n"
    "# the locally likely first word (\"a\", p=0.6) even though the globally best\n"
    "# complete sentence goes through the rarer first word (\"an\", p=0.4).\n"
    "# Columns: <source-key and prefix> TAB <next token> TAB <probability>.\n"
    "*\ta\t0.6\n"
    "*\tan\t0.4\n"
    "* a\thelicopter\t0.6\n"
    "* a\tchopper\t0.3\n"
    "* a\twhirlybird\t0.1\n"
    "* an\tautogyro\t1\n";

int run_label_bias_demo(std::ostream& out) {
  const TableModel model = TableModel::from_spec_text(kLabelBiasModelSpec);
  const Vocabulary& vocab = model.vocabulary();
  const std::vector<TokenId> source{Vocabulary::kUnk};
  const ScoringMode mode = ScoringMode::baseline();
  const std::size_t max_len = 4;

  const DecodeResult exhaustive =
      exhaustive_decode(model, source, mode, max_len);
  out << "exhaustive ranking (all complete sentences with nonzero "
         "probability):\n";
  out << "rank\tprobability\tsentence\n";
  std::size_t zero_probability = 0;
  for (std::size_t i = 0; i < exhaustive.ranked.size(); ++i) {
    const Hypothesis& hyp = exhaustive.ranked[i];
    if (std::isinf(hyp.base_score)) {
      zero_probability = exhaustive.ranked.size() - i;
      break;
    }
    out << (i + 1) << '\t' << fixed6(std::exp(hyp.base_score)) << '\t'
        << (hyp.tokens.empty() ? std::string("<empty>")
                               : sentence_to_text(hyp.tokens, vocab))
        << '\n';
  }
  out << '(' << zero_probability
      << " zero-probability sequences not shown)\n\n";

  const DecodeResult greedy = greedy_decode(model, source, mode, max_len);
  out << "greedy path (locally best token at each step):\n";
  std::vector<TokenId> prefix;
  for (const TokenId token : greedy.best().tokens) {
    const LogDistribution dist = model.next_logprobs(source, prefix);
    out << "  step " << prefix.size() + 1 << ": " << vocab.surface(token)
        << " (p=" << fixed6(std::exp(dist[token])) << ")\n";
    prefix.push_back(token);
  }
  const LogDistribution final_dist = model.next_logprobs(source, prefix);
  out << "  step " << prefix.size() + 1 << ": " << Vocabulary::kEosSurface
      << " (p=" << fixed6(std::exp(final_dist[Vocabulary::kEos])) << ")\n";
  out << "greedy result: \"" << sentence_to_text(greedy.best().tokens, vocab)
      << "\" (probability " << fixed6(std::exp(greedy.best().base_score))
      << ")\n\n";

  const DecodeResult beam2 =
      beam_decode(model, source, mode, 2, max_len, /*want_trace=*/true);
  out << "beam-2 trace:\n";
  write_trace_tsv(out, beam2.trace, vocab);
  out << "beam-2 result: \"" << sentence_to_text(beam2.best().tokens, vocab)
      << "\" (probability " << fixed6(std::exp(beam2.best().base_score))
      << ")\n\n";

  int failures = 0;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      out << "SELF-CHECK FAILED: " << what << '\n';
    }
  };
  const Hypothesis& best = exhaustive.best();
  check(sentence_to_text(best.tokens, vocab) == "an autogyro",
        "exhaustive winner is \"an autogyro\"");
  check(std::fabs(best.base_score - std::log(0.4)) <= 1e-12,
        "exhaustive winner has probability 0.4");
  check(sentence_to_text(greedy.best().tokens, vocab) == "a helicopter",
        "greedy output is \"a helicopter\"");
  check(std::fabs(greedy.best().base_score - std::log(0.36)) <= 1e-12,
        "greedy output has probability 0.36");
  check(beam2.best().tokens == best.tokens,
        "beam-2 winner matches the exhaustive winner");
  check(std::fabs(beam2.best().base_score - std::log(0.4)) <= 1e-12,
        "beam-2 winner has probability 0.4");
  if (failures == 0) {
    out << "all label-bias demo checks passed\n";
    return 0;
  }
  return 1;
}

BudgetDemoOutcome run_budget_demo(const std::string& out_dir, int workers,
                                  std::ostream& log) {
  if (workers < 1) {
    throw std::invalid_argument("worker count must be at least 1");
  }
  std::filesystem::create_directories(out_dir);
  const BudgetDemo demo = make_budget_demo();
  const Vocabulary& vocab = demo.model.vocabulary();

  BudgetDemoOutcome outcome;
  outcome.trace_sentence = demo.trace_sentence;

  save_model(demo.model, joined(out_dir, "budget.model").string());
  write_parallel(demo.dev, vocab, joined(out_dir, "budget_dev.src").string(),
                 joined(out_dir, "budget_dev.tgt").string(),
                 "budget demo dev split");
  write_parallel(demo.test, vocab, joined(out_dir, "budget_test.src").string(),
                 joined(out_dir, "budget_test.tgt").string(),
                 "budget demo test split");
  log << "budget demo: " << demo.dev.size() << " dev / " << demo.test.size()
      << " test sentences\n";

  const std::vector<std::size_t> baseline_beams{1, 2, 5, 10, 25, 50, 100};
  outcome.baseline_cells =
      sweep_beam(demo.model, demo.test, {ScoringMode::baseline()},
                 baseline_beams, workers);
  {
    std::ofstream out = open_for_write(joined(out_dir, "baseline_sweep.tsv"));
    write_sweep_beam_tsv(out, outcome.baseline_cells);
  }
  for (const SweepBeamCell& cell : outcome.baseline_cells) {
    log << "uncorrected beam " << cell.beam_size << ": length ratio "
        << fixed6(cell.lengths.ratio) << ", fraction empty "
        << fixed6(cell.lengths.fraction_empty) << '\n';
  }

  const SentencePair& trace_pair = demo.test.pairs[demo.trace_sentence];
  const DecodeResult traced = beam_decode(
      demo.model, trace_pair.source, ScoringMode::baseline(), 100,
      default_max_len(trace_pair.source.size()), /*want_trace=*/true);
  outcome.trace = traced.trace;
  {
    std::ofstream out = open_for_write(joined(out_dir, "budget_trace.tsv"));
    write_trace_tsv(out, outcome.trace, vocab);
  }
  {
    std::ofstream out =
        open_for_write(joined(out_dir, "budget_empty_rank.tsv"));
    out << "step\tempty_rank\n";
    for (const BeamTraceStep& step : outcome.trace.steps) {
      out << step.step << '\t';
      if (step.empty_candidate_rank) out << *step.empty_candidate_rank;
      out << '\n';
    }
  }
  log << "empty-output rank by step (test sentence " << demo.trace_sentence
      << "):";
  for (const BeamTraceStep& step : outcome.trace.steps) {
    if (step.empty_candidate_rank) log << ' ' << *step.empty_candidate_rank;
  }
  log << '\n';

  TunerConfig tuner_config;
  tuner_config.workers = workers;
  outcome.tuner = tune_word_reward(demo.model, demo.dev, tuner_config);
  write_tune_outputs(out_dir, outcome.tuner);
  log << "tuner stopped (" << outcome.tuner.stop_reason << ") after "
      << outcome.tuner.history.size() << " epochs; word reward = "
      << fixed6(outcome.tuner.gamma) << '\n';

  outcome.tuned_cells =
      sweep_beam(demo.model, demo.test,
                 {ScoringMode::word_reward(outcome.tuner.gamma)},
                 {1, 10, 100}, workers);
  {
    std::ofstream out = open_for_write(joined(out_dir, "tuned_sweep.tsv"));
    write_sweep_beam_tsv(out, outcome.tuned_cells);
  }
  for (const SweepBeamCell& cell : outcome.tuned_cells) {
    log << "tuned beam " << cell.beam_size << ": length ratio "
        << fixed6(cell.lengths.ratio) << ", bleu "
        << fixed6(cell.bleu.score) << '\n';
  }

  const auto decoded = decode_corpus(demo.model, demo.test,
                                     ScoringMode::baseline(), 100, workers);
  const auto hypotheses = surface_sentences(vocab, decoded);
  std::vector<Sentence> references;
  references.reserve(demo.test.size());
  for (const SentencePair& pair : demo.test.pairs) {
    references.push_back(surface_sentence(vocab, pair.target));
  }
  const std::vector<double> thresholds{
      6, 8, 10, 12, 14, std::numeric_limits<double>::infinity()};
  outcome.cumulative =
      cumulative_bleu_by_length(hypotheses, references, thresholds);
  {
    std::ofstream out =
        open_for_write(joined(out_dir, "baseline_cumulative_bleu.tsv"));
    write_cumulative_bleu_tsv(out, outcome.cumulative);
  }
  log << "reports written to " << out_dir << '\n';
  return outcome;
}

void run_gen_data(const ExperimentConfig& config, std::ostream& log) {
  SyntheticTaskConfig data = config.data;
  data.seed = config.seed;
  const LoadedCorpus loaded = generate_synthetic(data);
  const SplitResult parts = split(loaded.corpus, config.fractions, config.seed);
  std::filesystem::create_directories(config.out_dir);
  const std::string header = "seed=" + std::to_string(config.seed) +
                             " generator=" + std::string(Rng::kName);
  write_parallel(parts.train, loaded.vocabulary,
                 joined(config.out_dir, "train.src").string(),
                 joined(config.out_dir, "train.tgt").string(), header);
  write_parallel(parts.dev, loaded.vocabulary,
                 joined(config.out_dir, "dev.src").string(),
                 joined(config.out_dir, "dev.tgt").string(), header);
  write_parallel(parts.test, loaded.vocabulary,
                 joined(config.out_dir, "test.src").string(),
                 joined(config.out_dir, "test.tgt").string(), header);
  log << "generated " << loaded.corpus.size() << " pairs (train "
      << parts.train.size() << ", dev " << parts.dev.size() << ", test "
      << parts.test.size() << ") under " << config.out_dir << '\n';
}

void run_train(const ExperimentConfig& config, std::ostream& log) {
  require_path("paths.train_source", config.train_source_path);
  require_path("paths.train_target", config.train_target_path);
  const LoadedCorpus train =
      load_parallel(config.train_source_path, config.train_target_path);
  const ToyTransducer model = ToyTransducer::train(
      train.corpus, train.vocabulary, config.train_lambda,
      config.train_k_smooth);
  std::filesystem::create_directories(config.out_dir);
  const std::string model_path = joined(config.out_dir, "model.bin").string();
  save_model(model, model_path);
  log << "trained on " << train.corpus.size() << " pairs (vocabulary "
      << train.vocabulary.size() << " tokens) -> " << model_path << '\n';
}

void run_decode(const ExperimentConfig& config, int workers,
                std::ostream& log) {
  require_path("paths.model", config.model_path);
  require_path("paths.source", config.source_path);
  const std::unique_ptr<ConditionalModel> model = load_model(config.model_path);
  const ScoringMode mode = resolve_score(config.score);
  const std::vector<Sentence> lines = read_sentence_lines(config.source_path);
  ParallelCorpus corpus;
  corpus.pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      throw std::invalid_argument("empty source sentence at line " +
                                  std::to_string(i + 1) + " of " +
                                  config.source_path);
    }
    SentencePair pair;
    pair.source = model->vocabulary().encode(lines[i]);
    corpus.pairs.push_back(std::move(pair));
  }
  const auto decoded = decode_corpus(*model, corpus, mode, config.beam_size,
                                     workers, config.max_len);
  std::filesystem::create_directories(config.out_dir);
  const std::string out_path =
      joined(config.out_dir, "hypotheses.txt").string();
  {
    std::ofstream out = open_for_write(out_path);
    for (const auto& tokens : decoded) {
      out << sentence_to_text(tokens, model->vocabulary()) << '\n';
    }
  }
  log << "decoded " << decoded.size() << " sentences (score "
      << mode.to_string() << ", beam " << config.beam_size << ") -> "
      << out_path << '\n';
}

void run_tune(const ExperimentConfig& config, int workers, std::ostream& log) {
  require_path("paths.model", config.model_path);
  require_path("paths.dev_source", config.dev_source_path);
  require_path("paths.dev_target", config.dev_target_path);
  const std::unique_ptr<ConditionalModel> model = load_model(config.model_path);
  const LoadedCorpus dev =
      load_parallel(config.dev_source_path, config.dev_target_path,
                    VocabPolicy::use(model->vocabulary()));
  TunerConfig tuner_config = config.tuner;
  tuner_config.workers = workers;
  tuner_config.max_len = config.max_len;
  const TunerState state = tune_word_reward(*model, dev.corpus, tuner_config);
  std::filesystem::create_directories(config.out_dir);
  write_tune_outputs(config.out_dir, state);
  log << "tuner stopped (" << state.stop_reason << ") after "
      << state.history.size() << " epochs; word reward = "
      << fixed6(state.gamma) << " -> "
      << joined(config.out_dir, "tuned_gamma.txt").string() << '\n';
}

void run_evaluate(const ExperimentConfig& config, std::ostream& log) {
  require_path("paths.hypotheses", config.hypotheses_path);
  require_path("paths.references", config.references_path);
  const std::vector<Sentence> hypotheses =
      read_sentence_lines(config.hypotheses_path);
  const std::vector<Sentence> references =
      read_sentence_lines(config.references_path);
  const BleuScore bleu = corpus_bleu(hypotheses, references);
  const LengthReport lengths = length_report(hypotheses, references);
  const std::vector<double> thresholds{
      5, 10, 15, 20, 25, 30, std::numeric_limits<double>::infinity()};
  const std::vector<CumulativeBleuPoint> curve =
      cumulative_bleu_by_length(hypotheses, references, thresholds);
  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream out =
        open_for_write(joined(config.out_dir, "evaluation_summary.tsv"));
    write_evaluation_summary_tsv(out, bleu, lengths);
  }
  {
    std::ofstream out =
        open_for_write(joined(config.out_dir, "length_histogram.tsv"));
    write_length_histogram_tsv(out, lengths);
  }
  {
    std::ofstream out =
        open_for_write(joined(config.out_dir, "cumulative_bleu.tsv"));
    write_cumulative_bleu_tsv(out, curve);
  }
  log << "bleu " << fixed6(bleu.score) << ", length ratio "
      << fixed6(lengths.ratio) << ", fraction empty "
      << fixed6(lengths.fraction_empty) << " over " << lengths.count
      << " sentences -> " << config.out_dir << '\n';
}

void run_sweep_beam(const ExperimentConfig& config, int workers,
                    std::ostream& log) {
  require_path("paths.model", config.model_path);
  require_path("paths.test_source", config.test_source_path);
  require_path("paths.test_target", config.test_target_path);
  const std::unique_ptr<ConditionalModel> model = load_model(config.model_path);
  const LoadedCorpus test =
      load_parallel(config.test_source_path, config.test_target_path,
                    VocabPolicy::use(model->vocabulary()));
  std::vector<ScoringMode> modes;
  modes.reserve(config.sweep_modes.size());
  for (const std::string& spec : config.sweep_modes) {
    modes.push_back(resolve_score(spec));
  }
  const std::vector<SweepBeamCell> cells = sweep_beam(
      *model, test.corpus, modes, config.sweep_beam_sizes, workers);
  std::filesystem::create_directories(config.out_dir);
  const std::string out_path = joined(config.out_dir, "beam_sweep.tsv").string();
  {
    std::ofstream out = open_for_write(out_path);
    write_sweep_beam_tsv(out, cells);
  }
  log << "beam sweep: " << modes.size() << " modes x "
      << config.sweep_beam_sizes.size() << " beams -> " << out_path << '\n';
}

void run_sweep_gamma(const ExperimentConfig& config, bool use_budget_demo,
                     int workers, std::ostream& log) {
  std::vector<GammaGridRow> rows;
  if (use_budget_demo) {
    const BudgetDemo demo = make_budget_demo();
    rows = evaluate_gamma_grid(demo.model, demo.test, config.sweep_gammas,
                               config.beam_size, workers);
  } else {
    require_path("paths.model", config.model_path);
    require_path("paths.test_source", config.test_source_path);
    require_path("paths.test_target", config.test_target_path);
    const std::unique_ptr<ConditionalModel> model =
        load_model(config.model_path);
    const LoadedCorpus test =
        load_parallel(config.test_source_path, config.test_target_path,
                      VocabPolicy::use(model->vocabulary()));
    rows = evaluate_gamma_grid(*model, test.corpus, config.sweep_gammas,
                               config.beam_size, workers);
  }
  std::filesystem::create_directories(config.out_dir);
  const std::string out_path =
      joined(config.out_dir, "gamma_sweep.tsv").string();
  {
    std::ofstream out = open_for_write(out_path);
    write_gamma_grid_tsv(out, rows);
  }
  log << "gamma sweep: " << rows.size() << " grid points (beam "
      << config.beam_size << ") -> " << out_path << '\n';
}

}  // namespace beamtune
