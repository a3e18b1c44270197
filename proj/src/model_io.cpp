#include "beamtune/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "beamtune/table_model.hpp"
#include "beamtune/toy_transducer.hpp"

namespace beamtune {

namespace {

constexpr char kMagic[4] = {'B', 'T', 'M', 'D'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kKindTable = 0;
constexpr std::uint8_t kKindToy = 1;

class Writer {
 public:
  explicit Writer(const std::string& path)
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }
  void bytes(const void* data, std::size_t len) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(len));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("failed writing model file " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open model file: " + path);
  }
  void bytes(void* data, std::size_t len) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len) {
      throw std::runtime_error("unexpected end of model file");
    }
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint32_t len = u32();
    if (len > (1u << 20)) {
      throw std::runtime_error("implausible string length in model file");
    }
    std::string s(len, '\0');
    if (len > 0) bytes(s.data(), len);
    return s;
  }

 private:
  std::ifstream in_;
};

void write_vocabulary(Writer& w, const Vocabulary& vocab) {
  w.u64(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    w.str(vocab.surface(static_cast<TokenId>(id)));
  }
}

Vocabulary read_vocabulary(Reader& r) {
  std::uint64_t count = r.u64();
  if (count < Vocabulary::kNumReserved) {
    throw std::runtime_error("model file vocabulary is missing the sentinels");
  }
  Vocabulary vocab;
  for (std::uint64_t id = 0; id < count; ++id) {
    std::string surface = r.str();
    if (id < Vocabulary::kNumReserved) {
      if (surface != vocab.surface(static_cast<TokenId>(id))) {
        throw std::runtime_error(
            "model file vocabulary has unexpected sentinel \"" + surface +
            "\"");
      }
      continue;
    }
    vocab.add(surface);
  }
  return vocab;
}

void save_table_model(Writer& w, const TableModel& model) {
  w.u64(model.row_count());
  model.visit_rows([&](const SourceKey& key, const std::vector<TokenId>& prefix,
                       const TableModel::Row& row) {
    w.u8(key.any_source ? 1 : 0);
    if (!key.any_source) {
      w.u64(key.source.size());
      for (TokenId id : key.source) w.i32(id);
    }
    w.u64(prefix.size());
    for (TokenId id : prefix) w.i32(id);
    w.u64(row.entries.size());
    for (const auto& [id, prob] : row.entries) {
      w.i32(id);
      w.f64(prob);
    }
    w.i32(row.filler_begin);
    w.i32(row.filler_end);
    w.f64(row.filler_prob);
  });
}

std::unique_ptr<ConditionalModel> load_table_model(Reader& r,
                                                   Vocabulary vocab) {
  auto model = std::make_unique<TableModel>(std::move(vocab));
  std::uint64_t rows = r.u64();
  for (std::uint64_t i = 0; i < rows; ++i) {
    SourceKey key;
    key.any_source = r.u8() != 0;
    if (!key.any_source) {
      std::uint64_t n = r.u64();
      key.source.reserve(n);
      for (std::uint64_t j = 0; j < n; ++j) key.source.push_back(r.i32());
    }
    std::uint64_t prefix_len = r.u64();
    std::vector<TokenId> prefix;
    prefix.reserve(prefix_len);
    for (std::uint64_t j = 0; j < prefix_len; ++j) prefix.push_back(r.i32());
    TableModel::Row row;
    std::uint64_t entries = r.u64();
    row.entries.reserve(entries);
    for (std::uint64_t j = 0; j < entries; ++j) {
      TokenId id = r.i32();
      double prob = r.f64();
      row.entries.emplace_back(id, prob);
    }
    row.filler_begin = r.i32();
    row.filler_end = r.i32();
    row.filler_prob = r.f64();
    model->set_row(key, prefix, std::move(row));
  }
  return model;
}

void save_toy_model(Writer& w, const ToyTransducer& model) {
  w.f64(model.lambda());
  w.f64(model.k_smooth());
  auto write_counts = [&](const ToyTransducer::CountMap& counts) {
    w.u64(counts.size());
    for (const auto& [key, count] : counts) {
      w.i32(key.first);
      w.i32(key.second);
      w.u64(count);
    }
  };
  write_counts(model.bigram_counts());
  write_counts(model.cooccurrence_counts());
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      w.u64(model.stop_counts()[i][j]);
      w.u64(model.step_counts()[i][j]);
    }
  }
}

std::unique_ptr<ConditionalModel> load_toy_model(Reader& r, Vocabulary vocab) {
  double lambda = r.f64();
  double k_smooth = r.f64();
  auto read_counts = [&](ToyTransducer::CountMap& counts) {
    std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      TokenId a = r.i32();
      TokenId b = r.i32();
      std::uint64_t count = r.u64();
      counts[{a, b}] = count;
    }
  };
  ToyTransducer::CountMap bigram;
  ToyTransducer::CountMap cooc;
  read_counts(bigram);
  read_counts(cooc);
  ToyTransducer::EosGrid stops;
  ToyTransducer::EosGrid total;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      stops[i][j] = r.u64();
      total[i][j] = r.u64();
    }
  }
  return std::make_unique<ToyTransducer>(ToyTransducer::from_parts(
      std::move(vocab), lambda, k_smooth, std::move(bigram), std::move(cooc),
      stops, total));
}

}  // namespace

void save_model(const ConditionalModel& model, const std::string& path) {
  Writer w(path);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  if (const auto* table = dynamic_cast<const TableModel*>(&model)) {
    w.u8(kKindTable);
    write_vocabulary(w, model.vocabulary());
    save_table_model(w, *table);
  } else if (const auto* toy = dynamic_cast<const ToyTransducer*>(&model)) {
    w.u8(kKindToy);
    write_vocabulary(w, model.vocabulary());
    save_toy_model(w, *toy);
  } else {
    throw std::invalid_argument("unsupported model kind for persistence");
  }
  w.finish();
}

std::unique_ptr<ConditionalModel> load_model(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  for (int i = 0; i < 4; ++i) {
    if (magic[i] != kMagic[i]) throw std::runtime_error("not a model file");
  }
  std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("unsupported model file version " +
                             std::to_string(version));
  }
  std::uint8_t kind = r.u8();
  Vocabulary vocab = read_vocabulary(r);
  if (kind == kKindTable) return load_table_model(r, std::move(vocab));
  if (kind == kKindToy) return load_toy_model(r, std::move(vocab));
  throw std::runtime_error("unknown model kind " + std::to_string(kind) +
                           " in model file");
}

}  // namespace beamtune
