#include "sttk/model_file.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "sttk/errors.hpp"

namespace sttk {

namespace {
constexpr int kModelVersion = 1;
}

std::string model_file_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string magic, kind;
  int version = 0;
  in >> magic >> version >> kind;
  if (magic != "sttk-model")
    throw DataError("not a model file: " + path);
  if (version != kModelVersion)
    throw DataError("unsupported model version in " + path);
  return kind;
}

namespace detail {

void write_model_header(std::ostream& out, const std::string& kind,
                        const std::vector<std::string>& labels,
                        const FeatureVocab& vocab) {
  out << "sttk-model " << kModelVersion << " " << kind << "\n";
  out << "labels " << labels.size() << "\n";
  for (const auto& label : labels) out << label << "\n";
  vocab.save(out);
}

ModelFileHead read_model_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("truncated model file: " + path);
  std::istringstream hs(line);
  std::string magic, kind;
  int version = 0;
  hs >> magic >> version >> kind;
  if (magic != "sttk-model")
    throw DataError("not a model file: " + path);
  if (version != kModelVersion)
    throw DataError("unsupported model version in " + path);

  if (!std::getline(in, line)) throw DataError("truncated model file: " + path);
  std::istringstream ls(line);
  std::string tag;
  size_t count = 0;
  ls >> tag >> count;
  if (tag != "labels") throw DataError("malformed model file: " + path);

  ModelFileHead head;
  head.kind = kind;
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line))
      throw DataError("truncated model file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    head.labels.push_back(line);
  }
  head.vocab = FeatureVocab::load(in);
  return head;
}

void write_weight_block(std::ostream& out,
                        const std::vector<double>& weights) {
  out << "weights " << weights.size() << "\n";
  for (double w : weights) {
    uint64_t bits = std::bit_cast<uint64_t>(w);
    char bytes[8];
    for (int b = 0; b < 8; ++b) {
      bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    out.write(bytes, 8);
  }
}

std::vector<double> read_weight_block(std::istream& in, size_t expected,
                                      const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("truncated model file: " + path);
  std::istringstream ws(line);
  std::string tag;
  size_t count = 0;
  ws >> tag >> count;
  if (tag != "weights") throw DataError("malformed model file: " + path);
  if (count != expected)
    throw DataError("weight count mismatch in " + path + " (file has " +
                    std::to_string(count) + ", model needs " +
                    std::to_string(expected) + ")");

  std::vector<double> weights(count);
  for (size_t i = 0; i < count; ++i) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw DataError("truncated model file: " + path);
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[b]))
              << (8 * b);
    }
    weights[i] = std::bit_cast<double>(bits);
  }
  return weights;
}

}  // namespace detail
}  // namespace sttk
