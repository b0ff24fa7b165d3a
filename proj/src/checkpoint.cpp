#include "devseq/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace devseq {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& cfg) {
  json j;
  j["word_emb_dim"] = cfg.word_emb_dim;
  j["word_emb_trainable"] = cfg.word_emb_trainable;
  j["hidden_size"] = cfg.hidden_size;
  j["subword"] = to_string(cfg.subword);
  j["subword_emb_dim"] = cfg.subword_emb_dim;
  j["cnn_filter_widths"] = cfg.cnn_filter_widths;
  j["cnn_filters_per_width"] = cfg.cnn_filters_per_width;
  j["cnn_output_dim"] = cfg.cnn_output_dim;
  j["use_pos"] = cfg.use_pos;
  j["use_crf"] = cfg.use_crf;
  j["dropout_rate"] = cfg.dropout_rate;
  j["tag_set"] = cfg.tag_set;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.word_emb_dim = j.at("word_emb_dim").get<int>();
  cfg.word_emb_trainable = j.at("word_emb_trainable").get<bool>();
  cfg.hidden_size = j.at("hidden_size").get<int>();
  cfg.subword = subword_mode_from_string(j.at("subword").get<std::string>());
  cfg.subword_emb_dim = j.at("subword_emb_dim").get<int>();
  cfg.cnn_filter_widths = j.at("cnn_filter_widths").get<std::vector<int>>();
  cfg.cnn_filters_per_width = j.at("cnn_filters_per_width").get<int>();
  cfg.cnn_output_dim = j.at("cnn_output_dim").get<int>();
  cfg.use_pos = j.at("use_pos").get<bool>();
  cfg.use_crf = j.at("use_crf").get<bool>();
  cfg.dropout_rate = j.at("dropout_rate").get<double>();
  cfg.tag_set = j.at("tag_set").get<std::vector<std::string>>();
  return cfg;
}

void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t read_u64_le(const std::string& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

}  // namespace

std::string serialize_checkpoint(const SequenceLabeler& model,
                                 const std::string& train_config_json) {
  json header;
  header["format_version"] = 1;
  header["model_config"] = config_to_json(model.config());
  header["word_vocab"] = model.word_vocab().words();
  header["subword_vocab"] = model.subword_vocab().words();
  header["pos_vocab"] = model.pos_vocab();
  if (!train_config_json.empty()) {
    header["train_config"] = json::parse(train_config_json);
  }

  json params = json::array();
  std::uint64_t offset = 0;
  const auto all = model.all_parameters();
  for (const Parameter* p : all) {
    json entry;
    entry["name"] = p->name;
    entry["shape"] = p->shape;
    entry["offset"] = offset;
    entry["count"] = p->size();
    params.push_back(entry);
    offset += p->size();
  }
  header["params"] = params;

  const std::string header_text = header.dump();
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  append_u64_le(out, header_text.size());
  out += header_text;
  for (const Parameter* p : all) {
    const std::size_t bytes = p->size() * sizeof(double);
    const std::size_t pos = out.size();
    out.resize(pos + bytes);
    std::memcpy(out.data() + pos, p->value.data(), bytes);
  }
  return out;
}

SequenceLabeler deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 8 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw std::runtime_error("not a devseq checkpoint (bad magic)");
  }
  const std::uint64_t header_len = read_u64_le(bytes, sizeof kCheckpointMagic);
  const std::size_t header_begin = sizeof(kCheckpointMagic) + 8;
  if (bytes.size() < header_begin + header_len) {
    throw std::runtime_error("truncated checkpoint header");
  }
  const json header = json::parse(bytes.substr(header_begin, header_len));
  if (header.at("format_version").get<int>() != 1) {
    throw std::runtime_error("unsupported checkpoint format version");
  }

  const ModelConfig cfg = config_from_json(header.at("model_config"));
  Vocabulary word_vocab(header.at("word_vocab").get<std::vector<std::string>>());
  Vocabulary subword_vocab(header.at("subword_vocab").get<std::vector<std::string>>());
  auto pos_vocab = header.at("pos_vocab").get<std::vector<std::string>>();

  // Zero-policy table: the constructor fills rows that the payload then
  // overwrites.
  EmbeddingTable placeholder(cfg.word_emb_dim, OovPolicy::Zero, 0, cfg.word_emb_trainable);
  SequenceLabeler model(cfg, std::move(word_vocab), std::move(subword_vocab),
                        std::move(pos_vocab), placeholder, /*init_seed=*/0);

  const std::size_t payload_begin = header_begin + header_len;
  auto params = model.all_parameters();
  const json& entries = header.at("params");
  if (entries.size() != params.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& entry = entries[i];
    Parameter& p = *params[i];
    if (entry.at("name").get<std::string>() != p.name) {
      throw std::runtime_error("checkpoint parameter order mismatch at '" + p.name + "'");
    }
    if (entry.at("shape").get<Shape>() != p.shape) {
      throw std::runtime_error("checkpoint shape mismatch for '" + p.name + "'");
    }
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto count = entry.at("count").get<std::uint64_t>();
    if (count != p.size()) {
      throw std::runtime_error("checkpoint count mismatch for '" + p.name + "'");
    }
    const std::size_t byte_off = payload_begin + offset * sizeof(double);
    if (bytes.size() < byte_off + count * sizeof(double)) {
      throw std::runtime_error("truncated checkpoint payload at '" + p.name + "'");
    }
    std::memcpy(p.value.data(), bytes.data() + byte_off, count * sizeof(double));
  }
  return model;
}

void save_checkpoint(const SequenceLabeler& model, const std::string& path,
                     const std::string& train_config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const std::string bytes = serialize_checkpoint(model, train_config_json);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

SequenceLabeler load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace devseq
