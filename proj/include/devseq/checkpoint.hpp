#pragma once

#include <string>

#include "devseq/model.hpp"

namespace devseq {

// Versioned container: 8-byte magic, little-endian u64 JSON header length,
// JSON header (model config, vocabularies, parameter table with offsets,
// optional train config), then the parameter payload as row-major
// little-endian 64-bit floats in header order. Serialization is
// deterministic: identical models produce identical bytes.
inline constexpr char kCheckpointMagic[8] = {'D', 'S', 'E', 'Q', 'C', 'K', 'P', '1'};

std::string serialize_checkpoint(const SequenceLabeler& model,
                                 const std::string& train_config_json = "");
SequenceLabeler deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const SequenceLabeler& model, const std::string& path,
                     const std::string& train_config_json = "");
SequenceLabeler load_checkpoint(const std::string& path);

}  // namespace devseq
