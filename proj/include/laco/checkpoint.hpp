#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "laco/adam.hpp"
#include "laco/config.hpp"
#include "laco/params.hpp"
#include "laco/vocab.hpp"

namespace laco {

/// A resumable snapshot: parameters, optimizer moments, vocabulary and the
/// configuration that produced them.
struct Checkpoint {
  RunConfig config;
  Vocab vocab;
  ParameterStore params;
  AdamState adam;
  std::int64_t step = 0;
  double best_micro_f1 = 0.0;
};

// Layout: a text header (magic line, scalars, config, vocabulary, then one
// "name rank dims... offset" line per tensor, closed by "end_header"),
// followed by every tensor as little-endian 64-bit floats. Optimizer moments
// are stored as "adam.m/<name>" and "adam.v/<name>".
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace laco
