#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "maskgrad/model.hpp"
#include "maskgrad/trainer.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

// Dataset file: JSON lines. The first record is a header
//   {"record":"header","format":"maskgrad-dataset","version":1,"env":{...},
//    "regime":..., "seed":..., "trajectories":..., "pairs":..., "discarded":...}
// where env carries the layout including "relevant" (ground truth). Each
// following record is one pair:
//   {"record":"pair","traj":i,"step":t,"regime":...,"seed":...,"s":[...],"a":[...],
//    "last":bool,"success":bool}
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

// Checkpoint: one JSON document with layer sizes, flattened tensors, mask
// parameters, normalizer, config digest and seed. Doubles are written at
// round-trip precision, so a reloaded model reproduces outputs bit-exactly.
struct Checkpoint {
  Model model;
  TrainConfig config;
  std::string config_digest;
  std::uint64_t seed = 0;
};

Checkpoint make_checkpoint(const Model& model, const TrainConfig& config);
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string env_to_json(const EnvSpec& env);

// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace maskgrad
