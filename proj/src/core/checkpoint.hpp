#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adam.hpp"
#include "model.hpp"

namespace mvc {

// Checkpoint directory: manifest.txt (architecture, bookkeeping entries,
// optimizer step) + one MVDS matrix file per parameter tensor in
// all_parameters() order, plus per-parameter Adam moment files when the
// optimizer is saved.

void save_checkpoint(const std::filesystem::path& dir, const GcfaggModel& model,
                     const Adam* optimizer,
                     const std::vector<std::pair<std::string, std::string>>& extra);

struct LoadedCheckpoint {
  GcfaggModel model;
  std::map<std::string, std::string> manifest;  // every manifest entry
  bool has_optimizer = false;
  std::size_t adam_step = 0;
  std::vector<std::vector<double>> adam_m;
  std::vector<std::vector<double>> adam_v;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mvc
