#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcadapt/network.hpp"
#include "pcadapt/pointcloud.hpp"

namespace pcadapt {

struct TrainConfig {
  std::size_t epochs_pretrain = 150;
  std::size_t epochs_adapt = 50;
  std::size_t batch_size = 32;
  LossWeights weights;
  std::size_t kernel_count = 5;
  double kernel_spacing = 2.0;
  AdamConfig pretrain_opt;
  AdamConfig adapt_opt;
  std::uint64_t seed = 1;
  bool augment_rotation = true;  // per-sample z spin during pretraining
  bool record_steps = false;     // keep per-step loss records

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  std::string phase;  // "pretrain" | "adapt"
  LossTerms loss;     // per-term means over the epoch's steps
  double accuracy = 0.0;  // source-batch training accuracy
};

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  LossTerms loss;
};

struct TrainResult {
  ModelParams params;
  AdamState opt;
  std::vector<EpochLog> epochs;
  std::vector<StepRecord> steps;  // only when record_steps
};

// Epoch-seeded shuffle of [0, dataset_size) chunked into batches; a final
// chunk smaller than 2 rows is dropped.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t dataset_size,
                                                    std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch);

// Supervised stage: cross-entropy over shuffled dense batches with
// per-sample z-rotation augmentation.
TrainResult pretrain(const std::vector<PointCloud>& source, const NetworkShape& shape,
                     const TrainConfig& config);

// Adaptation stage: freezes the encoder, then walks paired source/target
// batches minimizing alpha*CE + beta*(MMD@fc1 + MMD@fc2) +
// lambda*(CORAL@fc1 + CORAL@fc2). Kernel bandwidths follow the median
// heuristic of the current pooled batch, per layer, per step.
TrainResult adapt(ModelParams params, const std::vector<PointCloud>& source,
                  const std::vector<PointCloud>& target, const TrainConfig& config);

// Header: epoch,phase,total,ce,mmd_fc1,mmd_fc2,coral_fc1,coral_fc2,accuracy
void write_train_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);

}  // namespace pcadapt
