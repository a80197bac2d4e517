#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcadapt/autodiff.hpp"
#include "pcadapt/discrepancy.hpp"
#include "pcadapt/matrix.hpp"
#include "pcadapt/pointcloud.hpp"

namespace pcadapt {

struct DenseLayer {
  Matrix w;  // in x out
  Matrix b;  // 1 x out
  bool frozen = false;
};

// Per-point shared MLP widths for the encoder, fully-connected widths for
// the classifier head (fc1, fc2; the logits layer is implied by `classes`).
struct NetworkShape {
  std::size_t input_dim = 3;
  std::vector<std::size_t> encoder_widths = {64, 64, 64, 128, 1024};
  std::vector<std::size_t> head_widths = {512, 256};
  std::size_t classes = 10;

  std::size_t feature_dim() const { return encoder_widths.back(); }
  void validate() const;
  bool operator==(const NetworkShape&) const = default;
};

// All weights of the encoder trunk plus the classifier head. The frozen
// flags partition tensors into trainable and fixed; fixed tensors are
// bit-identical across optimizer steps.
struct ModelParams {
  NetworkShape shape;
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> head;  // fc1, fc2, logits

  // Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
  static ModelParams init(const NetworkShape& shape, std::uint64_t seed);
  void validate() const;
  void freeze_encoder();
};

struct TensorRef {
  std::string name;
  Matrix* tensor;
  bool frozen;
};
// Stable traversal order: encoder layers then fc1, fc2, logits; weight
// before bias.
std::vector<TensorRef> tensor_refs(ModelParams& params);
std::vector<TensorRef> tensor_refs(const ModelParams& params);

// A batch of clouds flattened for the per-point MLP: all points stacked,
// with one [begin, end) row range per cloud.
struct CloudBatch {
  Matrix points;  // total_points x input_dim
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::vector<int> labels;  // -1 where unlabelled
};
CloudBatch make_batch(const std::vector<const PointCloud*>& clouds);

struct HeadActivations {
  Matrix fc1;
  Matrix fc2;
  Matrix logits;
};

// Forward passes (no gradients). These run the same code path as training.
Matrix encoder_forward(const CloudBatch& batch, const ModelParams& params);
HeadActivations head_forward(const Matrix& features, const ModelParams& params);

// Batch-mean negative log-likelihood, stabilized by max subtraction.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

struct LossWeights {
  double alpha = 10.0;
  double beta = 0.5;
  double lambda = 0.5;
  void validate() const;
};

struct LossTerms {
  double ce = 0.0;
  double mmd_fc1 = 0.0;
  double mmd_fc2 = 0.0;
  double coral_fc1 = 0.0;
  double coral_fc2 = 0.0;
  double total = 0.0;

  double weighted_recombined(const LossWeights& w) const {
    return w.alpha * ce + w.beta * (mmd_fc1 + mmd_fc2) + w.lambda * (coral_fc1 + coral_fc2);
  }
};

// alpha*CE(source) + beta*MMD^2 at fc1 and fc2 + lambda*CORAL at fc1 and
// fc2. Kernel families are per adaptation site (they are usually built from
// each layer's own median bandwidth).
LossTerms combined_loss(const HeadActivations& source, const std::vector<int>& labels,
                        const HeadActivations& target, const LossWeights& weights,
                        const KernelFamily& family_fc1, const KernelFamily& family_fc2);

// Binds ModelParams onto a tape (frozen tensors as constants) and builds the
// forward graph. One TapedModel per tape per step.
class TapedModel {
 public:
  TapedModel(Tape& tape, const ModelParams& params);

  Tape::NodeId encoder(const CloudBatch& batch);

  struct Head {
    Tape::NodeId fc1;
    Tape::NodeId fc2;
    Tape::NodeId logits;
  };
  Head head(Tape::NodeId features);

  // Gradients in tensor_refs order; zero matrices for frozen tensors. Call
  // after tape.backward().
  std::vector<Matrix> gradients() const;

  Tape& tape() const { return tape_; }

 private:
  Tape& tape_;
  const ModelParams& params_;
  std::vector<Tape::NodeId> encoder_w_, encoder_b_, head_w_, head_b_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;

  static AdamState init(const ModelParams& params);
};

// One Adam update over the trainable tensors; frozen tensors and their
// state entries are untouched.
void adam_step(ModelParams& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& config);

// Checkpoint container: every tensor with its frozen flag, optional Adam
// state, and the configuration fingerprint. Round-trips bit-exactly.
struct Checkpoint {
  ModelParams params;
  AdamState opt;
  bool has_opt = false;
  std::string fingerprint;
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const AdamState* opt, const std::string& fingerprint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pcadapt
