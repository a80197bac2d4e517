#include "pcadapt/training.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "pcadapt/error.hpp"
#include "pcadapt/rng.hpp"

namespace pcadapt {

void TrainConfig::validate() const {
  if (batch_size < 2)
    fail(Errc::batch_too_small, "batch size must be >= 2 for the discrepancy estimators");
  weights.validate();
  if (kernel_count == 0) fail(Errc::invalid_argument, "kernel count must be positive");
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t dataset_size,
                                                    std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch) {
  if (batch_size > dataset_size)
    fail(Errc::batch_too_large, "batch size " + std::to_string(batch_size) +
                                    " exceeds dataset size " + std::to_string(dataset_size));
  std::vector<std::size_t> order(dataset_size);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "batches", epoch));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t at = 0; at < order.size(); at += batch_size) {
    const std::size_t end = std::min(order.size(), at + batch_size);
    if (end - at < 2) break;  // discrepancy estimators need >= 2 rows
    batches.emplace_back(order.begin() + at, order.begin() + end);
  }
  return batches;
}

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Endless index stream over a dataset: a fresh shuffled pass whenever the
// previous one is exhausted.
class CyclingSampler {
 public:
  CyclingSampler(std::size_t size, std::uint64_t seed) : size_(size), seed_(seed) { refill(); }

  std::size_t next() {
    if (at_ == order_.size()) refill();
    return order_[at_++];
  }

 private:
  void refill() {
    order_.resize(size_);
    std::iota(order_.begin(), order_.end(), 0);
    Rng rng(derive_seed(seed_, "cycle", pass_++));
    rng.shuffle(order_);
    at_ = 0;
  }

  std::size_t size_;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
  std::vector<std::size_t> order_;
  std::size_t at_ = 0;
};

std::size_t argmax_row(const Matrix& m, std::size_t i) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.cols; ++j)
    if (m(i, j) > m(i, best)) best = j;
  return best;
}

struct EpochStats {
  LossTerms sums;
  std::size_t steps = 0;
  std::size_t correct = 0;
  std::size_t seen = 0;

  void add(const LossTerms& terms, const Matrix& logits, const std::vector<int>& labels) {
    sums.ce += terms.ce;
    sums.mmd_fc1 += terms.mmd_fc1;
    sums.mmd_fc2 += terms.mmd_fc2;
    sums.coral_fc1 += terms.coral_fc1;
    sums.coral_fc2 += terms.coral_fc2;
    sums.total += terms.total;
    steps += 1;
    for (std::size_t i = 0; i < logits.rows; ++i) {
      if (argmax_row(logits, i) == static_cast<std::size_t>(labels[i])) ++correct;
      ++seen;
    }
  }

  EpochLog to_log(std::size_t epoch, const std::string& phase) const {
    EpochLog log;
    log.epoch = epoch;
    log.phase = phase;
    const double inv = steps > 0 ? 1.0 / static_cast<double>(steps) : 0.0;
    log.loss.ce = sums.ce * inv;
    log.loss.mmd_fc1 = sums.mmd_fc1 * inv;
    log.loss.mmd_fc2 = sums.mmd_fc2 * inv;
    log.loss.coral_fc1 = sums.coral_fc1 * inv;
    log.loss.coral_fc2 = sums.coral_fc2 * inv;
    log.loss.total = sums.total * inv;
    log.accuracy = seen > 0 ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    return log;
  }
};

std::vector<const PointCloud*> pick(const std::vector<PointCloud>& data,
                                    const std::vector<std::size_t>& idx) {
  std::vector<const PointCloud*> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(&data[i]);
  return out;
}

}  // namespace

TrainResult pretrain(const std::vector<PointCloud>& source, const NetworkShape& shape,
                     const TrainConfig& config) {
  config.validate();
  if (source.empty()) fail(Errc::empty_dataset, "pretraining needs a labelled source dataset");

  TrainResult result;
  result.params = ModelParams::init(shape, derive_seed(config.seed, "init"));
  result.opt = AdamState::init(result.params);
  const std::uint64_t batch_seed = derive_seed(config.seed, "pretrain");

  for (std::size_t epoch = 0; epoch < config.epochs_pretrain; ++epoch) {
    Rng aug(derive_seed(config.seed, "pretrain.aug", epoch));
    EpochStats stats;
    for (const auto& idx : batch_indices(source.size(), config.batch_size, batch_seed, epoch)) {
      std::vector<PointCloud> rotated;
      std::vector<const PointCloud*> clouds;
      if (config.augment_rotation) {
        rotated.reserve(idx.size());
        for (auto i : idx) rotated.push_back(rotate_z(source[i], aug.uniform(0.0, kTau)));
        for (const auto& c : rotated) clouds.push_back(&c);
      } else {
        clouds = pick(source, idx);
      }
      CloudBatch batch = make_batch(clouds);

      Tape tape;
      TapedModel model(tape, result.params);
      auto head = model.head(model.encoder(batch));
      auto loss = tape.softmax_cross_entropy(head.logits, batch.labels);
      tape.backward(loss);
      adam_step(result.params, model.gradients(), result.opt, config.pretrain_opt);

      LossTerms terms;
      terms.ce = tape.scalar(loss);
      terms.total = terms.ce;
      stats.add(terms, tape.value(head.logits), batch.labels);
      if (config.record_steps) result.steps.push_back({epoch, stats.steps - 1, terms});
    }
    result.epochs.push_back(stats.to_log(epoch, "pretrain"));
  }
  return result;
}

TrainResult adapt(ModelParams params, const std::vector<PointCloud>& source,
                  const std::vector<PointCloud>& target, const TrainConfig& config) {
  config.validate();
  if (source.empty() || target.empty())
    fail(Errc::empty_dataset, "adaptation needs both a source and a target dataset");
  if (config.batch_size > target.size())
    fail(Errc::batch_too_large, "batch size exceeds the target dataset size");

  TrainResult result;
  result.params = std::move(params);
  result.params.freeze_encoder();
  result.opt = AdamState::init(result.params);
  const std::uint64_t batch_seed = derive_seed(config.seed, "adapt.source");
  CyclingSampler target_stream(target.size(), derive_seed(config.seed, "adapt.target"));

  for (std::size_t epoch = 0; epoch < config.epochs_adapt; ++epoch) {
    EpochStats stats;
    for (const auto& idx : batch_indices(source.size(), config.batch_size, batch_seed, epoch)) {
      std::vector<std::size_t> tgt_idx(idx.size());
      for (auto& i : tgt_idx) i = target_stream.next();

      CloudBatch src_batch = make_batch(pick(source, idx));
      CloudBatch tgt_batch = make_batch(pick(target, tgt_idx));

      Tape tape;
      TapedModel model(tape, result.params);
      auto src_head = model.head(model.encoder(src_batch));
      auto tgt_head = model.head(model.encoder(tgt_batch));

      // Median-heuristic bandwidth from the current pooled batch, separately
      // per adaptation site.
      const KernelFamily fam_fc1 = default_family(
          median_bandwidth(tape.value(src_head.fc1), tape.value(tgt_head.fc1)),
          config.kernel_count, config.kernel_spacing);
      const KernelFamily fam_fc2 = default_family(
          median_bandwidth(tape.value(src_head.fc2), tape.value(tgt_head.fc2)),
          config.kernel_count, config.kernel_spacing);

      auto ce = tape.softmax_cross_entropy(src_head.logits, src_batch.labels);
      auto mmd1 = tape.mk_mmd2(src_head.fc1, tgt_head.fc1, fam_fc1);
      auto mmd2 = tape.mk_mmd2(src_head.fc2, tgt_head.fc2, fam_fc2);
      auto cor1 = tape.coral(src_head.fc1, tgt_head.fc1);
      auto cor2 = tape.coral(src_head.fc2, tgt_head.fc2);
      auto total = tape.weighted_sum({{config.weights.alpha, ce},
                                      {config.weights.beta, mmd1},
                                      {config.weights.beta, mmd2},
                                      {config.weights.lambda, cor1},
                                      {config.weights.lambda, cor2}});
      tape.backward(total);
      adam_step(result.params, model.gradients(), result.opt, config.adapt_opt);

      LossTerms terms;
      terms.ce = tape.scalar(ce);
      terms.mmd_fc1 = tape.scalar(mmd1);
      terms.mmd_fc2 = tape.scalar(mmd2);
      terms.coral_fc1 = tape.scalar(cor1);
      terms.coral_fc2 = tape.scalar(cor2);
      terms.total = tape.scalar(total);
      stats.add(terms, tape.value(src_head.logits), src_batch.labels);
      if (config.record_steps) result.steps.push_back({epoch, stats.steps - 1, terms});
    }
    result.epochs.push_back(stats.to_log(epoch, "adapt"));
  }
  return result;
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + tmp);
    out << "epoch,phase,total,ce,mmd_fc1,mmd_fc2,coral_fc1,coral_fc2,accuracy\n";
    out.precision(17);
    for (const auto& e : log)
      out << e.epoch << ',' << e.phase << ',' << e.loss.total << ',' << e.loss.ce << ','
          << e.loss.mmd_fc1 << ',' << e.loss.mmd_fc2 << ',' << e.loss.coral_fc1 << ','
          << e.loss.coral_fc2 << ',' << e.accuracy << '\n';
    if (!out) fail(Errc::io_error, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace pcadapt
