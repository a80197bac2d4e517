#include "pcadapt/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "pcadapt/error.hpp"
#include "pcadapt/rng.hpp"

namespace pcadapt {

void NetworkShape::validate() const {
  if (input_dim == 0) fail(Errc::shape_mismatch, "input dimension must be positive");
  if (encoder_widths.empty()) fail(Errc::shape_mismatch, "encoder needs at least one layer");
  if (head_widths.size() != 2)
    fail(Errc::shape_mismatch, "head must have exactly fc1 and fc2 before the logits layer");
  if (classes < 2) fail(Errc::shape_mismatch, "need at least 2 classes");
  for (auto w : encoder_widths)
    if (w == 0) fail(Errc::shape_mismatch, "zero-width encoder layer");
  for (auto w : head_widths)
    if (w == 0) fail(Errc::shape_mismatch, "zero-width head layer");
}

ModelParams ModelParams::init(const NetworkShape& shape, std::uint64_t seed) {
  shape.validate();
  ModelParams params;
  params.shape = shape;
  Rng rng(derive_seed(seed, "model.init"));
  auto glorot = [&](std::size_t fan_in, std::size_t fan_out) {
    DenseLayer layer;
    layer.w = Matrix(fan_in, fan_out);
    layer.b = Matrix(1, fan_out);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : layer.w.data) v = rng.uniform(-bound, bound);
    return layer;
  };
  std::size_t in = shape.input_dim;
  for (auto width : shape.encoder_widths) {
    params.encoder.push_back(glorot(in, width));
    in = width;
  }
  for (auto width : shape.head_widths) {
    params.head.push_back(glorot(in, width));
    in = width;
  }
  params.head.push_back(glorot(in, shape.classes));
  return params;
}

void ModelParams::validate() const {
  shape.validate();
  if (encoder.size() != shape.encoder_widths.size() || head.size() != shape.head_widths.size() + 1)
    fail(Errc::shape_mismatch, "layer count does not match shape");
  std::size_t in = shape.input_dim;
  auto check = [&](const DenseLayer& layer, std::size_t out) {
    if (layer.w.rows != in || layer.w.cols != out || layer.b.rows != 1 || layer.b.cols != out)
      fail(Errc::shape_mismatch, "layer tensors do not chain");
    in = out;
  };
  for (std::size_t i = 0; i < encoder.size(); ++i) check(encoder[i], shape.encoder_widths[i]);
  for (std::size_t i = 0; i < shape.head_widths.size(); ++i) check(head[i], shape.head_widths[i]);
  check(head.back(), shape.classes);
}

void ModelParams::freeze_encoder() {
  for (auto& layer : encoder) layer.frozen = true;
}

namespace {

template <class Params, class Ref>
std::vector<Ref> refs_impl(Params& params) {
  std::vector<Ref> refs;
  auto add = [&](const std::string& name, auto& layer) {
    refs.push_back({name + ".w", &layer.w, layer.frozen});
    refs.push_back({name + ".b", &layer.b, layer.frozen});
  };
  for (std::size_t i = 0; i < params.encoder.size(); ++i)
    add("encoder" + std::to_string(i), params.encoder[i]);
  for (std::size_t i = 0; i + 1 < params.head.size(); ++i)
    add("fc" + std::to_string(i + 1), params.head[i]);
  add("logits", params.head.back());
  return refs;
}

}  // namespace

std::vector<TensorRef> tensor_refs(ModelParams& params) {
  return refs_impl<ModelParams, TensorRef>(params);
}

std::vector<TensorRef> tensor_refs(const ModelParams& params) {
  // Read-only traversal reuses the same order; the caller must not write.
  return refs_impl<const ModelParams, TensorRef>(const_cast<ModelParams&>(params));
}

CloudBatch make_batch(const std::vector<const PointCloud*>& clouds) {
  std::size_t total = 0;
  for (const auto* c : clouds) {
    if (c->points.empty()) fail(Errc::empty_cloud, "cloud '" + c->object_id + "' has no points");
    total += c->points.size();
  }
  CloudBatch batch;
  batch.points = Matrix(total, 3);
  std::size_t row = 0;
  for (const auto* c : clouds) {
    const std::size_t begin = row;
    for (const auto& p : c->points) {
      batch.points(row, 0) = p.x;
      batch.points(row, 1) = p.y;
      batch.points(row, 2) = p.z;
      ++row;
    }
    batch.segments.emplace_back(begin, row);
    batch.labels.push_back(c->label);
  }
  return batch;
}

TapedModel::TapedModel(Tape& tape, const ModelParams& params) : tape_(tape), params_(params) {
  params.validate();
  for (const auto& layer : params.encoder) {
    encoder_w_.push_back(tape.input(layer.w, !layer.frozen));
    encoder_b_.push_back(tape.input(layer.b, !layer.frozen));
  }
  for (const auto& layer : params.head) {
    head_w_.push_back(tape.input(layer.w, !layer.frozen));
    head_b_.push_back(tape.input(layer.b, !layer.frozen));
  }
}

Tape::NodeId TapedModel::encoder(const CloudBatch& batch) {
  if (batch.points.cols != params_.shape.input_dim)
    fail(Errc::shape_mismatch, "batch points do not match the encoder input width");
  Tape::NodeId x = tape_.input(batch.points, false);
  for (std::size_t i = 0; i < encoder_w_.size(); ++i)
    x = tape_.relu(tape_.add_rowvec(tape_.matmul(x, encoder_w_[i]), encoder_b_[i]));
  return tape_.segment_max(x, batch.segments);
}

TapedModel::Head TapedModel::head(Tape::NodeId features) {
  Head h;
  h.fc1 = tape_.relu(tape_.add_rowvec(tape_.matmul(features, head_w_[0]), head_b_[0]));
  h.fc2 = tape_.relu(tape_.add_rowvec(tape_.matmul(h.fc1, head_w_[1]), head_b_[1]));
  h.logits = tape_.add_rowvec(tape_.matmul(h.fc2, head_w_[2]), head_b_[2]);
  return h;
}

std::vector<Matrix> TapedModel::gradients() const {
  std::vector<Matrix> grads;
  for (std::size_t i = 0; i < encoder_w_.size(); ++i) {
    grads.push_back(tape_.grad(encoder_w_[i]));
    grads.push_back(tape_.grad(encoder_b_[i]));
  }
  for (std::size_t i = 0; i < head_w_.size(); ++i) {
    grads.push_back(tape_.grad(head_w_[i]));
    grads.push_back(tape_.grad(head_b_[i]));
  }
  return grads;
}

Matrix encoder_forward(const CloudBatch& batch, const ModelParams& params) {
  Tape tape;
  TapedModel model(tape, params);
  return tape.value(model.encoder(batch));
}

HeadActivations head_forward(const Matrix& features, const ModelParams& params) {
  if (features.cols != params.shape.feature_dim())
    fail(Errc::shape_mismatch, "feature width does not match fc1 input");
  Tape tape;
  TapedModel model(tape, params);
  auto h = model.head(tape.input(features, false));
  return {tape.value(h.fc1), tape.value(h.fc2), tape.value(h.logits)};
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  Tape tape;
  return tape.scalar(tape.softmax_cross_entropy(tape.input(logits, false), labels));
}

void LossWeights::validate() const {
  for (double v : {alpha, beta, lambda})
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(Errc::invalid_argument, "loss weights must be finite and non-negative");
}

LossTerms combined_loss(const HeadActivations& source, const std::vector<int>& labels,
                        const HeadActivations& target, const LossWeights& weights,
                        const KernelFamily& family_fc1, const KernelFamily& family_fc2) {
  weights.validate();
  LossTerms terms;
  terms.ce = cross_entropy(source.logits, labels);
  terms.mmd_fc1 = mk_mmd2(source.fc1, target.fc1, family_fc1);
  terms.mmd_fc2 = mk_mmd2(source.fc2, target.fc2, family_fc2);
  terms.coral_fc1 = coral(source.fc1, target.fc1);
  terms.coral_fc2 = coral(source.fc2, target.fc2);
  terms.total = terms.weighted_recombined(weights);
  return terms;
}

AdamState AdamState::init(const ModelParams& params) {
  AdamState state;
  for (const auto& ref : tensor_refs(params)) {
    state.m.emplace_back(ref.tensor->rows, ref.tensor->cols);
    state.v.emplace_back(ref.tensor->rows, ref.tensor->cols);
  }
  return state;
}

void adam_step(ModelParams& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& config) {
  auto refs = tensor_refs(params);
  if (grads.size() != refs.size() || state.m.size() != refs.size())
    fail(Errc::shape_mismatch, "gradient/state list does not match the parameter list");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < refs.size(); ++t) {
    if (refs[t].frozen) continue;
    Matrix& w = *refs[t].tensor;
    const Matrix& g = grads[t];
    if (!w.same_shape(g)) fail(Errc::shape_mismatch, "gradient shape mismatch at " + refs[t].name);
    Matrix& m = state.m[t];
    Matrix& v = state.v[t];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.data[i] = config.beta1 * m.data[i] + (1.0 - config.beta1) * g.data[i];
      v.data[i] = config.beta2 * v.data[i] + (1.0 - config.beta2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / bc1;
      const double v_hat = v.data[i] / bc2;
      w.data[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

// Checkpoint layout (little endian):
//   "PCKP" | u32 version | fingerprint string | shape block
//   | u32 tensor count | tensors (name, u8 frozen, u64 rows/cols, f64 data)
//   | u8 has_opt | [u64 step | m tensors | v tensors]
namespace {

constexpr char kCkptMagic[4] = {'P', 'C', 'K', 'P'};
constexpr std::uint32_t kCkptVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) fail(Errc::io_error, "truncated checkpoint");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string take_string(std::istream& in) {
  const auto len = take<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) fail(Errc::io_error, "truncated checkpoint");
  return s;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint64_t>(out, m.rows);
  put<std::uint64_t>(out, m.cols);
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

Matrix take_matrix(std::istream& in) {
  const auto rows = take<std::uint64_t>(in);
  const auto cols = take<std::uint64_t>(in);
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!in) fail(Errc::io_error, "truncated checkpoint tensor");
  return m;
}

void put_widths(std::ostream& out, const std::vector<std::size_t>& widths) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(widths.size()));
  for (auto w : widths) put<std::uint64_t>(out, w);
}

std::vector<std::size_t> take_widths(std::istream& in) {
  const auto n = take<std::uint32_t>(in);
  std::vector<std::size_t> widths(n);
  for (auto& w : widths) w = take<std::uint64_t>(in);
  return widths;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const AdamState* opt, const std::string& fingerprint) {
  params.validate();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + tmp);
    out.write(kCkptMagic, 4);
    put<std::uint32_t>(out, kCkptVersion);
    put_string(out, fingerprint);
    put<std::uint64_t>(out, params.shape.input_dim);
    put_widths(out, params.shape.encoder_widths);
    put_widths(out, params.shape.head_widths);
    put<std::uint64_t>(out, params.shape.classes);
    auto refs = tensor_refs(params);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(refs.size()));
    for (const auto& ref : refs) {
      put_string(out, ref.name);
      put<std::uint8_t>(out, ref.frozen ? 1 : 0);
      put_matrix(out, *ref.tensor);
    }
    put<std::uint8_t>(out, opt ? 1 : 0);
    if (opt) {
      if (opt->m.size() != refs.size() || opt->v.size() != refs.size())
        fail(Errc::shape_mismatch, "optimizer state does not match the parameter list");
      put<std::uint64_t>(out, opt->step);
      for (const auto& m : opt->m) put_matrix(out, m);
      for (const auto& v : opt->v) put_matrix(out, v);
    }
    if (!out) fail(Errc::io_error, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCkptMagic, 4) != 0)
    fail(Errc::io_error, path.string() + " is not a checkpoint");
  if (take<std::uint32_t>(in) != kCkptVersion) fail(Errc::io_error, "unsupported checkpoint version");

  Checkpoint ckpt;
  ckpt.fingerprint = take_string(in);
  ckpt.params.shape.input_dim = take<std::uint64_t>(in);
  ckpt.params.shape.encoder_widths = take_widths(in);
  ckpt.params.shape.head_widths = take_widths(in);
  ckpt.params.shape.classes = take<std::uint64_t>(in);

  const auto& shape = ckpt.params.shape;
  for (std::size_t i = 0; i < shape.encoder_widths.size(); ++i) ckpt.params.encoder.emplace_back();
  for (std::size_t i = 0; i < shape.head_widths.size() + 1; ++i) ckpt.params.head.emplace_back();
  auto refs = tensor_refs(ckpt.params);

  const auto n_tensors = take<std::uint32_t>(in);
  if (n_tensors != refs.size()) fail(Errc::io_error, "checkpoint tensor count mismatch");
  for (std::size_t t = 0; t < n_tensors; ++t) {
    const std::string name = take_string(in);
    if (name != refs[t].name) fail(Errc::io_error, "unexpected tensor '" + name + "'");
    const bool frozen = take<std::uint8_t>(in) != 0;
    *refs[t].tensor = take_matrix(in);
    // frozen is stored per layer; both tensors of a layer share it
    auto& layers = t < 2 * ckpt.params.encoder.size() ? ckpt.params.encoder : ckpt.params.head;
    const std::size_t local =
        t < 2 * ckpt.params.encoder.size() ? t / 2 : (t - 2 * ckpt.params.encoder.size()) / 2;
    layers[local].frozen = frozen;
  }
  if (take<std::uint8_t>(in) != 0) {
    ckpt.has_opt = true;
    ckpt.opt.step = take<std::uint64_t>(in);
    for (std::size_t t = 0; t < n_tensors; ++t) ckpt.opt.m.push_back(take_matrix(in));
    for (std::size_t t = 0; t < n_tensors; ++t) ckpt.opt.v.push_back(take_matrix(in));
  }
  ckpt.params.validate();
  return ckpt;
}

}  // namespace pcadapt
