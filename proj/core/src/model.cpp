#include "weakpairs/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "weakpairs/loss.hpp"
#include "weakpairs/random.hpp"

namespace weakpairs {

namespace {

// Dot product with four fixed-order accumulators. The strict left-to-right
// chain is latency-bound; this order is still deterministic for a given
// length, which is all the model promises.
double dot4(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

MlpModel::MlpModel(std::size_t input_dim,
                   const std::vector<std::size_t>& hidden,
                   std::uint64_t seed)
    : seed_(seed) {
  if (input_dim == 0) throw InvalidSpec("input dimension must be positive");
  widths_.push_back(input_dim);
  for (std::size_t h : hidden) {
    if (h == 0) throw InvalidSpec("hidden width must be positive");
    widths_.push_back(h);
  }
  widths_.push_back(1);
  init_offsets();

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t fan_in = widths_[l];
    const std::size_t fan_out = widths_[l + 1];
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    double* w = params_.data() + w_offset_[l];
    for (std::size_t k = 0; k < fan_in * fan_out; ++k)
      w[k] = rng.uniform(-bound, bound);
    // biases stay zero
  }
}

void MlpModel::init_offsets() {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    w_offset_.push_back(total);
    total += widths_[l] * widths_[l + 1];
    b_offset_.push_back(total);
    total += widths_[l + 1];
  }
  params_.assign(total, 0.0);
}

std::vector<double> MlpModel::forward(const double* xs, std::size_t n,
                                      Tape& tape) const {
  const std::size_t layers = widths_.size() - 1;
  tape.batch = n;
  tape.act.assign(widths_.size(), {});
  tape.act[0].assign(xs, xs + n * widths_[0]);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l];
    const std::size_t out = widths_[l + 1];
    const double* w = params_.data() + w_offset_[l];
    const double* b = params_.data() + b_offset_[l];
    const std::vector<double>& prev = tape.act[l];
    std::vector<double>& next = tape.act[l + 1];
    next.assign(n * out, 0.0);
    const bool is_output = (l + 1 == layers);
    for (std::size_t r = 0; r < n; ++r) {
      const double* a = prev.data() + r * in;
      double* z = next.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) {
        const double acc = b[o] + dot4(w + o * in, a, in);
        z[o] = (is_output || acc > 0.0) ? acc : 0.0;
      }
    }
  }
  return tape.act.back();
}

std::vector<double> MlpModel::forward(const double* xs, std::size_t n) const {
  Tape tape;
  return forward(xs, n, tape);
}

std::vector<double> MlpModel::forward(
    const std::vector<std::vector<double>>& xs) const {
  const std::size_t d = widths_.front();
  std::vector<double> flat;
  flat.reserve(xs.size() * d);
  for (const auto& row : xs) {
    if (row.size() != d) throw DimensionMismatch(d, row.size());
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return forward(flat.data(), xs.size());
}

double MlpModel::score(std::span<const double> x) const {
  if (x.size() != widths_.front())
    throw DimensionMismatch(widths_.front(), x.size());
  return forward(x.data(), 1).front();
}

std::vector<double> MlpModel::backward(const Tape& tape,
                                       std::span<const double> dscore) const {
  const std::size_t layers = widths_.size() - 1;
  const std::size_t n = tape.batch;
  if (dscore.size() != n) throw DimensionMismatch(n, dscore.size());
  std::vector<double> grad(params_.size(), 0.0);
  std::vector<double> delta(dscore.begin(), dscore.end());
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = widths_[l];
    const std::size_t out = widths_[l + 1];
    const std::vector<double>& prev = tape.act[l];
    double* gw = grad.data() + w_offset_[l];
    double* gb = grad.data() + b_offset_[l];
    for (std::size_t r = 0; r < n; ++r) {
      const double* a = prev.data() + r * in;
      const double* d = delta.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        axpy(dv, a, gw + o * in, in);
        gb[o] += dv;
      }
    }
    if (l == 0) break;
    // propagate through W and the ReLU of layer l (act[l] holds the
    // post-activation values, so the mask is act > 0)
    const double* w = params_.data() + w_offset_[l];
    std::vector<double> next_delta(n * in, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* d = delta.data() + r * out;
      const double* a = prev.data() + r * in;
      double* nd = next_delta.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        axpy(dv, w + o * in, nd, in);
      }
      for (std::size_t i = 0; i < in; ++i)
        if (a[i] <= 0.0) nd[i] = 0.0;
    }
    delta = std::move(next_delta);
  }
  return grad;
}

std::vector<double> MlpModel::backward_weighted(
    const Tape& tape, std::span<const double> scores,
    std::span<const double> w_pos, std::span<const double> w_neg) const {
  const std::size_t n = tape.batch;
  if (scores.size() != n) throw DimensionMismatch(n, scores.size());
  if (w_pos.size() != n) throw DimensionMismatch(n, w_pos.size());
  if (w_neg.size() != n) throw DimensionMismatch(n, w_neg.size());
  std::vector<double> dscore(n);
  for (std::size_t j = 0; j < n; ++j) {
    dscore[j] = w_pos[j] * logistic_loss_grad(scores[j], +1) +
                w_neg[j] * logistic_loss_grad(scores[j], -1);
  }
  return backward(tape, dscore);
}

void adam_step(AdamState& state, std::vector<double>& params,
               std::span<const double> grad) {
  if (params.size() != state.m.size() || grad.size() != state.m.size())
    throw DimensionMismatch(state.m.size(), grad.size());
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] + state.weight_decay * params[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

void adam_step(AdamState& state, MlpModel& model,
               std::span<const double> grad) {
  adam_step(state, model.mutable_parameters(), grad);
}

namespace {
constexpr char kMagic[4] = {'W', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}
}  // namespace

void save_checkpoint(const MlpModel& model,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, model.seed());
  write_pod(out, static_cast<std::uint32_t>(model.widths().size()));
  for (std::size_t w : model.widths())
    write_pod(out, static_cast<std::uint64_t>(w));
  const auto& params = model.parameters();
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a weakpairs checkpoint: " + path.string());
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  MlpModel model;
  model.seed_ = read_pod<std::uint64_t>(in);
  const auto n_widths = read_pod<std::uint32_t>(in);
  if (n_widths < 2) throw IoError("corrupt checkpoint width table");
  for (std::uint32_t i = 0; i < n_widths; ++i)
    model.widths_.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(in)));
  model.init_offsets();
  in.read(reinterpret_cast<char*>(model.params_.data()),
          static_cast<std::streamsize>(model.params_.size() * sizeof(double)));
  if (!in) throw IoError("truncated checkpoint: " + path.string());
  return model;
}

}  // namespace weakpairs
