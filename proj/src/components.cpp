#include "multiwave/components.hpp"

#include <cmath>
#include <stdexcept>

namespace multiwave::components {

using ad::Var;

Kind kind_from_string(const std::string& s) {
  if (s == "mlp") return Kind::MLP;
  if (s == "lstm") return Kind::LSTM;
  if (s == "cnn-attn") return Kind::CNNAttn;
  if (s == "cnn-lstm") return Kind::CNNLSTM;
  if (s == "fcn") return Kind::FCN;
  if (s == "transformer") return Kind::Transformer;
  throw std::invalid_argument(
      "unknown component kind '" + s +
      "' (available: mlp, lstm, cnn-attn, cnn-lstm, fcn, transformer)");
}

std::string kind_to_string(Kind k) {
  switch (k) {
    case Kind::MLP: return "mlp";
    case Kind::LSTM: return "lstm";
    case Kind::CNNAttn: return "cnn-attn";
    case Kind::CNNLSTM: return "cnn-lstm";
    case Kind::FCN: return "fcn";
    case Kind::Transformer: return "transformer";
  }
  throw std::logic_error("kind_to_string");
}

namespace {

Var linear_w(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return ad::param(ad::init_uniform({in, out}, in, rng));
}
Var linear_b(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return ad::param(ad::init_uniform({out}, in, rng));
}

// One LSTM cell; the four gate blocks share a single weight matrix.
struct LstmCell {
  std::size_t in = 0, hidden = 0;
  Var w, b;  // [in+H, 4H], [4H]

  LstmCell() = default;
  LstmCell(std::size_t in_dim, std::size_t h, std::mt19937_64& rng)
      : in(in_dim), hidden(h) {
    w = linear_w(in + hidden, 4 * hidden, rng);
    b = linear_b(in + hidden, 4 * hidden, rng);
  }

  std::pair<Var, Var> step(const Var& x_t, const Var& h, const Var& c) const {
    Var z = ad::add(ad::matmul(ad::concat({x_t, h}), w), b);
    Var i = ad::sigmoid(ad::slice(z, 0, hidden));
    Var f = ad::sigmoid(ad::slice(z, hidden, hidden));
    Var g = ad::tanh_op(ad::slice(z, 2 * hidden, hidden));
    Var o = ad::sigmoid(ad::slice(z, 3 * hidden, hidden));
    Var c2 = ad::add(ad::mul(f, c), ad::mul(i, g));
    Var h2 = ad::mul(o, ad::tanh_op(c2));
    return {h2, c2};
  }

  void collect(std::vector<Var>& out) const {
    out.push_back(w);
    out.push_back(b);
  }
};

// Runs the cell over the rows of x, returning every hidden state.
std::vector<Var> lstm_scan(const LstmCell& cell, const Var& x) {
  const std::size_t t = x->val.rows();
  Var h = ad::constant(Tensor::zeros({cell.hidden}));
  Var c = ad::constant(Tensor::zeros({cell.hidden}));
  std::vector<Var> hs;
  hs.reserve(t);
  for (std::size_t i = 0; i < t; ++i) {
    std::tie(h, c) = cell.step(ad::row(x, i), h, c);
    hs.push_back(h);
  }
  return hs;
}

// [H] rows -> [T, H] sequence matrix.
Var rows_to_matrix(const std::vector<Var>& rows) {
  return ad::transpose(ad::stack_cols(rows));
}

class MlpComponent : public ComponentModel {
 public:
  MlpComponent(std::size_t in, std::size_t hidden, std::mt19937_64& rng) {
    embed_dim_ = hidden;
    w1_ = linear_w(in, hidden, rng);
    b1_ = linear_b(in, hidden, rng);
    w2_ = linear_w(hidden, hidden, rng);
    b2_ = linear_b(hidden, hidden, rng);
  }
  Var forward(const Var& x) override {
    Var h = ad::relu(ad::add(ad::matmul(x, w1_), b1_));
    return ad::add(ad::matmul(ad::mean_over_time(h), w2_), b2_);
  }
  std::vector<Var> params() const override { return {w1_, b1_, w2_, b2_}; }

 private:
  Var w1_, b1_, w2_, b2_;
};

class LstmComponent : public ComponentModel {
 public:
  LstmComponent(std::size_t in, std::size_t hidden, std::size_t layers,
                std::mt19937_64& rng) {
    embed_dim_ = hidden;
    std::size_t cur = in;
    for (std::size_t l = 0; l < std::max<std::size_t>(layers, 1); ++l) {
      cells_.emplace_back(cur, hidden, rng);
      cur = hidden;
    }
  }
  Var forward(const Var& x) override {
    Var seq = x;
    std::vector<Var> hs;
    for (std::size_t l = 0; l < cells_.size(); ++l) {
      hs = lstm_scan(cells_[l], seq);
      if (l + 1 < cells_.size()) seq = rows_to_matrix(hs);
    }
    return hs.back();  // final hidden state
  }
  std::vector<Var> params() const override {
    std::vector<Var> out;
    for (const auto& c : cells_) c.collect(out);
    return out;
  }

 private:
  std::vector<LstmCell> cells_;
};

// Length-preserving convolution stack with ReLU, shared by the CNN kinds.
struct ConvStack {
  std::size_t kernel = 0;
  std::vector<Var> ws, bs;

  ConvStack() = default;
  ConvStack(std::size_t in, std::size_t channels, std::size_t layers,
            std::size_t k, std::mt19937_64& rng)
      : kernel(k) {
    std::size_t cur = in;
    for (std::size_t l = 0; l < std::max<std::size_t>(layers, 1); ++l) {
      const std::size_t fan_in = cur * k;
      ws.push_back(ad::param(ad::init_uniform({channels, cur, k}, fan_in, rng)));
      bs.push_back(ad::param(ad::init_uniform({channels}, fan_in, rng)));
      cur = channels;
    }
  }

  Var forward_raw(const Var& x, std::size_t layer) const {
    const std::size_t lo = (kernel - 1) / 2, hi = kernel - 1 - lo;
    return ad::conv1d(ad::pad_rows_symmetric(x, lo, hi), ws[layer],
                      bs[layer]);
  }

  Var forward(const Var& x) const {
    Var h = x;
    for (std::size_t l = 0; l < ws.size(); ++l)
      h = ad::relu(forward_raw(h, l));
    return h;
  }

  void collect(std::vector<Var>& out) const {
    for (std::size_t i = 0; i < ws.size(); ++i) {
      out.push_back(ws[i]);
      out.push_back(bs[i]);
    }
  }
};

// Convolution stack followed by additive attention over time; the
// embedding is the attention-weighted mean of the channel activations.
class CnnAttnComponent : public ComponentModel {
 public:
  CnnAttnComponent(std::size_t in, const ComponentConfig& cfg,
                   std::mt19937_64& rng)
      : conv_(in, cfg.hidden, cfg.layers, cfg.kernel, rng) {
    embed_dim_ = cfg.hidden;
    attn_w_ = linear_w(cfg.hidden, cfg.hidden, rng);
    attn_b_ = linear_b(cfg.hidden, cfg.hidden, rng);
    attn_v_ = ad::param(ad::init_uniform({cfg.hidden}, cfg.hidden, rng));
  }
  Var forward(const Var& x) override {
    Var h = conv_.forward(x);  // [T,H]
    Var score = ad::matmul(
        ad::tanh_op(ad::add(ad::matmul(h, attn_w_), attn_b_)), attn_v_);
    Var weights = ad::softmax(score);           // [T]
    return ad::matmul(ad::transpose(h), weights);  // [H]
  }
  std::vector<Var> params() const override {
    std::vector<Var> out;
    conv_.collect(out);
    out.push_back(attn_w_);
    out.push_back(attn_b_);
    out.push_back(attn_v_);
    return out;
  }

 private:
  ConvStack conv_;
  Var attn_w_, attn_b_, attn_v_;
};

class CnnLstmComponent : public ComponentModel {
 public:
  CnnLstmComponent(std::size_t in, const ComponentConfig& cfg,
                   std::mt19937_64& rng)
      : conv_(in, cfg.hidden, cfg.layers, cfg.kernel, rng),
        cell_(cfg.hidden, cfg.hidden, rng) {
    embed_dim_ = cfg.hidden;
  }
  Var forward(const Var& x) override {
    return lstm_scan(cell_, conv_.forward(x)).back();
  }
  std::vector<Var> params() const override {
    std::vector<Var> out;
    conv_.collect(out);
    cell_.collect(out);
    return out;
  }

 private:
  ConvStack conv_;
  LstmCell cell_;
};

// Convolution blocks with per-position layer normalization, mean-pooled.
class FcnComponent : public ComponentModel {
 public:
  FcnComponent(std::size_t in, const ComponentConfig& cfg,
               std::mt19937_64& rng)
      : conv_(in, cfg.hidden, cfg.layers, cfg.kernel, rng) {
    embed_dim_ = cfg.hidden;
    for (std::size_t l = 0; l < conv_.ws.size(); ++l) {
      gains_.push_back(ad::param(Tensor({cfg.hidden},
                                        std::vector<double>(cfg.hidden, 1.0))));
      biases_.push_back(ad::param(Tensor::zeros({cfg.hidden})));
    }
  }
  Var forward(const Var& x) override {
    Var h = x;
    for (std::size_t l = 0; l < conv_.ws.size(); ++l)
      h = ad::relu(
          ad::layer_norm(conv_.forward_raw(h, l), gains_[l], biases_[l]));
    return ad::mean_over_time(h);
  }
  std::vector<Var> params() const override {
    std::vector<Var> out;
    conv_.collect(out);
    for (std::size_t l = 0; l < gains_.size(); ++l) {
      out.push_back(gains_[l]);
      out.push_back(biases_[l]);
    }
    return out;
  }

 private:
  ConvStack conv_;
  std::vector<Var> gains_, biases_;
};

Tensor sinusoidal_pe(std::size_t t, std::size_t d) {
  Tensor pe = Tensor::zeros({t, d});
  for (std::size_t pos = 0; pos < t; ++pos)
    for (std::size_t i = 0; i < d; ++i) {
      const double angle =
          pos / std::pow(10000.0, 2.0 * (i / 2) / static_cast<double>(d));
      pe.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

class TransformerComponent : public ComponentModel {
 public:
  TransformerComponent(std::size_t in, const ComponentConfig& cfg,
                       std::mt19937_64& rng)
      : d_(cfg.hidden), heads_(std::max<std::size_t>(cfg.heads, 1)) {
    embed_dim_ = d_;
    dh_ = std::max<std::size_t>(d_ / heads_, 1);
    in_w_ = linear_w(in, d_, rng);
    in_b_ = linear_b(in, d_, rng);
    const std::size_t ff = 2 * d_;
    for (std::size_t l = 0; l < std::max<std::size_t>(cfg.layers, 1); ++l) {
      Layer lay;
      for (std::size_t h = 0; h < heads_; ++h) {
        lay.wq.push_back(linear_w(d_, dh_, rng));
        lay.wk.push_back(linear_w(d_, dh_, rng));
        lay.wv.push_back(linear_w(d_, dh_, rng));
        lay.wo.push_back(linear_w(dh_, d_, rng));
      }
      lay.ff1_w = linear_w(d_, ff, rng);
      lay.ff1_b = linear_b(d_, ff, rng);
      lay.ff2_w = linear_w(ff, d_, rng);
      lay.ff2_b = linear_b(ff, d_, rng);
      lay.ln1_g = ad::param(Tensor({d_}, std::vector<double>(d_, 1.0)));
      lay.ln1_b = ad::param(Tensor::zeros({d_}));
      lay.ln2_g = ad::param(Tensor({d_}, std::vector<double>(d_, 1.0)));
      lay.ln2_b = ad::param(Tensor::zeros({d_}));
      layers_.push_back(std::move(lay));
    }
  }

  Var forward(const Var& x) override {
    Var h = ad::add(ad::matmul(x, in_w_), in_b_);
    h = ad::add(h, ad::constant(sinusoidal_pe(x->val.rows(), d_)));
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh_));
    // pre-norm blocks: the residual stream keeps the input projection's
    // scale, so pooled features still carry absolute magnitude
    for (const auto& lay : layers_) {
      Var n1 = ad::layer_norm(h, lay.ln1_g, lay.ln1_b);
      Var attn;
      for (std::size_t hd = 0; hd < heads_; ++hd) {
        Var q = ad::matmul(n1, lay.wq[hd]);
        Var k = ad::matmul(n1, lay.wk[hd]);
        Var v = ad::matmul(n1, lay.wv[hd]);
        Var a = ad::softmax(ad::scale(ad::matmul(q, ad::transpose(k)),
                                      inv_sqrt));
        Var proj = ad::matmul(ad::matmul(a, v), lay.wo[hd]);
        attn = attn ? ad::add(attn, proj) : proj;
      }
      h = ad::add(h, attn);
      Var n2 = ad::layer_norm(h, lay.ln2_g, lay.ln2_b);
      Var ff = ad::add(
          ad::matmul(ad::relu(ad::add(ad::matmul(n2, lay.ff1_w), lay.ff1_b)),
                     lay.ff2_w),
          lay.ff2_b);
      h = ad::add(h, ff);
    }
    return ad::mean_over_time(h);
  }

  std::vector<Var> params() const override {
    std::vector<Var> out = {in_w_, in_b_};
    for (const auto& lay : layers_) {
      for (std::size_t hd = 0; hd < heads_; ++hd) {
        out.push_back(lay.wq[hd]);
        out.push_back(lay.wk[hd]);
        out.push_back(lay.wv[hd]);
        out.push_back(lay.wo[hd]);
      }
      out.insert(out.end(), {lay.ff1_w, lay.ff1_b, lay.ff2_w, lay.ff2_b,
                             lay.ln1_g, lay.ln1_b, lay.ln2_g, lay.ln2_b});
    }
    return out;
  }

 private:
  struct Layer {
    std::vector<Var> wq, wk, wv, wo;
    Var ff1_w, ff1_b, ff2_w, ff2_b;
    Var ln1_g, ln1_b, ln2_g, ln2_b;
  };
  std::size_t d_, heads_, dh_;
  Var in_w_, in_b_;
  std::vector<Layer> layers_;
};

std::vector<Var> columns_as_constants(
    const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
  std::vector<Var> out;
  out.reserve(cols.size());
  for (const auto& [name, vals] : cols)
    out.push_back(ad::constant(Tensor::vec(vals)));
  return out;
}

}  // namespace

std::unique_ptr<ComponentModel> make_component(const ComponentConfig& cfg,
                                               std::size_t in_channels,
                                               std::mt19937_64& rng) {
  switch (cfg.kind) {
    case Kind::MLP:
      return std::make_unique<MlpComponent>(in_channels, cfg.hidden, rng);
    case Kind::LSTM:
      return std::make_unique<LstmComponent>(in_channels, cfg.hidden,
                                             cfg.layers, rng);
    case Kind::CNNAttn:
      return std::make_unique<CnnAttnComponent>(in_channels, cfg, rng);
    case Kind::CNNLSTM:
      return std::make_unique<CnnLstmComponent>(in_channels, cfg, rng);
    case Kind::FCN:
      return std::make_unique<FcnComponent>(in_channels, cfg, rng);
    case Kind::Transformer:
      return std::make_unique<TransformerComponent>(in_channels, cfg, rng);
  }
  throw std::logic_error("make_component");
}

MultiWaveModel::MultiWaveModel(const grouping::GroupingPlan& plan,
                               MultiWaveConfig cfg, std::mt19937_64& rng)
    : plan_(plan), cfg_(cfg) {
  if (cfg_.masks_enabled)
    masks_ = masking::MaskBank(plan_, cfg_.initial_mask_weight,
                               cfg_.add_baseline);
  std::size_t fused = 0;
  for (const auto& comp : plan_.components) {
    components_.push_back(make_component(cfg_.component, comp.size(), rng));
    fused += components_.back()->embed_dim();
  }
  if (cfg_.add_baseline) {
    baseline_ = make_component(cfg_.component, plan_.signals.size(), rng);
    fused += baseline_->embed_dim();
  }
  fusion_w_ = linear_w(fused, cfg_.out_dim, rng);
  fusion_b_ = linear_b(fused, cfg_.out_dim, rng);
}

ad::Var MultiWaveModel::forward(const PreparedSample& sample) {
  if (sample.inputs.size() != components_.size())
    throw std::invalid_argument(
        "MultiWaveModel: sample has " + std::to_string(sample.inputs.size()) +
        " component inputs, model expects " +
        std::to_string(components_.size()));
  std::vector<Var> embeds;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto& input = sample.inputs[c];
    std::vector<Var> cols = cfg_.masks_enabled
                                ? masking::apply_masks(input, masks_)
                                : columns_as_constants(input.columns);
    embeds.push_back(components_[c]->forward(ad::stack_cols(cols)));
  }
  if (baseline_) {
    std::vector<Var> cols;
    for (const auto& [name, vals] : sample.aligned) {
      Var col = ad::constant(Tensor::vec(vals));
      if (cfg_.masks_enabled)
        col = ad::mul(col, ad::relu(masks_.weight(0, name)));
      cols.push_back(std::move(col));
    }
    embeds.push_back(baseline_->forward(ad::stack_cols(cols)));
  }
  return ad::add(ad::matmul(ad::concat(embeds), fusion_w_), fusion_b_);
}

std::vector<ad::Var> MultiWaveModel::params() const {
  std::vector<Var> out;
  for (const auto& c : components_) {
    auto p = c->params();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (baseline_) {
    auto p = baseline_->params();
    out.insert(out.end(), p.begin(), p.end());
  }
  out.push_back(fusion_w_);
  out.push_back(fusion_b_);
  auto mp = masks_.params();
  out.insert(out.end(), mp.begin(), mp.end());
  return out;
}

PlainModel::PlainModel(std::size_t in_channels, const ComponentConfig& cfg,
                       std::size_t out_dim, std::mt19937_64& rng) {
  body_ = make_component(cfg, in_channels, rng);
  head_w_ = linear_w(body_->embed_dim(), out_dim, rng);
  head_b_ = linear_b(body_->embed_dim(), out_dim, rng);
}

ad::Var PlainModel::forward(const PreparedSample& sample) {
  Var x = ad::stack_cols(columns_as_constants(sample.aligned));
  return ad::add(ad::matmul(body_->forward(x), head_w_), head_b_);
}

std::vector<ad::Var> PlainModel::params() const {
  auto out = body_->params();
  out.push_back(head_w_);
  out.push_back(head_b_);
  return out;
}

FftBaselineModel::FftBaselineModel(std::size_t in_channels,
                                   const ComponentConfig& cfg,
                                   std::size_t out_dim, std::mt19937_64& rng) {
  spectrum_branch_ = make_component(cfg, in_channels, rng);
  time_branch_ = make_component(cfg, in_channels, rng);
  const std::size_t fused =
      spectrum_branch_->embed_dim() + time_branch_->embed_dim();
  fc1_w_ = linear_w(fused, cfg.hidden, rng);
  fc1_b_ = linear_b(fused, cfg.hidden, rng);
  fc2_w_ = linear_w(cfg.hidden, out_dim, rng);
  fc2_b_ = linear_b(cfg.hidden, out_dim, rng);
}

ad::Var FftBaselineModel::forward(const PreparedSample& sample) {
  if (!sample.uniform_rate)
    throw std::invalid_argument(
        "FftBaselineModel: defined for uniform-rate signals only");
  std::vector<Var> spec_cols, time_cols;
  for (const auto& [name, vals] : sample.aligned) {
    spec_cols.push_back(ad::constant(Tensor::vec(magnitude_spectrum(vals))));
    time_cols.push_back(ad::constant(Tensor::vec(vals)));
  }
  Var e = ad::concat({spectrum_branch_->forward(ad::stack_cols(spec_cols)),
                      time_branch_->forward(ad::stack_cols(time_cols))});
  Var h = ad::relu(ad::add(ad::matmul(e, fc1_w_), fc1_b_));
  return ad::add(ad::matmul(h, fc2_w_), fc2_b_);
}

std::vector<ad::Var> FftBaselineModel::params() const {
  auto out = spectrum_branch_->params();
  auto t = time_branch_->params();
  out.insert(out.end(), t.begin(), t.end());
  out.insert(out.end(), {fc1_w_, fc1_b_, fc2_w_, fc2_b_});
  return out;
}

std::vector<double> magnitude_spectrum(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) *
                           static_cast<double>(t) / static_cast<double>(n);
      re += values[t] * std::cos(angle);
      im += values[t] * std::sin(angle);
    }
    mags[k] = std::sqrt(re * re + im * im);
  }
  return mags;
}

std::size_t param_count(const std::vector<ad::Var>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p->val.numel();
  return n;
}

}  // namespace multiwave::components
