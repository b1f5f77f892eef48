#include "zspad/autoencoder.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "zspad/preprocess.hpp"
#include "zspad/rng.hpp"

namespace zspad {

namespace {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RMat>;
using MapC = Eigen::Map<const RMat>;

int enc_channels(const AEConfig& cfg, int b) {
  return std::min(cfg.base_channels << b, 8 * cfg.base_channels);
}

int dec_channels(const AEConfig& cfg, int j) {
  if (j == cfg.decoder_blocks - 1) return 1;
  if (j <= cfg.encoder_blocks - 2) return enc_channels(cfg, cfg.encoder_blocks - 2 - j);
  return cfg.base_channels;
}

struct ConvDef {
  int in_c = 0;
  int out_c = 0;
  int dil = 1;
  int stride = 1;
};

// Declaration order: per encoder block the atrous convs then the stride-2
// conv; then one conv per decoder block.
std::vector<ConvDef> conv_layout(const AEConfig& cfg) {
  std::vector<ConvDef> defs;
  const int nr = int(cfg.atrous_rates.size());
  int prev = 1;
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    const int c = enc_channels(cfg, b);
    defs.push_back({prev, c, cfg.atrous_rates[0], 1});
    for (int i = 1; i < nr; ++i) defs.push_back({c, c, cfg.atrous_rates[i], 1});
    defs.push_back({c, c, 1, 2});
    prev = c;
  }
  for (int j = 0; j < cfg.decoder_blocks; ++j) {
    const int c = dec_channels(cfg, j);
    defs.push_back({prev, c, 1, 1});
    prev = c;
  }
  return defs;
}

int enc_conv_index(const AEConfig& cfg, int block, int i) {
  return block * (int(cfg.atrous_rates.size()) + 1) + i;
}

int dec_conv_index(const AEConfig& cfg, int j) {
  return cfg.encoder_blocks * (int(cfg.atrous_rates.size()) + 1) + j;
}

inline int clampi(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

// Patch matrix: row (ic*K+ky)*K+kx, column oy*ow+ox, clamp-to-edge taps.
void im2col(const Tensor& in, int k, int dil, int stride, int oh, int ow,
            std::vector<double>& kbuf) {
  const int rows = in.c * k * k;
  const size_t n = size_t(oh) * size_t(ow);
  kbuf.resize(size_t(rows) * n);
  const int half = k / 2;
  for (int ic = 0; ic < in.c; ++ic) {
    const double* plane = in.plane(ic);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = kbuf.data() + (size_t(ic) * k * k + size_t(ky) * k + kx) * n;
        for (int oy = 0; oy < oh; ++oy) {
          const int sy = clampi(oy * stride + (ky - half) * dil, in.h - 1);
          const double* src = plane + size_t(sy) * in.w;
          double* dst = row + size_t(oy) * ow;
          const int base = (kx - half) * dil;
          for (int ox = 0; ox < ow; ++ox) {
            dst[ox] = src[clampi(ox * stride + base, in.w - 1)];
          }
        }
      }
    }
  }
}

struct Workspace {
  std::vector<double> kbuf;
  std::vector<double> dkbuf;
  std::vector<double> wbuf;
};

void promote(const std::vector<float>& src, std::vector<double>& dst) {
  dst.resize(src.size());
  for (size_t i = 0; i < src.size(); ++i) dst[i] = double(src[i]);
}

Tensor conv_forward(const Tensor& in, const ConvDef& cd, int k,
                    const std::vector<float>& wf, const std::vector<float>& bf,
                    Workspace& ws) {
  const int oh = in.h / cd.stride, ow = in.w / cd.stride;
  Tensor out(cd.out_c, oh, ow);
  im2col(in, k, cd.dil, cd.stride, oh, ow, ws.kbuf);
  promote(wf, ws.wbuf);
  const int rows = cd.in_c * k * k;
  const size_t n = size_t(oh) * size_t(ow);
  MapM om(out.v.data(), cd.out_c, Eigen::Index(n));
  MapC wm(ws.wbuf.data(), cd.out_c, rows);
  MapC km(ws.kbuf.data(), rows, Eigen::Index(n));
  om.noalias() = wm * km;
  for (int oc = 0; oc < cd.out_c; ++oc) {
    double* plane = out.plane(oc);
    const double b = double(bf[oc]);
    for (size_t i = 0; i < out.plane_size(); ++i) plane[i] += b;
  }
  return out;
}

// Gradients wrt parameters and input. dw/db accumulate; g_in starts zeroed.
void conv_backward(const Tensor& in, const Tensor& g_out, const ConvDef& cd, int k,
                   const std::vector<float>& wf, std::vector<double>& dw,
                   std::vector<double>& db, Tensor& g_in, Workspace& ws) {
  const int oh = g_out.h, ow = g_out.w;
  const int rows = cd.in_c * k * k;
  const size_t n = size_t(oh) * size_t(ow);
  im2col(in, k, cd.dil, cd.stride, oh, ow, ws.kbuf);
  promote(wf, ws.wbuf);

  MapC gm(g_out.v.data(), cd.out_c, Eigen::Index(n));
  MapC km(ws.kbuf.data(), rows, Eigen::Index(n));
  MapM dwm(dw.data(), cd.out_c, rows);
  dwm.noalias() += gm * km.transpose();
  for (int oc = 0; oc < cd.out_c; ++oc) {
    const double* plane = g_out.plane(oc);
    double s = 0.0;
    for (size_t i = 0; i < g_out.plane_size(); ++i) s += plane[i];
    db[oc] += s;
  }

  ws.dkbuf.resize(size_t(rows) * n);
  MapM dkm(ws.dkbuf.data(), rows, Eigen::Index(n));
  MapC wm(ws.wbuf.data(), cd.out_c, rows);
  dkm.noalias() = wm.transpose() * gm;

  const int half = k / 2;
  for (int ic = 0; ic < cd.in_c; ++ic) {
    double* gplane = g_in.plane(ic);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = ws.dkbuf.data() + (size_t(ic) * k * k + size_t(ky) * k + kx) * n;
        for (int oy = 0; oy < oh; ++oy) {
          const int sy = clampi(oy * cd.stride + (ky - half) * cd.dil, in.h - 1);
          double* grow = gplane + size_t(sy) * in.w;
          const double* drow = row + size_t(oy) * ow;
          const int base = (kx - half) * cd.dil;
          for (int ox = 0; ox < ow; ++ox) {
            grow[clampi(ox * cd.stride + base, in.w - 1)] += drow[ox];
          }
        }
      }
    }
  }
}

void leaky_inplace(Tensor& t, double slope) {
  for (double& v : t.v) v = v > 0.0 ? v : slope * v;
}

void leaky_backward_inplace(Tensor& g, const Tensor& act_out, double slope) {
  for (size_t i = 0; i < g.v.size(); ++i)
    if (!(act_out.v[i] > 0.0)) g.v[i] *= slope;
}

// Softsign-based squash to (0,1). Saturates polynomially, so gradients
// survive even when training drives the pre-activations far negative on
// dark backgrounds (a logistic sigmoid dies there).
void squash_inplace(Tensor& t) {
  for (double& v : t.v) v = 0.5 * (v / (1.0 + std::abs(v)) + 1.0);
}

void squash_backward_inplace(Tensor& g, const Tensor& act_out) {
  for (size_t i = 0; i < g.v.size(); ++i) {
    const double s = std::abs(2.0 * act_out.v[i] - 1.0);  // |z|/(1+|z|)
    g.v[i] *= 0.5 * (1.0 - s) * (1.0 - s);
  }
}

Tensor upsample2(const Tensor& in) {
  Tensor out(in.c, in.h * 2, in.w * 2);
  for (int c = 0; c < in.c; ++c)
    resize_plane(in.plane(c), in.h, in.w, out.plane(c), out.h, out.w);
  return out;
}

struct EncTrace {
  Tensor c0_act;
  std::vector<Tensor> mid_acts;  // post-act outputs of convs 1..nr-2
  Tensor res_act;                // lrelu(t + last conv); equals c0_act when nr == 1
  Tensor down_act;
};

struct DecTrace {
  Tensor resized;  // conv input after the (possible) upsample
  bool upsampled = false;
};

struct Trace {
  Tensor input;
  std::vector<EncTrace> enc;
  std::vector<DecTrace> dec;
};

Tensor bscan_to_tensor(const BScan& b) {
  Tensor t(1, b.height, b.width);
  std::copy(b.pixels.begin(), b.pixels.end(), t.v.begin());
  return t;
}

// Runs the network; decoder post-activation stacks always come back as the
// feature map set (the last one is the reconstruction). `trace` may be null.
FeatureMapSet run_forward(const AutoencoderModel& model, const BScan& x, Trace* trace,
                          Workspace& ws) {
  const AEConfig& cfg = model.config;
  if (x.height != cfg.input_height || x.width != cfg.input_width)
    throw ArgumentError("input dimensions do not match the model config");

  const std::vector<ConvDef> defs = conv_layout(cfg);
  const int nr = int(cfg.atrous_rates.size());

  Tensor cur = bscan_to_tensor(x);
  if (trace) trace->input = cur;

  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    EncTrace et;
    const int k0 = enc_conv_index(cfg, b, 0);
    Tensor t = conv_forward(cur, defs[k0], cfg.kernel, model.weights[2 * k0],
                            model.weights[2 * k0 + 1], ws);
    leaky_inplace(t, cfg.leaky_slope);

    Tensor res;
    if (nr == 1) {
      res = t;
    } else {
      Tensor a;
      const Tensor* prev = &t;
      for (int i = 1; i < nr; ++i) {
        const int ki = enc_conv_index(cfg, b, i);
        a = conv_forward(*prev, defs[ki], cfg.kernel, model.weights[2 * ki],
                         model.weights[2 * ki + 1], ws);
        if (i < nr - 1) {
          leaky_inplace(a, cfg.leaky_slope);
          et.mid_acts.push_back(a);
          prev = &et.mid_acts.back();
        }
      }
      res = a;  // pre-activation output of the last atrous conv
      for (size_t i = 0; i < res.v.size(); ++i) res.v[i] += t.v[i];
      leaky_inplace(res, cfg.leaky_slope);
    }

    const int kd = enc_conv_index(cfg, b, nr);
    Tensor down = conv_forward(res, defs[kd], cfg.kernel, model.weights[2 * kd],
                               model.weights[2 * kd + 1], ws);
    leaky_inplace(down, cfg.leaky_slope);

    if (trace) {
      et.c0_act = std::move(t);
      et.res_act = std::move(res);
      et.down_act = down;
      trace->enc.push_back(std::move(et));
    }
    cur = std::move(down);
  }

  FeatureMapSet maps;
  maps.reserve(size_t(cfg.decoder_blocks));
  for (int j = 0; j < cfg.decoder_blocks; ++j) {
    DecTrace dt;
    Tensor up;
    if (cur.h < cfg.input_height) {
      up = upsample2(cur);
      dt.upsampled = true;
    } else {
      up = std::move(cur);
    }
    const int kj = dec_conv_index(cfg, j);
    Tensor out = conv_forward(up, defs[kj], cfg.kernel, model.weights[2 * kj],
                              model.weights[2 * kj + 1], ws);
    if (j == cfg.decoder_blocks - 1)
      squash_inplace(out);
    else
      leaky_inplace(out, cfg.leaky_slope);
    if (trace) {
      dt.resized = std::move(up);
      trace->dec.push_back(std::move(dt));
    }
    maps.push_back(out);
    cur = std::move(out);
  }
  return maps;
}

std::vector<std::vector<double>> zero_grads(const AutoencoderModel& model) {
  std::vector<std::vector<double>> g(model.weights.size());
  for (size_t i = 0; i < g.size(); ++i) g[i].assign(model.weights[i].size(), 0.0);
  return g;
}

}  // namespace

void validate(const AEConfig& cfg) {
  if (cfg.input_height <= 0 || cfg.input_width <= 0)
    throw ConfigError("input dimensions must be positive");
  if (cfg.encoder_blocks < 1) throw ConfigError("encoder_blocks must be >= 1");
  if (cfg.decoder_blocks < 1) throw ConfigError("decoder_blocks must be >= 1");
  if (cfg.decoder_blocks < cfg.encoder_blocks)
    throw ConfigError("decoder_blocks must be >= encoder_blocks (x2 upsampling must reach the input size)");
  if (cfg.encoder_blocks > 20) throw ConfigError("encoder_blocks too large");
  const int down = 1 << cfg.encoder_blocks;
  if (cfg.input_height % down != 0 || cfg.input_width % down != 0)
    throw ConfigError("input dimensions must be divisible by 2^encoder_blocks");
  if (cfg.base_channels < 1) throw ConfigError("base_channels must be >= 1");
  if (cfg.atrous_rates.empty()) throw ConfigError("atrous_rates must be non-empty");
  for (int r : cfg.atrous_rates)
    if (r < 1) throw ConfigError("atrous rates must be >= 1");
  if (cfg.kernel < 1 || cfg.kernel % 2 == 0) throw ConfigError("kernel must be odd and positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0))
    throw ConfigError("adam_beta1 must be in [0,1)");
  if (!(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0))
    throw ConfigError("adam_beta2 must be in [0,1)");
  if (cfg.leaky_slope < 0.0) throw ConfigError("leaky_slope must be >= 0");
  if (cfg.init_std < 0.0) throw ConfigError("init_std must be >= 0");
  if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

AutoencoderModel build_model(const AEConfig& cfg) {
  validate(cfg);
  AutoencoderModel model;
  model.config = cfg;
  Rng rng(cfg.seed);
  for (const ConvDef& cd : conv_layout(cfg)) {
    std::vector<float> w(size_t(cd.out_c) * cd.in_c * cfg.kernel * cfg.kernel);
    for (float& v : w) v = float(rng.gaussian() * cfg.init_std);
    model.weights.push_back(std::move(w));
    model.weights.emplace_back(size_t(cd.out_c), 0.0f);  // biases start at zero
  }
  return model;
}

Reconstruction forward(const AutoencoderModel& model, const BScan& x) {
  Workspace ws;
  FeatureMapSet maps = run_forward(model, x, nullptr, ws);
  Reconstruction rec;
  rec.output = make_bscan(model.config.input_height, model.config.input_width);
  rec.output.scan_id = x.scan_id;
  rec.output.index = x.index;
  const Tensor& y = maps.back();
  std::copy(y.v.begin(), y.v.end(), rec.output.pixels.begin());
  rec.feature_maps = std::move(maps);
  return rec;
}

Reconstruction reconstruct(const AutoencoderModel& model, const BScan& x) {
  if (!model.trained) throw ArgumentError("reconstruct requires a trained model");
  return forward(model, x);
}

double raw_error(const BScan& x, const BScan& xhat) {
  if (x.width != xhat.width || x.height != xhat.height)
    throw ArgumentError("raw_error: dimension mismatch");
  double sum2 = 0.0;
  for (size_t i = 0; i < x.pixels.size(); ++i) {
    const double d = xhat.pixels[i] - x.pixels[i];
    sum2 += d * d;
  }
  return std::sqrt(sum2) / double(x.pixel_count());
}

LossGradients loss_gradients(const AutoencoderModel& model, const BScan& x) {
  const AEConfig& cfg = model.config;
  const std::vector<ConvDef> defs = conv_layout(cfg);
  const int nr = int(cfg.atrous_rates.size());

  Workspace ws;
  Trace trace;
  FeatureMapSet maps = run_forward(model, x, &trace, ws);

  LossGradients out;
  out.grads = zero_grads(model);

  const Tensor& y = maps.back();
  const size_t n = y.v.size();
  double sum2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = y.v[i] - x.pixels[i];
    sum2 += d * d;
  }
  const double norm = std::sqrt(sum2);
  out.loss = norm / double(n);
  if (norm == 0.0) return out;  // flat minimum; subgradient zero

  Tensor g(1, y.h, y.w);
  const double scale = 1.0 / (double(n) * norm);
  for (size_t i = 0; i < n; ++i) g.v[i] = (y.v[i] - x.pixels[i]) * scale;

  // Decoder, reversed.
  for (int j = cfg.decoder_blocks - 1; j >= 0; --j) {
    const Tensor& act = maps[size_t(j)];
    if (j == cfg.decoder_blocks - 1)
      squash_backward_inplace(g, act);
    else
      leaky_backward_inplace(g, act, cfg.leaky_slope);

    const int kj = dec_conv_index(cfg, j);
    const Tensor& in = trace.dec[size_t(j)].resized;
    Tensor g_in(in.c, in.h, in.w);
    conv_backward(in, g, defs[kj], cfg.kernel, model.weights[2 * kj], out.grads[2 * kj],
                  out.grads[2 * kj + 1], g_in, ws);

    if (trace.dec[size_t(j)].upsampled) {
      Tensor g_prev(in.c, in.h / 2, in.w / 2);
      for (int c = 0; c < in.c; ++c)
        resize_plane_backward(g_in.plane(c), in.h, in.w, g_prev.plane(c), g_prev.h, g_prev.w);
      g = std::move(g_prev);
    } else {
      g = std::move(g_in);
    }
  }

  // Encoder, reversed.
  for (int b = cfg.encoder_blocks - 1; b >= 0; --b) {
    const EncTrace& et = trace.enc[size_t(b)];

    leaky_backward_inplace(g, et.down_act, cfg.leaky_slope);
    const int kd = enc_conv_index(cfg, b, nr);
    Tensor g_res(et.res_act.c, et.res_act.h, et.res_act.w);
    conv_backward(et.res_act, g, defs[kd], cfg.kernel, model.weights[2 * kd],
                  out.grads[2 * kd], out.grads[2 * kd + 1], g_res, ws);

    Tensor g_t;
    if (nr == 1) {
      g_t = std::move(g_res);  // res_act is c0_act itself
    } else {
      leaky_backward_inplace(g_res, et.res_act, cfg.leaky_slope);
      // g_res is now the gradient at (t + v); it feeds both the skip and
      // the atrous chain.
      Tensor g_chain = g_res;
      for (int i = nr - 1; i >= 1; --i) {
        if (i < nr - 1) leaky_backward_inplace(g_chain, et.mid_acts[size_t(i) - 1], cfg.leaky_slope);
        const Tensor& in = i == 1 ? et.c0_act : et.mid_acts[size_t(i) - 2];
        const int ki = enc_conv_index(cfg, b, i);
        Tensor g_in(in.c, in.h, in.w);
        conv_backward(in, g_chain, defs[ki], cfg.kernel, model.weights[2 * ki],
                      out.grads[2 * ki], out.grads[2 * ki + 1], g_in, ws);
        g_chain = std::move(g_in);
      }
      g_t = std::move(g_chain);
      for (size_t i = 0; i < g_t.v.size(); ++i) g_t.v[i] += g_res.v[i];
    }

    leaky_backward_inplace(g_t, et.c0_act, cfg.leaky_slope);
    const Tensor& block_in = b == 0 ? trace.input : trace.enc[size_t(b) - 1].down_act;
    const int k0 = enc_conv_index(cfg, b, 0);
    Tensor g_in(block_in.c, block_in.h, block_in.w);
    conv_backward(block_in, g_t, defs[k0], cfg.kernel, model.weights[2 * k0],
                  out.grads[2 * k0], out.grads[2 * k0 + 1], g_in, ws);
    g = std::move(g_in);
  }

  return out;
}

void train(AutoencoderModel& model, std::span<const ScanVolume> model_set,
           const TrainOptions& opts) {
  const AEConfig& cfg = model.config;
  validate(cfg);

  std::vector<const BScan*> samples;
  for (const ScanVolume& v : model_set) {
    if (v.label != Label::Bonafide)
      throw ZeroPaViolation("volume '" + v.scan_id + "' in the model set is not bonafide");
    for (const BScan& b : v.bscans) {
      if (b.height != cfg.input_height || b.width != cfg.input_width)
        throw ArgumentError("model-set B-scan dimensions do not match the model config");
      samples.push_back(&b);
    }
  }
  if (samples.empty()) throw ArgumentError("model set has no B-scans");

  // Adam state (kept in double; weight tensors stay float32).
  std::vector<std::vector<double>> adam_m = zero_grads(model), adam_v = zero_grads(model);
  long step = 0;
  const double eps = 1e-8;

  Rng shuffler(derive_seed(cfg.seed, "train"));
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const int threads = std::max(1, opts.threads);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffler.shuffle(order);
    double loss_sum = 0.0;

    for (size_t start = 0; start < order.size(); start += size_t(cfg.batch_size)) {
      const size_t bsz = std::min(size_t(cfg.batch_size), order.size() - start);
      std::vector<LossGradients> slots(bsz);

      const int nt = int(std::min<size_t>(size_t(threads), bsz));
      if (nt <= 1) {
        for (size_t k = 0; k < bsz; ++k)
          slots[k] = loss_gradients(model, *samples[order[start + k]]);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(size_t(nt));
        for (int t = 0; t < nt; ++t) {
          pool.emplace_back([&, t]() {
            for (size_t k = size_t(t); k < bsz; k += size_t(nt))
              slots[k] = loss_gradients(model, *samples[order[start + k]]);
          });
        }
        for (std::thread& th : pool) th.join();
      }

      double batch_loss = 0.0;
      for (size_t k = 0; k < bsz; ++k) batch_loss += slots[k].loss;
      batch_loss /= double(bsz);
      if (!std::isfinite(batch_loss))
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                              std::to_string(start / size_t(cfg.batch_size)));
      for (size_t k = 0; k < bsz; ++k) loss_sum += slots[k].loss;

      // Fixed-order reduction keeps results independent of thread count.
      std::vector<std::vector<double>>& gsum = slots[0].grads;
      for (size_t k = 1; k < bsz; ++k)
        for (size_t i = 0; i < gsum.size(); ++i)
          for (size_t e = 0; e < gsum[i].size(); ++e) gsum[i][e] += slots[k].grads[i][e];
      const double inv_b = 1.0 / double(bsz);

      ++step;
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, double(step));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, double(step));
      for (size_t i = 0; i < model.weights.size(); ++i) {
        std::vector<float>& w = model.weights[i];
        for (size_t e = 0; e < w.size(); ++e) {
          const double grad = gsum[i][e] * inv_b;
          adam_m[i][e] = cfg.adam_beta1 * adam_m[i][e] + (1.0 - cfg.adam_beta1) * grad;
          adam_v[i][e] = cfg.adam_beta2 * adam_v[i][e] + (1.0 - cfg.adam_beta2) * grad * grad;
          const double mh = adam_m[i][e] / c1;
          const double vh = adam_v[i][e] / c2;
          w[e] = float(double(w[e]) - cfg.learning_rate * mh / (std::sqrt(vh) + eps));
        }
      }
    }

    if (opts.on_epoch) opts.on_epoch(epoch, loss_sum / double(samples.size()));
  }

  model.trained = true;
}

namespace {

constexpr char kMagic[4] = {'Z', 'S', 'P', 'C'};
constexpr uint32_t kCheckpointVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}
void put_i32(std::string& buf, int32_t v) { put_u32(buf, uint32_t(v)); }
void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<uint64_t>(v)); }
void put_f32(std::string& buf, float v) { put_u32(buf, std::bit_cast<uint32_t>(v)); }

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  explicit Reader(const std::string& b) : buf(b) {}
  void need(size_t n) const {
    if (pos + n > buf.size()) throw CorruptionError("truncated checkpoint");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(buf[pos + size_t(i)])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(buf[pos + size_t(i)])) << (8 * i);
    pos += 8;
    return v;
  }
  int32_t i32() { return int32_t(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
};

}  // namespace

void save_model(const AutoencoderModel& model, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kCheckpointVersion);

  const AEConfig& c = model.config;
  put_i32(buf, c.input_height);
  put_i32(buf, c.input_width);
  put_i32(buf, c.encoder_blocks);
  put_i32(buf, c.decoder_blocks);
  put_i32(buf, c.base_channels);
  put_i32(buf, c.kernel);
  put_i32(buf, int32_t(c.atrous_rates.size()));
  for (int r : c.atrous_rates) put_i32(buf, r);
  put_f64(buf, c.leaky_slope);
  put_f64(buf, c.init_std);
  put_f64(buf, c.learning_rate);
  put_f64(buf, c.adam_beta1);
  put_f64(buf, c.adam_beta2);
  put_i32(buf, c.epochs);
  put_i32(buf, c.batch_size);
  put_u64(buf, c.seed);
  buf.push_back(model.trained ? char(1) : char(0));

  uint64_t total = 0;
  for (const auto& w : model.weights) total += w.size();
  put_u64(buf, total);
  for (const auto& w : model.weights)
    for (float v : w) put_f32(buf, v);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw IoError("write failed for checkpoint '" + path.string() + "'");
}

AutoencoderModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw FormatError("not a checkpoint file: '" + path.string() + "'");
  Reader r(buf);
  r.pos = 4;
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw IncompatibleCheckpointError("checkpoint version " + std::to_string(version) +
                                      " is not supported (expected " +
                                      std::to_string(kCheckpointVersion) + ")");

  AEConfig c;
  c.input_height = r.i32();
  c.input_width = r.i32();
  c.encoder_blocks = r.i32();
  c.decoder_blocks = r.i32();
  c.base_channels = r.i32();
  c.kernel = r.i32();
  const int nrates = r.i32();
  if (nrates < 1 || nrates > 64) throw CorruptionError("checkpoint rate count out of range");
  c.atrous_rates.clear();
  for (int i = 0; i < nrates; ++i) c.atrous_rates.push_back(r.i32());
  c.leaky_slope = r.f64();
  c.init_std = r.f64();
  c.learning_rate = r.f64();
  c.adam_beta1 = r.f64();
  c.adam_beta2 = r.f64();
  c.epochs = r.i32();
  c.batch_size = r.i32();
  c.seed = r.u64();
  r.need(1);
  const bool trained = buf[r.pos++] != 0;

  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw CorruptionError(std::string("checkpoint config invalid: ") + e.what());
  }

  AutoencoderModel model;
  model.config = c;
  model.trained = trained;

  const uint64_t total = r.u64();
  uint64_t expected = 0;
  for (const ConvDef& cd : conv_layout(c))
    expected += uint64_t(cd.out_c) * uint64_t(cd.in_c) * uint64_t(c.kernel) * uint64_t(c.kernel) +
                uint64_t(cd.out_c);
  if (total != expected) throw CorruptionError("checkpoint weight count mismatch");

  for (const ConvDef& cd : conv_layout(c)) {
    std::vector<float> w(size_t(cd.out_c) * cd.in_c * c.kernel * c.kernel);
    for (float& v : w) v = r.f32();
    model.weights.push_back(std::move(w));
    std::vector<float> b(size_t(cd.out_c));
    for (float& v : b) v = r.f32();
    model.weights.push_back(std::move(b));
  }
  if (r.pos != buf.size()) throw CorruptionError("trailing bytes in checkpoint");
  return model;
}

}  // namespace zspad
