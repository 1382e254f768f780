#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hullcraft/common.hpp"
#include "hullcraft/image.hpp"
#include "hullcraft/rng.hpp"

namespace hullcraft::net {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-call scratch a layer may fill during forward and read during
// backward. Layers are immutable after construction; all evaluation
// state lives here so one network can serve concurrent callers.
struct LayerScratch {
  Vec aux;                // dropout mask, im2col buffer, ...
  std::vector<int> idx;   // pool argmax positions
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual ImageShape output_shape(const ImageShape& in) const = 0;

  // rng == nullptr means deterministic evaluation; stochastic layers
  // become the identity in that case.
  virtual void forward(const ImageShape& in_shape, const Vec& in, Vec& out,
                       LayerScratch& scratch, Rng* rng) const = 0;

  // grad_in is overwritten; param_grad (when non-null) points at this
  // layer's slice of the flat gradient vector and is accumulated into.
  virtual void backward(const ImageShape& in_shape, const Vec& in,
                        const LayerScratch& scratch, const Vec& grad_out,
                        Vec& grad_in, double* param_grad) const = 0;

  virtual int param_count() const { return 0; }
  virtual void write_params(double* dst) const { (void)dst; }
  virtual void read_params(const double* src) { (void)src; }
  virtual void init_params(Rng& rng) { (void)rng; }
  virtual std::string kind() const = 0;
};

class Dense : public Layer {
 public:
  Dense(int in_dim, int out_dim)
      : in_dim_(in_dim), out_dim_(out_dim), w_(Mat::Zero(out_dim, in_dim)),
        b_(Vec::Zero(out_dim)) {}

  ImageShape output_shape(const ImageShape& in) const override {
    require(in.size() == in_dim_, "dense: input size mismatch");
    return {out_dim_, 1, 1};
  }

  void forward(const ImageShape&, const Vec& in, Vec& out, LayerScratch&,
               Rng*) const override {
    out.noalias() = w_ * in;
    out += b_;
  }

  void backward(const ImageShape&, const Vec& in, const LayerScratch&,
                const Vec& grad_out, Vec& grad_in,
                double* param_grad) const override {
    grad_in.noalias() = w_.transpose() * grad_out;
    if (param_grad) {
      Eigen::Map<RowMat> gw(param_grad, out_dim_, in_dim_);
      gw.noalias() += grad_out * in.transpose();
      Eigen::Map<Vec> gb(param_grad + out_dim_ * in_dim_, out_dim_);
      gb += grad_out;
    }
  }

  int param_count() const override { return out_dim_ * (in_dim_ + 1); }

  void write_params(double* dst) const override {
    Eigen::Map<RowMat>(dst, out_dim_, in_dim_) = w_;
    Eigen::Map<Vec>(dst + out_dim_ * in_dim_, out_dim_) = b_;
  }

  void read_params(const double* src) override {
    w_ = Eigen::Map<const RowMat>(src, out_dim_, in_dim_);
    b_ = Eigen::Map<const Vec>(src + out_dim_ * in_dim_, out_dim_);
  }

  void init_params(Rng& rng) override {
    const double s = std::sqrt(2.0 / in_dim_);
    for (int r = 0; r < out_dim_; ++r)
      for (int c = 0; c < in_dim_; ++c) w_(r, c) = s * rng.normal();
    b_.setZero();
  }

  std::string kind() const override { return "dense"; }

  const Mat& weights() const { return w_; }
  void set_weights(const Mat& w, const Vec& b) {
    require(w.rows() == out_dim_ && w.cols() == in_dim_ && b.size() == out_dim_,
            "dense: bad explicit weights");
    w_ = w;
    b_ = b;
  }

 private:
  int in_dim_, out_dim_;
  Mat w_;
  Vec b_;
};

class Conv2d : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int pad)
      : in_c_(in_channels), out_c_(out_channels), k_(kernel), pad_(pad),
        w_(Mat::Zero(out_channels, in_channels * kernel * kernel)),
        b_(Vec::Zero(out_channels)) {}

  ImageShape output_shape(const ImageShape& in) const override {
    require(in.channels == in_c_, "conv: channel mismatch");
    const int oh = in.height + 2 * pad_ - k_ + 1;
    const int ow = in.width + 2 * pad_ - k_ + 1;
    require(oh > 0 && ow > 0, "conv: kernel larger than padded input");
    return {out_c_, oh, ow};
  }

  void forward(const ImageShape& in_shape, const Vec& in, Vec& out,
               LayerScratch& scratch, Rng*) const override {
    const ImageShape os = output_shape(in_shape);
    const int cols = os.height * os.width;
    const int rows = in_c_ * k_ * k_;
    scratch.aux.resize(rows * cols);
    Eigen::Map<Mat> col(scratch.aux.data(), rows, cols);
    im2col(in_shape, in, col, os);
    out.resize(os.size());
    Eigen::Map<RowMat> y(out.data(), out_c_, cols);
    y.noalias() = w_ * col;
    y.colwise() += b_;
  }

  void backward(const ImageShape& in_shape, const Vec&,
                const LayerScratch& scratch, const Vec& grad_out, Vec& grad_in,
                double* param_grad) const override {
    const ImageShape os = output_shape(in_shape);
    const int cols = os.height * os.width;
    const int rows = in_c_ * k_ * k_;
    Eigen::Map<const Mat> col(scratch.aux.data(), rows, cols);
    Eigen::Map<const RowMat> g(grad_out.data(), out_c_, cols);
    if (param_grad) {
      Eigen::Map<RowMat> gw(param_grad, out_c_, rows);
      gw.noalias() += g * col.transpose();
      Eigen::Map<Vec> gb(param_grad + out_c_ * rows, out_c_);
      gb += g.rowwise().sum();
    }
    Mat gcol = w_.transpose() * g;
    grad_in = Vec::Zero(in_shape.size());
    col2im_add(in_shape, gcol, grad_in, os);
  }

  int param_count() const override { return out_c_ * (in_c_ * k_ * k_ + 1); }

  void write_params(double* dst) const override {
    const int n = in_c_ * k_ * k_;
    Eigen::Map<RowMat>(dst, out_c_, n) = w_;
    Eigen::Map<Vec>(dst + out_c_ * n, out_c_) = b_;
  }

  void read_params(const double* src) override {
    const int n = in_c_ * k_ * k_;
    w_ = Eigen::Map<const RowMat>(src, out_c_, n);
    b_ = Eigen::Map<const Vec>(src + out_c_ * n, out_c_);
  }

  void init_params(Rng& rng) override {
    const double s = std::sqrt(2.0 / (in_c_ * k_ * k_));
    for (int r = 0; r < w_.rows(); ++r)
      for (int c = 0; c < w_.cols(); ++c) w_(r, c) = s * rng.normal();
    b_.setZero();
  }

  std::string kind() const override { return "conv2d"; }

 private:
  void im2col(const ImageShape& in_shape, const Vec& in, Eigen::Map<Mat>& col,
              const ImageShape& os) const {
    const int h = in_shape.height, w = in_shape.width;
    for (int oy = 0; oy < os.height; ++oy) {
      for (int ox = 0; ox < os.width; ++ox) {
        const int c0 = oy * os.width + ox;
        int r = 0;
        for (int ic = 0; ic < in_c_; ++ic) {
          for (int ky = 0; ky < k_; ++ky) {
            const int y = oy + ky - pad_;
            for (int kx = 0; kx < k_; ++kx, ++r) {
              const int x = ox + kx - pad_;
              col(r, c0) = (y >= 0 && y < h && x >= 0 && x < w)
                               ? in[(ic * h + y) * w + x]
                               : 0.0;
            }
          }
        }
      }
    }
  }

  void col2im_add(const ImageShape& in_shape, const Mat& gcol, Vec& grad_in,
                  const ImageShape& os) const {
    const int h = in_shape.height, w = in_shape.width;
    for (int oy = 0; oy < os.height; ++oy) {
      for (int ox = 0; ox < os.width; ++ox) {
        const int c0 = oy * os.width + ox;
        int r = 0;
        for (int ic = 0; ic < in_c_; ++ic) {
          for (int ky = 0; ky < k_; ++ky) {
            const int y = oy + ky - pad_;
            for (int kx = 0; kx < k_; ++kx, ++r) {
              const int x = ox + kx - pad_;
              if (y >= 0 && y < h && x >= 0 && x < w)
                grad_in[(ic * h + y) * w + x] += gcol(r, c0);
            }
          }
        }
      }
    }
  }

  int in_c_, out_c_, k_, pad_;
  Mat w_;  // out_c x (in_c*k*k)
  Vec b_;
};

class Relu : public Layer {
 public:
  ImageShape output_shape(const ImageShape& in) const override { return in; }

  void forward(const ImageShape&, const Vec& in, Vec& out, LayerScratch&,
               Rng*) const override {
    out = in.cwiseMax(0.0);
  }

  void backward(const ImageShape&, const Vec& in, const LayerScratch&,
                const Vec& grad_out, Vec& grad_in, double*) const override {
    grad_in = (in.array() > 0.0).select(grad_out, 0.0);
  }

  std::string kind() const override { return "relu"; }
};

class MaxPool2d : public Layer {
 public:
  explicit MaxPool2d(int window) : win_(window) {}

  ImageShape output_shape(const ImageShape& in) const override {
    require(in.height % win_ == 0 && in.width % win_ == 0,
            "maxpool: input not divisible by window");
    return {in.channels, in.height / win_, in.width / win_};
  }

  void forward(const ImageShape& in_shape, const Vec& in, Vec& out,
               LayerScratch& scratch, Rng*) const override {
    const ImageShape os = output_shape(in_shape);
    out.resize(os.size());
    scratch.idx.assign(os.size(), 0);
    const int h = in_shape.height, w = in_shape.width;
    for (int c = 0; c < os.channels; ++c) {
      for (int oy = 0; oy < os.height; ++oy) {
        for (int ox = 0; ox < os.width; ++ox) {
          int best = (c * h + oy * win_) * w + ox * win_;
          double bv = in[best];
          for (int ky = 0; ky < win_; ++ky) {
            for (int kx = 0; kx < win_; ++kx) {
              const int i = (c * h + oy * win_ + ky) * w + ox * win_ + kx;
              if (in[i] > bv) {
                bv = in[i];
                best = i;
              }
            }
          }
          const int o = (c * os.height + oy) * os.width + ox;
          out[o] = bv;
          scratch.idx[o] = best;
        }
      }
    }
  }

  void backward(const ImageShape& in_shape, const Vec&,
                const LayerScratch& scratch, const Vec& grad_out, Vec& grad_in,
                double*) const override {
    grad_in = Vec::Zero(in_shape.size());
    for (int o = 0; o < grad_out.size(); ++o)
      grad_in[scratch.idx[o]] += grad_out[o];
  }

  std::string kind() const override { return "maxpool"; }

 private:
  int win_;
};

// Inverted dropout: active only when an rng stream is supplied.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate) : rate_(rate) {
    require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
  }

  ImageShape output_shape(const ImageShape& in) const override { return in; }

  void forward(const ImageShape&, const Vec& in, Vec& out,
               LayerScratch& scratch, Rng* rng) const override {
    if (!rng || rate_ == 0.0) {
      out = in;
      scratch.aux.resize(0);
      return;
    }
    const double keep = 1.0 - rate_;
    scratch.aux.resize(in.size());
    for (int i = 0; i < in.size(); ++i)
      scratch.aux[i] = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    out = in.cwiseProduct(scratch.aux);
  }

  void backward(const ImageShape&, const Vec&, const LayerScratch& scratch,
                const Vec& grad_out, Vec& grad_in, double*) const override {
    if (scratch.aux.size() == 0) {
      grad_in = grad_out;
      return;
    }
    grad_in = grad_out.cwiseProduct(scratch.aux);
  }

  std::string kind() const override { return "dropout"; }

  double rate() const { return rate_; }

 private:
  double rate_;
};

class Flatten : public Layer {
 public:
  ImageShape output_shape(const ImageShape& in) const override {
    return {in.size(), 1, 1};
  }
  void forward(const ImageShape&, const Vec& in, Vec& out, LayerScratch&,
               Rng*) const override {
    out = in;
  }
  void backward(const ImageShape&, const Vec&, const LayerScratch&,
                const Vec& grad_out, Vec& grad_in, double*) const override {
    grad_in = grad_out;
  }
  std::string kind() const override { return "flatten"; }
};

}  // namespace hullcraft::net
