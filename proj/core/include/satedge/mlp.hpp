#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satedge/random.hpp"

namespace satedge {

/// Adam moments for one parameter block.
template <class Derived>
struct AdamMoments {
  Derived m;
  Derived v;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Applies one bias-corrected Adam update to `p` given gradient `g`.
/// `step` is the 1-based step count after incrementing.
template <class P, class G, class M>
void adam_update(P& p, const G& g, M& m, M& v, long step, const AdamConfig& cfg) {
  using S = typename P::Scalar;
  m = S(cfg.beta1) * m + S(1 - cfg.beta1) * g;
  v = S(cfg.beta2) * v + S(1 - cfg.beta2) * g.cwiseProduct(g);
  const S c1 = S(1) - S(std::pow(cfg.beta1, static_cast<double>(step)));
  const S c2 = S(1) - S(std::pow(cfg.beta2, static_cast<double>(step)));
  p.array() -= S(cfg.lr) * (m.array() / c1) / ((v.array() / c2).sqrt() + S(cfg.eps));
}

/// Dense feed-forward net, ReLU on hidden layers and identity output.
/// Batches are column-major: one sample per column.
template <class Scalar = double>
class DenseNet {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Grads {
    std::vector<Mat> dw;
    std::vector<Vec> db;

    Grads& operator*=(Scalar a) {
      for (auto& w : dw) w *= a;
      for (auto& b : db) b *= a;
      return *this;
    }
  };

  DenseNet() = default;

  DenseNet(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("DenseNet needs at least input and output sizes");
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const bool last = l + 2 == sizes_.size();
      const double limit = std::sqrt((last ? 3.0 : 6.0) / in);
      Mat w(out, in);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = Scalar(uniform_real(rng, -limit, limit));
      w_.push_back(w);
      b_.push_back(Vec::Zero(out));
    }
    reset_optimizer();
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int n_layers() const { return static_cast<int>(w_.size()); }
  std::vector<Mat>& weights() { return w_; }
  std::vector<Vec>& biases() { return b_; }
  const std::vector<Mat>& weights() const { return w_; }
  const std::vector<Vec>& biases() const { return b_; }
  long step_count() const { return step_; }

  Vec forward(const Vec& in) const { return forward_batch(in); }

  Mat forward_batch(const Mat& in) const {
    Mat a = in;
    for (int l = 0; l < n_layers(); ++l) {
      Mat z = (w_[l] * a).colwise() + b_[l];
      a = (l + 1 < n_layers()) ? Mat(z.cwiseMax(Scalar(0))) : z;
    }
    return a;
  }

  Grads zero_grads() const {
    Grads g;
    for (int l = 0; l < n_layers(); ++l) {
      g.dw.push_back(Mat::Zero(w_[l].rows(), w_[l].cols()));
      g.db.push_back(Vec::Zero(b_[l].size()));
    }
    return g;
  }

  /// Accumulates parameter gradients of sum_k dout(:,k) . out(:,k) into g
  /// and returns the gradient with respect to the input batch.
  Mat backward(const Mat& in, const Mat& dout, Grads& g) const {
    std::vector<Mat> acts{in};
    std::vector<Mat> pre;
    for (int l = 0; l < n_layers(); ++l) {
      Mat z = (w_[l] * acts.back()).colwise() + b_[l];
      pre.push_back(z);
      acts.push_back((l + 1 < n_layers()) ? Mat(z.cwiseMax(Scalar(0))) : z);
    }
    Mat delta = dout;
    for (int l = n_layers() - 1; l >= 0; --l) {
      if (l + 1 < n_layers()) delta = delta.cwiseProduct((pre[l].array() > Scalar(0)).template cast<Scalar>().matrix());
      g.dw[l].noalias() += delta * acts[l].transpose();
      g.db[l] += delta.rowwise().sum();
      delta = w_[l].transpose() * delta;
    }
    return delta;
  }

  void adam_step(const Grads& g, const AdamConfig& cfg) {
    ++step_;
    for (int l = 0; l < n_layers(); ++l) {
      adam_update(w_[l], g.dw[l], mw_[l], vw_[l], step_, cfg);
      adam_update(b_[l], g.db[l], mb_[l], vb_[l], step_, cfg);
    }
  }

  void reset_optimizer() {
    step_ = 0;
    mw_.clear();
    vw_.clear();
    mb_.clear();
    vb_.clear();
    for (int l = 0; l < n_layers(); ++l) {
      mw_.push_back(Mat::Zero(w_[l].rows(), w_[l].cols()));
      vw_.push_back(Mat::Zero(w_[l].rows(), w_[l].cols()));
      mb_.push_back(Vec::Zero(b_[l].size()));
      vb_.push_back(Vec::Zero(b_[l].size()));
    }
  }

  Eigen::Index n_params() const {
    Eigen::Index n = 0;
    for (int l = 0; l < n_layers(); ++l) n += w_[l].size() + b_[l].size();
    return n;
  }

  Vec flat_params() const {
    Vec p(n_params());
    Eigen::Index k = 0;
    for (int l = 0; l < n_layers(); ++l) {
      p.segment(k, w_[l].size()) = w_[l].reshaped();
      k += w_[l].size();
      p.segment(k, b_[l].size()) = b_[l];
      k += b_[l].size();
    }
    return p;
  }

  void set_flat_params(const Vec& p) {
    if (p.size() != n_params()) throw std::invalid_argument("DenseNet::set_flat_params: size mismatch");
    Eigen::Index k = 0;
    for (int l = 0; l < n_layers(); ++l) {
      w_[l].reshaped() = p.segment(k, w_[l].size());
      k += w_[l].size();
      b_[l] = p.segment(k, b_[l].size());
      k += b_[l].size();
    }
  }

  static Vec flatten(const Grads& g) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l) n += g.dw[l].size() + g.db[l].size();
    Vec p(n);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l) {
      p.segment(k, g.dw[l].size()) = g.dw[l].reshaped();
      k += g.dw[l].size();
      p.segment(k, g.db[l].size()) = g.db[l];
      k += g.db[l].size();
    }
    return p;
  }

  bool finite() const {
    for (int l = 0; l < n_layers(); ++l)
      if (!w_[l].allFinite() || !b_[l].allFinite()) return false;
    return true;
  }

  /// Text checkpoint: a header line, the layer sizes, then every parameter
  /// at round-trip precision.
  void save(std::ostream& os) const {
    os << "satedge-densenet 1\n" << sizes_.size();
    for (int s : sizes_) os << ' ' << s;
    os << '\n';
    os.precision(17);
    const Vec p = flat_params();
    for (Eigen::Index i = 0; i < p.size(); ++i) os << double(p[i]) << (i + 1 < p.size() ? ' ' : '\n');
    if (p.size() == 0) os << '\n';
  }

  static DenseNet load(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "satedge-densenet" || version != 1)
      throw std::runtime_error("DenseNet::load: not a densenet checkpoint");
    std::size_t n = 0;
    is >> n;
    std::vector<int> sizes(n);
    for (auto& s : sizes) is >> s;
    DenseNet net(sizes, 0);
    Vec p(net.n_params());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double v = 0.0;
      if (!(is >> v)) throw std::runtime_error("DenseNet::load: truncated parameters");
      p[i] = Scalar(v);
    }
    net.set_flat_params(p);
    return net;
  }

 private:
  std::vector<int> sizes_;
  std::vector<Mat> w_;
  std::vector<Vec> b_;
  std::vector<Mat> mw_, vw_;
  std::vector<Vec> mb_, vb_;
  long step_ = 0;
};

}  // namespace satedge
