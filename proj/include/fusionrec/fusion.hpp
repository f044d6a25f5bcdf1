#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "fusionrec/encoder.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/rng.hpp"

namespace fusionrec {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using ColMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Learnable weights of the fusion network:
//   p_g = W_g * gv + b_g                 (genre projection)
//   f   = ReLU(W_f * [e_d; p_g] + b_f)   (fusion layer)
// W_f's columns are laid out as [text block | genre block].
template <typename Scalar>
struct BasicFusionParameters {
  RowMatrix<Scalar> W_g;  // text_dim x genre_dim
  Vec<Scalar> b_g;        // text_dim
  RowMatrix<Scalar> W_f;  // text_dim x 2*text_dim
  Vec<Scalar> b_f;        // text_dim

  Eigen::Index text_dim() const { return W_g.rows(); }
  Eigen::Index genre_dim() const { return W_g.cols(); }

  static BasicFusionParameters zeros(Eigen::Index text_dim, Eigen::Index genre_dim) {
    BasicFusionParameters p;
    p.W_g = RowMatrix<Scalar>::Zero(text_dim, genre_dim);
    p.b_g = Vec<Scalar>::Zero(text_dim);
    p.W_f = RowMatrix<Scalar>::Zero(text_dim, 2 * text_dim);
    p.b_f = Vec<Scalar>::Zero(text_dim);
    return p;
  }

  template <typename Fn>
  void for_each_block(Fn&& fn) {
    fn(W_g.data(), W_g.size());
    fn(b_g.data(), b_g.size());
    fn(W_f.data(), W_f.size());
    fn(b_f.data(), b_f.size());
  }
  template <typename Fn>
  void for_each_block(Fn&& fn) const {
    fn(W_g.data(), W_g.size());
    fn(b_g.data(), b_g.size());
    fn(W_f.data(), W_f.size());
    fn(b_f.data(), b_f.size());
  }

  bool operator==(const BasicFusionParameters& o) const {
    return W_g == o.W_g && b_g == o.b_g && W_f == o.W_f && b_f == o.b_f;
  }

  template <typename Other>
  BasicFusionParameters<Other> cast() const {
    return {W_g.template cast<Other>(), b_g.template cast<Other>(), W_f.template cast<Other>(),
            b_f.template cast<Other>()};
  }
};

// Gradients share the parameter layout.
template <typename Scalar>
using BasicFusionGradients = BasicFusionParameters<Scalar>;

using FusionParameters = BasicFusionParameters<float>;
using FusionGradients = BasicFusionGradients<float>;

/// Glorot-uniform weights, zero biases, deterministic per seed.
template <typename Scalar = float>
BasicFusionParameters<Scalar> init_params(std::uint64_t seed, Eigen::Index text_dim = kTextDim,
                                          Eigen::Index genre_dim = kGenreDim) {
  auto p = BasicFusionParameters<Scalar>::zeros(text_dim, genre_dim);
  Rng rng(seed);
  auto fill = [&rng](auto& m) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  };
  fill(p.W_g);
  fill(p.W_f);
  return p;
}

namespace detail {
inline void require_len(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    throw ShapeMismatch(std::string(what) + " has length " + std::to_string(got) +
                        ", expected " + std::to_string(want));
}
}  // namespace detail

template <typename Scalar>
Vec<Scalar> project_genre(const BasicFusionParameters<Scalar>& p, const Vec<Scalar>& gv) {
  detail::require_len(gv.size(), p.genre_dim(), "genre vector");
  return p.W_g * gv + p.b_g;
}

template <typename Scalar>
Vec<Scalar> fuse(const BasicFusionParameters<Scalar>& p, const Vec<Scalar>& e_d,
                 const Vec<Scalar>& p_g) {
  const auto d = p.text_dim();
  detail::require_len(e_d.size(), d, "text embedding");
  detail::require_len(p_g.size(), d, "projected genre vector");
  Vec<Scalar> z = p.W_f.leftCols(d) * e_d + p.W_f.rightCols(d) * p_g + p.b_f;
  return z.cwiseMax(Scalar(0));
}

template <typename Scalar>
Vec<Scalar> forward(const BasicFusionParameters<Scalar>& p, const Vec<Scalar>& e_d,
                    const Vec<Scalar>& gv) {
  return fuse(p, e_d, project_genre(p, gv));
}

// Column-batched forward pass that keeps what backward needs.
template <typename Scalar>
struct BatchForward {
  ColMatrix<Scalar> text;       // text_dim x B
  ColMatrix<Scalar> genre;      // genre_dim x B
  ColMatrix<Scalar> projected;  // text_dim x B
  ColMatrix<Scalar> pre;        // text_dim x B, pre-activation
  ColMatrix<Scalar> out;        // text_dim x B
};

template <typename Scalar>
BatchForward<Scalar> forward_batch(const BasicFusionParameters<Scalar>& p,
                                   ColMatrix<Scalar> text, ColMatrix<Scalar> genre) {
  const auto d = p.text_dim();
  if (text.rows() != d || genre.rows() != p.genre_dim() || text.cols() != genre.cols())
    throw ShapeMismatch("batch shapes do not match fusion parameters");
  BatchForward<Scalar> fw;
  fw.projected = (p.W_g * genre).colwise() + p.b_g;
  fw.pre = (p.W_f.leftCols(d) * text + p.W_f.rightCols(d) * fw.projected).colwise() + p.b_f;
  fw.out = fw.pre.cwiseMax(Scalar(0));
  fw.text = std::move(text);
  fw.genre = std::move(genre);
  return fw;
}

/// Accumulates parameter gradients for a batch into `grads` and returns the
/// gradient with respect to the text inputs. ReLU'(0) is taken as 0.
template <typename Scalar>
ColMatrix<Scalar> backward_batch(const BasicFusionParameters<Scalar>& p,
                                 const BatchForward<Scalar>& fw, const ColMatrix<Scalar>& upstream,
                                 BasicFusionGradients<Scalar>& grads) {
  const auto d = p.text_dim();
  if (upstream.rows() != d || upstream.cols() != fw.out.cols())
    throw ShapeMismatch("upstream gradient shape does not match batch");
  const ColMatrix<Scalar> dz =
      upstream.cwiseProduct((fw.pre.array() > Scalar(0)).template cast<Scalar>().matrix());
  grads.W_f.leftCols(d).noalias() += dz * fw.text.transpose();
  grads.W_f.rightCols(d).noalias() += dz * fw.projected.transpose();
  grads.b_f.noalias() += dz.rowwise().sum();
  const ColMatrix<Scalar> dproj = p.W_f.rightCols(d).transpose() * dz;
  grads.W_g.noalias() += dproj * fw.genre.transpose();
  grads.b_g.noalias() += dproj.rowwise().sum();
  return p.W_f.leftCols(d).transpose() * dz;
}

template <typename Scalar>
struct BackwardResult {
  BasicFusionGradients<Scalar> grads;
  Vec<Scalar> d_text;
};

template <typename Scalar>
BackwardResult<Scalar> backward(const BasicFusionParameters<Scalar>& p, const Vec<Scalar>& e_d,
                                const Vec<Scalar>& gv, const Vec<Scalar>& upstream) {
  detail::require_len(e_d.size(), p.text_dim(), "text embedding");
  detail::require_len(gv.size(), p.genre_dim(), "genre vector");
  detail::require_len(upstream.size(), p.text_dim(), "upstream gradient");
  auto fw = forward_batch<Scalar>(p, e_d, gv);
  BackwardResult<Scalar> r{BasicFusionGradients<Scalar>::zeros(p.text_dim(), p.genre_dim()), {}};
  r.d_text = backward_batch<Scalar>(p, fw, upstream, r.grads).col(0);
  return r;
}

/// Global L2 norm across all four blocks.
template <typename Scalar>
double global_norm(const BasicFusionParameters<Scalar>& g) {
  double acc = 0.0;
  g.for_each_block([&acc](const Scalar* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) acc += static_cast<double>(data[i]) * data[i];
  });
  return std::sqrt(acc);
}

template <typename Scalar>
bool all_finite(const BasicFusionParameters<Scalar>& g) {
  bool ok = true;
  g.for_each_block([&ok](const Scalar* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n && ok; ++i) ok = std::isfinite(data[i]);
  });
  return ok;
}

// On-disk fusion model (LFRMDL1).
struct FusionCheckpoint {
  FusionParameters params;
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;

  bool operator==(const FusionCheckpoint&) const = default;
};

std::string serialize_checkpoint(const FusionCheckpoint& ckpt);
FusionCheckpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const FusionCheckpoint& ckpt, const std::string& path);
FusionCheckpoint load_checkpoint(const std::string& path);
/// FNV-1a 64 over the serialized checkpoint.
std::uint64_t fingerprint(const FusionCheckpoint& ckpt);

}  // namespace fusionrec
