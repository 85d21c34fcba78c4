#pragma once

#include "radnet/rng.hpp"
#include "radnet/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace radnet {

/// A named, mutable view of one parameter tensor (column-major storage).
struct TensorRef {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::span<double> data;
};

// ---------------------------------------------------------------------------
// Distribution-similarity block
// ---------------------------------------------------------------------------

/// Two fully-connected layers and a sigmoid over the sorted absolute
/// difference of two distribution rows:
///   a = sigmoid(w2 . relu(W1 x + b1) + b2),  x = sort_desc(|d_i - d_j|) zero-padded to width().
///
/// Sorting makes the block invariant to node order; padding lets one block
/// serve any graph with at most width() nodes.
struct SigmaParams {
    Matrix w1; ///< hidden x width
    Vector b1;
    Vector w2; ///< hidden
    double b2 = 0.0;
    std::uint64_t revision = 0; ///< bumped on every optimizer update

    Eigen::Index width() const { return w1.cols(); }
    Eigen::Index hidden() const { return w1.rows(); }

    static SigmaParams zeros(Eigen::Index width, Eigen::Index hidden);
    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    static SigmaParams random(Eigen::Index width, Eigen::Index hidden, Rng& rng);

    std::vector<TensorRef> tensors(const std::string& prefix);
};

/// Sorted, padded input of the block plus the bookkeeping to route gradients back.
struct SigmaInput {
    Vector x;                       ///< width(), descending
    std::vector<Eigen::Index> from; ///< from[r] = index into d of sorted slot r (size = d length)
    Vector sign;                    ///< sign(d_i - d_j)
};

SigmaInput make_sigma_input(const Vector& d_i, const Vector& d_j, Eigen::Index width);

struct SigmaCache {
    SigmaInput input;
    Vector pre; ///< W1 x + b1
    double logit = 0.0;
    double out = 0.0;
    std::uint64_t revision = 0;
    Eigen::Index width = 0;
};

struct SigmaGrads {
    SigmaParams params;
    Vector d_i;
    Vector d_j;
};

std::pair<double, SigmaCache> sigma_forward(const SigmaParams& params, const Vector& d_i, const Vector& d_j);

/// Gradients of upstream * a. ReLU subgradient at 0 is 0.
/// Throws InvalidState if `params` changed since the forward call.
SigmaGrads sigma_backward(const SigmaParams& params, const SigmaCache& cache, double upstream);

/// Batched forward over rows of `x` (each row a prepared block input).
struct SigmaBatch {
    Matrix x;   ///< pairs x width
    Matrix pre; ///< pairs x hidden
    Vector logit;
    Vector out;
};

SigmaBatch sigma_forward_batch(const SigmaParams& params, Matrix x);

/// Accumulates parameter gradients for d(loss)/d(logit) = grad_logit into
/// `grads` and returns d(loss)/dx.
Matrix sigma_backward_batch(const SigmaParams& params, const SigmaBatch& batch, const Vector& grad_logit,
                            SigmaParams& grads);

// ---------------------------------------------------------------------------
// Gated residual feature block
// ---------------------------------------------------------------------------

/// out = normalize(g * tanh(Wt h + bt) + (1 - g) * f),  g = sigmoid(Wg [h; f] + bg).
struct PhiParams {
    Matrix wt; ///< dim x dim
    Vector bt;
    Matrix wg; ///< dim x 2 dim
    Vector bg;
    std::uint64_t revision = 0;

    Eigen::Index dim() const { return wt.rows(); }
    bool empty() const { return wt.size() == 0; }

    static PhiParams zeros(Eigen::Index dim);
    static PhiParams random(Eigen::Index dim, Rng& rng);

    std::vector<TensorRef> tensors(const std::string& prefix);
};

struct PhiCache {
    Vector h;
    Vector f;
    Vector gate;
    Vector z;
    Vector mix;
    Vector out;
    double norm = 0.0;
    std::uint64_t revision = 0;
    Eigen::Index dim = 0;
};

struct PhiGrads {
    PhiParams params;
    Vector h;
    Vector f;
};

std::pair<Vector, PhiCache> phi_forward(const PhiParams& params, const Vector& h, const Vector& f);

/// Gradients of upstream . out, including the renormalization Jacobian.
PhiGrads phi_backward(const PhiParams& params, const PhiCache& cache, const Vector& upstream);

/// Same as phi_backward but accumulates parameter gradients into `grads`
/// and returns only the input gradients.
void phi_backward_into(const PhiParams& params, const PhiCache& cache, const Vector& upstream, PhiParams& grads,
                       Vector& grad_h, Vector& grad_f);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment buffers mirror the parameter tensors by position.
struct AdamState {
    AdamConfig cfg;
    std::vector<Vector> m;
    std::vector<Vector> v;
    std::int64_t step = 0;
};

/// One Kingma-Ba step:
///   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2;
///   p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// Throws NumericalError naming the tensor if any gradient is not finite.
void adam_step(AdamState& state, std::span<TensorRef> params, std::span<const TensorRef> grads);

double sigmoid(double x);

} // namespace radnet
