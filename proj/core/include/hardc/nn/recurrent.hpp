#pragma once

#include <cstddef>
#include <vector>

#include "hardc/nn/tensor.hpp"

namespace hardc::nn {

enum class CellKind { lstm, gru };

inline constexpr std::size_t gate_count(CellKind kind) { return kind == CellKind::lstm ? 4 : 3; }

// One direction of a recurrent layer. Gate blocks are laid out along the
// columns: LSTM [input | forget | cell | output], GRU [update | reset | candidate].
struct RecurrentWeights {
  Tensor w;  // [D, G*U]
  Tensor u;  // [U, G*U]
  Tensor b;  // [G*U]

  std::size_t units() const { return u.dim(0); }
  static RecurrentWeights zeros(CellKind kind, std::size_t input_dim, std::size_t units);
};

struct BiRecurrentWeights {
  RecurrentWeights forward;
  RecurrentWeights backward;
};

// Per-step activations kept for backpropagation through time.
struct RecurrentCache {
  std::vector<double> gates;  // [B, T, G*U] post-activation
  std::vector<double> h;      // [B, T, U]
  std::vector<double> c;      // [B, T, U] (LSTM cell state)
  std::vector<double> rh;     // [B, T, U] (GRU r * h_prev)
};

// x [B,T,D] -> h [B,T,U]. With reverse=true the sequence is consumed from the
// last step to the first and h[t] is the state after reading x[t].
// LSTM: c = f*c' + i*g, h = o*tanh(c).
// GRU:  n = tanh(W_n x + U_n (r*h') + b_n), h = z*h' + (1-z)*n.
Tensor recurrent_forward(CellKind kind, const Tensor& x, const RecurrentWeights& p, bool reverse,
                         RecurrentCache* cache = nullptr);

// Accumulates into gx (same shape as x) and grads.
void recurrent_backward(CellKind kind, const Tensor& x, const RecurrentWeights& p, bool reverse,
                        const RecurrentCache& cache, const Tensor& gh, Tensor& gx, RecurrentWeights& grads);

// x [T,D] -> [T,2U], forward-direction features first.
Tensor bilstm_forward(const Tensor& x, const BiRecurrentWeights& p);
Tensor bigru_forward(const Tensor& x, const BiRecurrentWeights& p);

}  // namespace hardc::nn
