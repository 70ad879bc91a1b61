#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "relunet/fnn.hpp"

namespace relunet {

// Depth-K network computing x -> x exactly through rho(x) - rho(-x).
// K = 1 gives [[I_d, 0]]; K >= 2 gives [I; -I], (K-2) x I_{2d}, [I, -I].
Fnn identity_fnn(std::size_t d, std::size_t K);

// Network computing outer(inner(x)). The last layer of `inner` and the first
// layer of `outer` are merged, so depth is L(outer) + L(inner) - 1.
Fnn concatenate(const Fnn& outer, const Fnn& inner);

// Same function as f, padded to depth exactly K by appending an identity
// tail of width 2 * N_K. K == L(f) returns f unchanged.
Fnn match_depth(const Fnn& f, std::size_t K);

// All networks read the same input; outputs are stacked in order.
// Requires equal input width and equal depth.
Fnn parallelize_shared(std::span<const Fnn> fnns);

// Network i reads its own input block (blocks concatenated in order) and its
// output is scaled by coeffs[i]. Depths are equalized with match_depth first.
Fnn parallelize_disjoint(std::span<const Fnn> fnns, std::span<const double> coeffs);

// Offsets of each constituent's input block for parallelize_disjoint.
std::vector<std::size_t> disjoint_input_offsets(std::span<const Fnn> fnns);

// Coefficient-weighted sum of constituent outputs (equal output width d).
// With shared_input every constituent reads the same x; otherwise inputs are
// disjoint blocks. Depths are equalized; the summing row [a_1 I, ..., a_n I]
// is merged into the last layer, so the depth is max_i L(f_i).
Fnn superpose(std::span<const Fnn> fnns, std::span<const double> coeffs, bool shared_input);

// 0/1 matrix of shape picks.size() x full_width with row r selecting
// coordinate picks[r].
Matrix selection_matrix(std::span<const std::size_t> picks, std::size_t full_width);

// f applied to selector * x: the first weight matrix becomes W_1 * selector.
// The selector must have exactly one 1 per row and zeros elsewhere.
Fnn compose_selection(const Fnn& f, const Matrix& selector);

}  // namespace relunet
