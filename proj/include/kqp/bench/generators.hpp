#ifndef KQP_BENCH_GENERATORS_HPP
#define KQP_BENCH_GENERATORS_HPP

#include "kqp/qp_model.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace kqp::bench {

enum class ProblemKind { RandomQp, EqualityQp, MpcToy, Lasso, Huber };

ProblemKind parse_kind(std::string_view name);
std::string to_string(ProblemKind kind);

/// Size knobs; each kind reads only the fields it needs.
struct GeneratorParams {
  Index n = 20;           // random_qp, equality_qp: variables
  Index m = 30;           // random_qp: inequality rows; equality_qp: equality rows (<= n)
  double density = 0.3;   // sparse data density
  double p_reg = 1e-2;    // P = BᵀB + p_reg·I
  Index horizon = 10;     // mpc_toy
  Index features = 10;    // lasso, huber
  Index samples = 20;     // lasso, huber
  double lambda = 0.2;    // lasso: λ as a multiple of ‖Aᵀb‖∞
  double huber_m = 1.0;   // huber threshold
};

/// Feasible, bounded instance; the seed fixes every random draw.
///
/// random_qp    P = BᵀB + p_reg·I, sparse A, b = A x₀ + s₀ with s₀ > 0.
/// equality_qp  m1 = 0, b = A x₀.
/// mpc_toy      condensed double-integrator MPC with input and state boxes.
/// lasso        min ½‖y‖² + λ1ᵀt  s.t.  −t ≤ x ≤ t,  Ax − y = b.
/// huber        min ‖u‖² + 2M·1ᵀ(r + s)  s.t.  r, s ≥ 0,  Ax − u − r + s = b.
QpProblemd generate(ProblemKind kind, const GeneratorParams& params, std::uint64_t seed);

}  // namespace kqp::bench

#endif  // KQP_BENCH_GENERATORS_HPP
