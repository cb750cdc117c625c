#ifndef KQP_SPD_FACTOR_HPP
#define KQP_SPD_FACTOR_HPP

#include "kqp/sparse.hpp"

#include <Eigen/OrderingMethods>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace kqp {

enum class Ordering { Natural, Amd };

/// Sparse LDLᵀ factorization P W Pᵀ = L D Lᵀ of a symmetric positive definite
/// matrix. The fill-reducing permutation never leaves this class: solves take
/// and return vectors in the original ordering.
template <typename Scalar>
class SpdFactor {
 public:
  Index dim() const { return n_; }
  Index nnz_l() const { return static_cast<Index>(li_.size()); }

  Vector<Scalar> solve(const Vector<Scalar>& rhs) const {
    detail::require(rhs.size() == n_, "SpdFactor::solve: dimension mismatch");
    Vector<Scalar> out(n_);
    solve_channels<1>(rhs.data(), out.data());
    return out;
  }

  template <int Channels>
  ChannelBlock<Scalar, Channels> solve(const ChannelBlock<Scalar, Channels>& rhs) const {
    detail::require(rhs.cols() == n_, "SpdFactor::solve: dimension mismatch");
    ChannelBlock<Scalar, Channels> out(Channels, n_);
    solve_channels<Channels>(rhs.data(), out.data());
    return out;
  }

  DualVector<Scalar> solve_paired(const DualVector<Scalar>& rhs) const {
    return solve<2>(rhs);
  }

  /// Solves in place on `Channels` interleaved vectors of length dim().
  template <int Channels>
  void solve_channels(const Scalar* rhs, Scalar* out) const {
    std::vector<Scalar> work(static_cast<std::size_t>(Channels) * n_);
    for (Index k = 0; k < n_; ++k)
      for (int c = 0; c < Channels; ++c) work[Channels * k + c] = rhs[Channels * perm_[k] + c];

    for (Index j = 0; j < n_; ++j) {
      const Scalar* xj = work.data() + Channels * j;
      for (Index p = lp_[j]; p < lp_[j + 1]; ++p) {
        Scalar* xi = work.data() + Channels * li_[p];
        for (int c = 0; c < Channels; ++c) xi[c] -= lx_[p] * xj[c];
      }
    }
    for (Index j = 0; j < n_; ++j)
      for (int c = 0; c < Channels; ++c) work[Channels * j + c] *= dinv_[j];
    for (Index j = n_ - 1; j >= 0; --j) {
      Scalar* xj = work.data() + Channels * j;
      for (Index p = lp_[j]; p < lp_[j + 1]; ++p) {
        const Scalar* xi = work.data() + Channels * li_[p];
        for (int c = 0; c < Channels; ++c) xj[c] -= lx_[p] * xi[c];
      }
    }

    for (Index k = 0; k < n_; ++k)
      for (int c = 0; c < Channels; ++c) out[Channels * perm_[k] + c] = work[Channels * k + c];
  }

  template <typename S>
  friend std::optional<SpdFactor<S>> spd_factorize(const CscMatrix<S>& w, Ordering ordering);

 private:
  Index n_ = 0;
  std::vector<Index> perm_;  // position in factor -> original index
  std::vector<Index> lp_, li_;
  std::vector<Scalar> lx_, d_, dinv_;
};

namespace detail {

// Upper triangle of P W Pᵀ where perm[k] is the original index placed at k.
template <typename Scalar>
CscMatrix<Scalar> permute_symmetric_upper(const CscMatrix<Scalar>& w,
                                          const std::vector<Index>& perm) {
  const Index n = w.ncols();
  std::vector<Index> iperm(n);
  for (Index k = 0; k < n; ++k) iperm[perm[k]] = k;
  std::vector<Eigen::Triplet<Scalar, Index>> t;
  t.reserve(w.nnz());
  const auto colptr = w.colptr();
  const auto rowind = w.rowind();
  const auto nzval = w.nzval();
  for (Index j = 0; j < n; ++j) {
    for (Index p = colptr[j]; p < colptr[j + 1]; ++p) {
      const Index i = rowind[p];
      if (i > j) continue;
      const Index a = iperm[i], b = iperm[j];
      t.emplace_back(std::min(a, b), std::max(a, b), nzval[p]);
    }
  }
  return CscMatrix<Scalar>::from_triplets(n, n, t);
}

template <typename Scalar>
std::vector<Index> amd_permutation(const CscMatrix<Scalar>& upper) {
  Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index> full =
      upper.as_eigen().template selfadjointView<Eigen::Upper>();
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> p;
  Eigen::AMDOrdering<Index> amd;
  amd(full, p);
  // Eigen returns the inverse permutation: indices()[k] is the original
  // index eliminated at step k.
  return {p.indices().data(), p.indices().data() + p.indices().size()};
}

}  // namespace detail

/// Factorizes the symmetric matrix whose upper triangle is stored in `w`
/// (entries below the diagonal are ignored). Returns nullopt when a pivot is
/// not safely positive, which is how callers detect a matrix that is not
/// positive definite.
template <typename Scalar>
std::optional<SpdFactor<Scalar>> spd_factorize(const CscMatrix<Scalar>& w,
                                               Ordering ordering = Ordering::Amd) {
  detail::require(w.nrows() == w.ncols(), "spd_factorize: matrix must be square");
  const Index n = w.ncols();

  SpdFactor<Scalar> f;
  f.n_ = n;
  if (ordering == Ordering::Amd && n > 1) {
    f.perm_ = detail::amd_permutation(w);
  } else {
    f.perm_.resize(n);
    std::iota(f.perm_.begin(), f.perm_.end(), Index{0});
  }
  const CscMatrix<Scalar> c = detail::permute_symmetric_upper(w, f.perm_);
  const auto cp = c.colptr();
  const auto ci = c.rowind();
  const auto cx = c.nzval();

  // Elimination tree and column counts of L.
  std::vector<Index> etree(n, -1), lnz(n, 0), work(n);
  for (Index j = 0; j < n; ++j) {
    work[j] = j;
    for (Index p = cp[j]; p < cp[j + 1]; ++p) {
      Index i = ci[p];
      while (work[i] != j) {
        if (etree[i] == -1) etree[i] = j;
        ++lnz[i];
        work[i] = j;
        i = etree[i];
      }
    }
  }

  f.lp_.assign(n + 1, 0);
  for (Index i = 0; i < n; ++i) f.lp_[i + 1] = f.lp_[i] + lnz[i];
  f.li_.assign(f.lp_[n], 0);
  f.lx_.assign(f.lp_[n], Scalar(0));
  f.d_.assign(n, Scalar(0));
  f.dinv_.assign(n, Scalar(0));

  std::vector<Index> next_free(f.lp_.begin(), f.lp_.end() - 1);
  std::vector<Scalar> y(n, Scalar(0));
  std::vector<char> marked(n, 0);
  std::vector<Index> pattern(n), stack(n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  // Up-looking: row k of L solves L(0:k,0:k) D y = C(0:k, k).
  for (Index k = 0; k < n; ++k) {
    Index npat = 0;
    Scalar diag = Scalar(0);
    for (Index p = cp[k]; p < cp[k + 1]; ++p) {
      const Index i = ci[p];
      if (i == k) {
        diag = cx[p];
        continue;
      }
      y[i] = cx[p];
      if (marked[i]) continue;
      Index top = 0;
      for (Index r = i; r != -1 && r < k && !marked[r]; r = etree[r]) {
        marked[r] = 1;
        stack[top++] = r;
      }
      while (top > 0) pattern[npat++] = stack[--top];
    }

    Scalar dk = diag;
    for (Index t = npat - 1; t >= 0; --t) {
      const Index col = pattern[t];
      const Scalar yc = y[col];
      const Index end = next_free[col];
      for (Index p = f.lp_[col]; p < end; ++p) y[f.li_[p]] -= f.lx_[p] * yc;
      const Scalar l = yc * f.dinv_[col];
      f.li_[end] = k;
      f.lx_[end] = l;
      dk -= yc * l;
      ++next_free[col];
      y[col] = Scalar(0);
      marked[col] = 0;
    }

    if (!(dk > Scalar(16) * eps * std::abs(diag))) return std::nullopt;
    f.d_[k] = dk;
    f.dinv_[k] = Scalar(1) / dk;
  }
  return f;
}

/// Dense convenience overload; the upper triangle is authoritative.
template <typename Derived>
auto spd_factorize(const Eigen::MatrixBase<Derived>& w, Ordering ordering = Ordering::Amd) {
  using Scalar = typename Derived::Scalar;
  return spd_factorize(CscMatrix<Scalar>::from_dense(w.template triangularView<Eigen::Upper>().toDenseMatrix()),
                       ordering);
}

template <typename Scalar>
DualVector<Scalar> factor_solve_paired(const SpdFactor<Scalar>& f, const DualVector<Scalar>& rhs) {
  return f.solve_paired(rhs);
}

}  // namespace kqp

#endif  // KQP_SPD_FACTOR_HPP
