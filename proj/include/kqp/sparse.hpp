#ifndef KQP_SPARSE_HPP
#define KQP_SPARSE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kqp {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Column-major block of `Channels` vectors stored interleaved: entry `i` of
/// every channel is contiguous, so one pass over a sparse matrix or factor
/// serves all channels.
template <typename Scalar, int Channels>
using ChannelBlock = Eigen::Matrix<Scalar, Channels, Eigen::Dynamic>;

/// Two vectors of equal length sharing one interleaved buffer. Row 0 is the
/// primary channel (the optimisation iterate), row 1 the shadow channel (the
/// Arnoldi working vector).
template <typename Scalar>
using DualVector = ChannelBlock<Scalar, 2>;

template <typename Scalar, typename A, typename B>
DualVector<Scalar> make_dual(const Eigen::MatrixBase<A>& primary,
                             const Eigen::MatrixBase<B>& shadow) {
  if (primary.size() != shadow.size())
    throw std::invalid_argument("make_dual: channel lengths differ");
  DualVector<Scalar> v(2, primary.size());
  v.row(0) = primary.transpose();
  v.row(1) = shadow.transpose();
  return v;
}

template <typename Scalar>
Vector<Scalar> primary(const DualVector<Scalar>& v) {
  return v.row(0).transpose();
}

template <typename Scalar>
Vector<Scalar> shadow(const DualVector<Scalar>& v) {
  return v.row(1).transpose();
}

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

/// Compressed-sparse-column matrix with 0-based indices. Row indices within a
/// column are strictly increasing; the constructor rejects anything else.
template <typename Scalar>
class CscMatrix {
 public:
  CscMatrix() : colptr_(1, 0) {}

  CscMatrix(Index nrows, Index ncols, std::vector<Index> colptr,
            std::vector<Index> rowind, std::vector<Scalar> nzval)
      : nrows_(nrows),
        ncols_(ncols),
        colptr_(std::move(colptr)),
        rowind_(std::move(rowind)),
        nzval_(std::move(nzval)) {
    if (auto err = validate(); !err.empty())
      throw std::invalid_argument("CscMatrix: " + err);
  }

  static CscMatrix zero(Index nrows, Index ncols) {
    return CscMatrix(nrows, ncols, std::vector<Index>(ncols + 1, 0), {}, {});
  }

  static CscMatrix identity(Index n) {
    std::vector<Index> colptr(n + 1);
    std::iota(colptr.begin(), colptr.end(), Index{0});
    std::vector<Index> rowind(n);
    std::iota(rowind.begin(), rowind.end(), Index{0});
    return CscMatrix(n, n, std::move(colptr), std::move(rowind),
                     std::vector<Scalar>(n, Scalar(1)));
  }

  /// Keeps every entry that is not exactly zero.
  template <typename Derived>
  static CscMatrix from_dense(const Eigen::MatrixBase<Derived>& dense) {
    std::vector<Index> colptr{0};
    std::vector<Index> rowind;
    std::vector<Scalar> nzval;
    for (Index j = 0; j < dense.cols(); ++j) {
      for (Index i = 0; i < dense.rows(); ++i) {
        if (dense(i, j) != Scalar(0)) {
          rowind.push_back(i);
          nzval.push_back(dense(i, j));
        }
      }
      colptr.push_back(static_cast<Index>(rowind.size()));
    }
    return CscMatrix(dense.rows(), dense.cols(), std::move(colptr),
                     std::move(rowind), std::move(nzval));
  }

  /// Duplicate entries are summed.
  static CscMatrix from_triplets(Index nrows, Index ncols,
                                 const std::vector<Eigen::Triplet<Scalar, Index>>& triplets) {
    Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index> m(nrows, ncols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return from_eigen(m);
  }

  /// Eigen's compressed output is already sorted within columns when built
  /// from triplets; general expressions are re-sorted here.
  template <typename SparseDerived>
  static CscMatrix from_eigen(const Eigen::SparseMatrixBase<SparseDerived>& expr) {
    Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index> m = expr;
    m.makeCompressed();
    std::vector<Index> colptr(m.cols() + 1);
    std::vector<Index> rowind;
    std::vector<Scalar> nzval;
    rowind.reserve(m.nonZeros());
    nzval.reserve(m.nonZeros());
    std::vector<std::pair<Index, Scalar>> column;
    for (Index j = 0; j < m.cols(); ++j) {
      column.clear();
      for (typename decltype(m)::InnerIterator it(m, j); it; ++it)
        column.emplace_back(it.row(), it.value());
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [i, v] : column) {
        rowind.push_back(i);
        nzval.push_back(v);
      }
      colptr[j + 1] = static_cast<Index>(rowind.size());
    }
    return CscMatrix(m.rows(), m.cols(), std::move(colptr), std::move(rowind),
                     std::move(nzval));
  }

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  Index nnz() const { return static_cast<Index>(rowind_.size()); }

  std::span<const Index> colptr() const { return colptr_; }
  std::span<const Index> rowind() const { return rowind_; }
  std::span<const Scalar> nzval() const { return nzval_; }

  /// Empty string when every structural invariant holds, otherwise the first
  /// violation found.
  std::string validate() const {
    if (nrows_ < 0 || ncols_ < 0) return "negative dimension";
    if (static_cast<Index>(colptr_.size()) != ncols_ + 1)
      return "colptr length must be ncols + 1";
    if (colptr_.front() != 0) return "colptr[0] must be 0";
    if (rowind_.size() != nzval_.size()) return "rowind and nzval lengths differ";
    if (colptr_.back() != static_cast<Index>(rowind_.size()))
      return "colptr[ncols] must equal nnz";
    for (Index j = 0; j < ncols_; ++j) {
      if (colptr_[j + 1] < colptr_[j]) return "colptr must be nondecreasing";
      for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
        if (rowind_[p] < 0 || rowind_[p] >= nrows_) return "row index out of range";
        if (p > colptr_[j] && rowind_[p] <= rowind_[p - 1])
          return "row indices must be strictly increasing within a column";
      }
    }
    return {};
  }

  Matrix<Scalar> to_dense() const {
    Matrix<Scalar> d = Matrix<Scalar>::Zero(nrows_, ncols_);
    for (Index j = 0; j < ncols_; ++j)
      for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) d(rowind_[p], j) = nzval_[p];
    return d;
  }

  Eigen::Map<const Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>> as_eigen() const {
    return {nrows_, ncols_, nnz(), colptr_.data(), rowind_.data(), nzval_.data()};
  }

  CscMatrix transpose() const { return from_eigen(as_eigen().transpose()); }

  /// Entries with row <= column.
  CscMatrix upper() const { return from_eigen(as_eigen().template triangularView<Eigen::Upper>()); }

  /// Expands an upper-triangle-stored symmetric matrix to both triangles.
  CscMatrix symmetric_from_upper() const {
    detail::require(nrows_ == ncols_, "symmetric_from_upper: matrix must be square");
    const Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index> full =
        as_eigen().template selfadjointView<Eigen::Upper>();
    return from_eigen(full);
  }

  friend bool operator==(const CscMatrix&, const CscMatrix&) = default;

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> colptr_;
  std::vector<Index> rowind_;
  std::vector<Scalar> nzval_;
};

namespace detail {

// Kernels below walk `Channels` interleaved vectors with identical per-channel
// operation order, so a paired call reproduces two single calls bit for bit.

template <int Channels, typename Scalar>
void spmv_kernel(const CscMatrix<Scalar>& a, const Scalar* x, Scalar* y) {
  const auto colptr = a.colptr();
  const auto rowind = a.rowind();
  const auto nzval = a.nzval();
  std::fill(y, y + Channels * a.nrows(), Scalar(0));
  for (Index j = 0; j < a.ncols(); ++j) {
    Scalar xj[Channels];
    for (int c = 0; c < Channels; ++c) xj[c] = x[Channels * j + c];
    for (Index p = colptr[j]; p < colptr[j + 1]; ++p) {
      Scalar* yi = y + Channels * rowind[p];
      const Scalar v = nzval[p];
      for (int c = 0; c < Channels; ++c) yi[c] += v * xj[c];
    }
  }
}

template <int Channels, typename Scalar>
void spmv_transpose_kernel(const CscMatrix<Scalar>& a, const Scalar* x, Scalar* y) {
  const auto colptr = a.colptr();
  const auto rowind = a.rowind();
  const auto nzval = a.nzval();
  for (Index j = 0; j < a.ncols(); ++j) {
    Scalar acc[Channels] = {};
    for (Index p = colptr[j]; p < colptr[j + 1]; ++p) {
      const Scalar* xi = x + Channels * rowind[p];
      const Scalar v = nzval[p];
      for (int c = 0; c < Channels; ++c) acc[c] += v * xi[c];
    }
    for (int c = 0; c < Channels; ++c) y[Channels * j + c] = acc[c];
  }
}

// `a` holds the upper triangle of a symmetric matrix.
template <int Channels, typename Scalar>
void spmv_symmetric_upper_kernel(const CscMatrix<Scalar>& a, const Scalar* x, Scalar* y) {
  const auto colptr = a.colptr();
  const auto rowind = a.rowind();
  const auto nzval = a.nzval();
  std::fill(y, y + Channels * a.nrows(), Scalar(0));
  for (Index j = 0; j < a.ncols(); ++j) {
    const Scalar* xj = x + Channels * j;
    Scalar* yj = y + Channels * j;
    for (Index p = colptr[j]; p < colptr[j + 1]; ++p) {
      const Index i = rowind[p];
      const Scalar v = nzval[p];
      if (i == j) {
        for (int c = 0; c < Channels; ++c) yj[c] += v * xj[c];
      } else if (i < j) {
        Scalar* yi = y + Channels * i;
        const Scalar* xi = x + Channels * i;
        for (int c = 0; c < Channels; ++c) {
          yi[c] += v * xj[c];
          yj[c] += v * xi[c];
        }
      }
    }
  }
}

}  // namespace detail

/// y = A·x for every channel of `x`.
template <typename Scalar, int Channels>
ChannelBlock<Scalar, Channels> spmv(const CscMatrix<Scalar>& a,
                                    const ChannelBlock<Scalar, Channels>& x) {
  detail::require(x.cols() == a.ncols(), "spmv: dimension mismatch");
  ChannelBlock<Scalar, Channels> y(Channels, a.nrows());
  detail::spmv_kernel<Channels>(a, x.data(), y.data());
  return y;
}

template <typename Scalar>
Vector<Scalar> spmv(const CscMatrix<Scalar>& a, const Vector<Scalar>& x) {
  detail::require(x.size() == a.ncols(), "spmv: dimension mismatch");
  Vector<Scalar> y(a.nrows());
  detail::spmv_kernel<1>(a, x.data(), y.data());
  return y;
}

template <typename Scalar, int Channels>
ChannelBlock<Scalar, Channels> spmv_transpose(const CscMatrix<Scalar>& a,
                                              const ChannelBlock<Scalar, Channels>& y) {
  detail::require(y.cols() == a.nrows(), "spmv_transpose: dimension mismatch");
  ChannelBlock<Scalar, Channels> x(Channels, a.ncols());
  detail::spmv_transpose_kernel<Channels>(a, y.data(), x.data());
  return x;
}

template <typename Scalar>
Vector<Scalar> spmv_transpose(const CscMatrix<Scalar>& a, const Vector<Scalar>& y) {
  detail::require(y.size() == a.nrows(), "spmv_transpose: dimension mismatch");
  Vector<Scalar> x(a.ncols());
  detail::spmv_transpose_kernel<1>(a, y.data(), x.data());
  return x;
}

/// y = S·x where S is symmetric and `upper` stores its upper triangle.
template <typename Scalar, int Channels>
ChannelBlock<Scalar, Channels> spmv_symmetric(const CscMatrix<Scalar>& upper,
                                              const ChannelBlock<Scalar, Channels>& x) {
  detail::require(upper.nrows() == upper.ncols() && x.cols() == upper.ncols(),
                  "spmv_symmetric: dimension mismatch");
  ChannelBlock<Scalar, Channels> y(Channels, upper.nrows());
  detail::spmv_symmetric_upper_kernel<Channels>(upper, x.data(), y.data());
  return y;
}

template <typename Scalar>
Vector<Scalar> spmv_symmetric(const CscMatrix<Scalar>& upper, const Vector<Scalar>& x) {
  detail::require(upper.nrows() == upper.ncols() && x.size() == upper.ncols(),
                  "spmv_symmetric: dimension mismatch");
  Vector<Scalar> y(upper.nrows());
  detail::spmv_symmetric_upper_kernel<1>(upper, x.data(), y.data());
  return y;
}

template <typename Scalar>
DualVector<Scalar> spmv_paired(const CscMatrix<Scalar>& a, const DualVector<Scalar>& v) {
  return spmv<Scalar, 2>(a, v);
}

template <typename Scalar>
DualVector<Scalar> spmv_transpose_paired(const CscMatrix<Scalar>& a,
                                         const DualVector<Scalar>& v) {
  return spmv_transpose<Scalar, 2>(a, v);
}

using CscMatrixd = CscMatrix<double>;
using VectorXd = Vector<double>;
using DualVectord = DualVector<double>;

}  // namespace kqp

#endif  // KQP_SPARSE_HPP
