#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshgemm {

/// Transpose selector for gemm operands. For real data the conjugating
/// variants collapse onto their non-conjugating counterparts.
enum class Op : char {
  None = 'n',
  Trans = 't',
  Conj = 'c',
  Herm = 'h',
};

/// c -> n and h -> t (real data only; there is no complex path).
constexpr Op normalize(Op op) noexcept {
  switch (op) {
    case Op::Conj: return Op::None;
    case Op::Herm: return Op::Trans;
    default: return op;
  }
}

constexpr bool is_transposed(Op op) noexcept {
  return normalize(op) == Op::Trans;
}

Op parse_op(char c);

/// Strided 2-D view over an element buffer. Non-owning; the universal
/// matrix handle passed between modules. Column-major <=> row_stride == 1.
template <typename T>
struct MatrixView {
  T* data = nullptr;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t row_stride = 0;
  std::int64_t col_stride = 0;

  T& at(std::int64_t i, std::int64_t j) const {
    return data[i * row_stride + j * col_stride];
  }

  MatrixView<const T> as_const() const {
    return {data, rows, cols, row_stride, col_stride};
  }

  /// View over a rectangular sub-block starting at (i0, j0).
  MatrixView block(std::int64_t i0, std::int64_t j0, std::int64_t r,
                   std::int64_t c) const {
    return {data + i0 * row_stride + j0 * col_stride, r, c, row_stride,
            col_stride};
  }

  static MatrixView col_major(T* p, std::int64_t rows, std::int64_t cols,
                              std::int64_t ld) {
    return {p, rows, cols, 1, ld};
  }

  static MatrixView row_major(T* p, std::int64_t rows, std::int64_t cols,
                              std::int64_t ld) {
    return {p, rows, cols, ld, 1};
  }
};

enum class Layout { ColMajor, RowMajor };

/// Owning matrix with dense storage in the requested layout.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols, Layout layout = Layout::ColMajor)
      : store_(static_cast<std::size_t>(rows * cols)),
        rows_(rows),
        cols_(cols),
        layout_(layout) {}

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  Layout layout() const { return layout_; }
  T* data() { return store_.data(); }
  const T* data() const { return store_.data(); }
  std::size_t size() const { return store_.size(); }

  MatrixView<T> view() {
    if (layout_ == Layout::ColMajor)
      return MatrixView<T>::col_major(store_.data(), rows_, cols_, rows_);
    return MatrixView<T>::row_major(store_.data(), rows_, cols_, cols_);
  }
  MatrixView<const T> cview() const {
    if (layout_ == Layout::ColMajor)
      return MatrixView<const T>::col_major(store_.data(), rows_, cols_, rows_);
    return MatrixView<const T>::row_major(store_.data(), rows_, cols_, cols_);
  }

  T& at(std::int64_t i, std::int64_t j) {
    return layout_ == Layout::ColMajor ? store_[i + j * rows_]
                                       : store_[i * cols_ + j];
  }
  const T& at(std::int64_t i, std::int64_t j) const {
    return layout_ == Layout::ColMajor ? store_[i + j * rows_]
                                       : store_[i * cols_ + j];
  }

 private:
  std::vector<T> store_;
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  Layout layout_ = Layout::ColMajor;
};

/// Error metrics of a computed matrix against a reference. Relative
/// errors are normwise: |test - ref| over the largest |ref| entry, so
/// near-zero entries do not dominate the statistics.
struct ErrorReport {
  double mean_rel_err = 0.0;
  double max_rel_err = 0.0;
  /// max |test - ref| / (norm_scale * eps_single). The epsilon is always
  /// single precision: it is the precision of the compute core, regardless
  /// of the element type the caller compares in.
  double normalized_residue = 0.0;
};

/// Denominator floor for normwise relative errors (guards the all-zero
/// reference case).
inline constexpr double kRelErrFloor = 1e-30;
inline constexpr double kEpsSingle = std::numeric_limits<float>::epsilon();

/// Reference gemm: C = alpha * op(A) * op(B) + beta * C. Accumulation is
/// always double precision; this is the oracle every other path is
/// checked against.
template <typename T>
void ref_gemm(double alpha, MatrixView<const T> A, Op opA,
              MatrixView<const T> B, Op opB, double beta, MatrixView<T> C);

/// Packs op(A)[row_offset .. row_offset+m_tile) x [0, k_len) into a
/// column-major m_tile x padded-k panel. Rows past op(A)'s extent and
/// columns past k_len availability are zero; k_len is rounded up to a
/// multiple of ksub.
Matrix<float> pack_a(MatrixView<const float> A, Op opA, std::int64_t row_offset,
                     std::int64_t k_len, std::int64_t m_tile = 192,
                     std::int64_t ksub = 64);

/// Mirror of pack_a: a row-major padded-k x n_tile panel of op(B) columns
/// [col_offset .. col_offset+n_tile).
Matrix<float> pack_b(MatrixView<const float> B, Op opB, std::int64_t col_offset,
                     std::int64_t k_len, std::int64_t n_tile = 256,
                     std::int64_t ksub = 64);

template <typename T>
ErrorReport compare(MatrixView<const T> test, MatrixView<const T> ref,
                    double norm_scale);

/// Element-wise precision conversion. Downcast rounds to nearest even,
/// upcast is exact.
template <typename To, typename From>
Matrix<To> cast(MatrixView<const From> m);

/// Max row sum of |op(M)|; used to build residue norm scales.
template <typename T>
double inf_norm(MatrixView<const T> M, Op op = Op::None);

/// Norm scale for the documented residue metric of a gemm instance:
///   K^(3/2) * (|alpha| * ||op(A)||_inf * ||op(B)||_inf + |beta| * ||C_in||_inf)
/// The sqrt(K) factor tracks the random-walk growth of rounding error in a
/// length-K accumulation.
double gemm_norm_scale(std::int64_t k, double alpha, double anorm,
                       double bnorm, double beta, double cnorm);

extern template void ref_gemm<float>(double, MatrixView<const float>, Op,
                                     MatrixView<const float>, Op, double,
                                     MatrixView<float>);
extern template void ref_gemm<double>(double, MatrixView<const double>, Op,
                                      MatrixView<const double>, Op, double,
                                      MatrixView<double>);
extern template ErrorReport compare<float>(MatrixView<const float>,
                                           MatrixView<const float>, double);
extern template ErrorReport compare<double>(MatrixView<const double>,
                                            MatrixView<const double>, double);
extern template Matrix<float> cast<float, double>(MatrixView<const double>);
extern template Matrix<double> cast<double, float>(MatrixView<const float>);
extern template double inf_norm<float>(MatrixView<const float>, Op);
extern template double inf_norm<double>(MatrixView<const double>, Op);

}  // namespace meshgemm
