#include "meshgemm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace meshgemm {

Op parse_op(char c) {
  switch (c) {
    case 'n': case 'N': return Op::None;
    case 't': case 'T': return Op::Trans;
    case 'c': case 'C': return Op::Conj;
    case 'h': case 'H': return Op::Herm;
    default:
      throw std::invalid_argument(std::string("unknown op flag: ") + c);
  }
}

namespace {

// Access helper that folds the transpose into the index math.
template <typename T>
struct Opped {
  MatrixView<const T> m;
  bool trans;
  std::int64_t rows() const { return trans ? m.cols : m.rows; }
  std::int64_t cols() const { return trans ? m.rows : m.cols; }
  const T& at(std::int64_t i, std::int64_t j) const {
    return trans ? m.at(j, i) : m.at(i, j);
  }
};

template <typename T>
Opped<T> opped(MatrixView<const T> m, Op op) {
  return {m, is_transposed(op)};
}

}  // namespace

template <typename T>
void ref_gemm(double alpha, MatrixView<const T> A, Op opA,
              MatrixView<const T> B, Op opB, double beta, MatrixView<T> C) {
  auto a = opped(A, opA);
  auto b = opped(B, opB);
  if (a.rows() != C.rows || b.cols() != C.cols || a.cols() != b.rows()) {
    throw std::invalid_argument("ref_gemm: dimension mismatch");
  }
  const std::int64_t K = a.cols();
  for (std::int64_t j = 0; j < C.cols; ++j) {
    for (std::int64_t i = 0; i < C.rows; ++i) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < K; ++k) {
        acc += static_cast<double>(a.at(i, k)) * static_cast<double>(b.at(k, j));
      }
      double out = alpha * acc;
      if (beta != 0.0) out += beta * static_cast<double>(C.at(i, j));
      C.at(i, j) = static_cast<T>(out);
    }
  }
}

Matrix<float> pack_a(MatrixView<const float> A, Op opA, std::int64_t row_offset,
                     std::int64_t k_len, std::int64_t m_tile,
                     std::int64_t ksub) {
  auto a = opped(A, opA);
  const std::int64_t padded_k = (k_len + ksub - 1) / ksub * ksub;
  Matrix<float> panel(m_tile, padded_k, Layout::ColMajor);  // zero-initialized
  const std::int64_t m_avail =
      std::clamp<std::int64_t>(a.rows() - row_offset, 0, m_tile);
  const std::int64_t k_avail = std::min(k_len, a.cols());
  for (std::int64_t k = 0; k < k_avail; ++k) {
    for (std::int64_t i = 0; i < m_avail; ++i) {
      panel.at(i, k) = a.at(row_offset + i, k);
    }
  }
  return panel;
}

Matrix<float> pack_b(MatrixView<const float> B, Op opB, std::int64_t col_offset,
                     std::int64_t k_len, std::int64_t n_tile,
                     std::int64_t ksub) {
  auto b = opped(B, opB);
  const std::int64_t padded_k = (k_len + ksub - 1) / ksub * ksub;
  Matrix<float> panel(padded_k, n_tile, Layout::RowMajor);
  const std::int64_t n_avail =
      std::clamp<std::int64_t>(b.cols() - col_offset, 0, n_tile);
  const std::int64_t k_avail = std::min(k_len, b.rows());
  for (std::int64_t k = 0; k < k_avail; ++k) {
    for (std::int64_t j = 0; j < n_avail; ++j) {
      panel.at(k, j) = b.at(k, col_offset + j);
    }
  }
  return panel;
}

template <typename T>
ErrorReport compare(MatrixView<const T> test, MatrixView<const T> ref,
                    double norm_scale) {
  if (test.rows != ref.rows || test.cols != ref.cols) {
    throw std::invalid_argument("compare: shape mismatch");
  }
  ErrorReport rep;
  double ref_max = 0.0;
  for (std::int64_t j = 0; j < ref.cols; ++j) {
    for (std::int64_t i = 0; i < ref.rows; ++i) {
      ref_max = std::max(ref_max, std::abs(static_cast<double>(ref.at(i, j))));
    }
  }
  const double denom = std::max(ref_max, kRelErrFloor);
  double sum = 0.0;
  double max_abs = 0.0;
  const std::int64_t n = test.rows * test.cols;
  for (std::int64_t j = 0; j < test.cols; ++j) {
    for (std::int64_t i = 0; i < test.rows; ++i) {
      const double t = static_cast<double>(test.at(i, j));
      const double r = static_cast<double>(ref.at(i, j));
      const double abs_err = std::abs(t - r);
      max_abs = std::max(max_abs, abs_err);
      const double rel = abs_err / denom;
      sum += rel;
      rep.max_rel_err = std::max(rep.max_rel_err, rel);
    }
  }
  rep.mean_rel_err = n > 0 ? sum / static_cast<double>(n) : 0.0;
  rep.normalized_residue = max_abs / (norm_scale * kEpsSingle);
  return rep;
}

template <typename To, typename From>
Matrix<To> cast(MatrixView<const From> m) {
  Matrix<To> out(m.rows, m.cols, Layout::ColMajor);
  for (std::int64_t j = 0; j < m.cols; ++j) {
    for (std::int64_t i = 0; i < m.rows; ++i) {
      out.at(i, j) = static_cast<To>(m.at(i, j));
    }
  }
  return out;
}

template <typename T>
double inf_norm(MatrixView<const T> M, Op op) {
  auto m = opped(M, op);
  double best = 0.0;
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::int64_t j = 0; j < m.cols(); ++j) {
      row += std::abs(static_cast<double>(m.at(i, j)));
    }
    best = std::max(best, row);
  }
  return best;
}

double gemm_norm_scale(std::int64_t k, double alpha, double anorm,
                       double bnorm, double beta, double cnorm) {
  const double kk = static_cast<double>(std::max<std::int64_t>(k, 1));
  return kk * std::sqrt(kk) *
         (std::abs(alpha) * anorm * bnorm + std::abs(beta) * cnorm);
}

template void ref_gemm<float>(double, MatrixView<const float>, Op,
                              MatrixView<const float>, Op, double,
                              MatrixView<float>);
template void ref_gemm<double>(double, MatrixView<const double>, Op,
                               MatrixView<const double>, Op, double,
                               MatrixView<double>);
template ErrorReport compare<float>(MatrixView<const float>,
                                    MatrixView<const float>, double);
template ErrorReport compare<double>(MatrixView<const double>,
                                     MatrixView<const double>, double);
template Matrix<float> cast<float, double>(MatrixView<const double>);
template Matrix<double> cast<double, float>(MatrixView<const float>);
template double inf_norm<float>(MatrixView<const float>, Op);
template double inf_norm<double>(MatrixView<const double>, Op);

}  // namespace meshgemm
