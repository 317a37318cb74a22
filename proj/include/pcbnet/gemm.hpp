#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <vector>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define PCBNET_GEMM_AVX2 1
#endif

namespace pcbnet::detail {

enum class Trans : std::uint8_t { no, yes };

// C (m x n, leading dim ldc) = op(A) * op(B) + beta * C, with beta in {0, 1}.
// op(A) is m x k and op(B) is k x n; all matrices row-major.
//
// The float path packs panels and runs a 4x24 FMA microkernel; everything else
// falls back to a cache-blocked scalar loop. Both paths are deterministic:
// the accumulation order for a given (m, n, k) never changes.
template <typename T>
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

// ---------------------------------------------------------------------------

template <typename T>
inline T gemm_at(const T* p, std::size_t ld, Trans tr, std::size_t row, std::size_t col) {
  return tr == Trans::no ? p[row * ld + col] : p[col * ld + row];
}

template <typename T>
void gemm_scalar(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k,
                 const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
                 std::size_t ldc) {
  if (beta == T{0}) {
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(c + i * ldc, c + i * ldc + n, T{0});
    }
  }
  constexpr std::size_t kc_block = 128;
  if (trans_b == Trans::no) {
    // axpy form: inner loop streams a row of B and C.
    for (std::size_t pp = 0; pp < k; pp += kc_block) {
      const std::size_t pe = std::min(k, pp + kc_block);
      for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * ldc;
        for (std::size_t p = pp; p < pe; ++p) {
          const T av = gemm_at(a, lda, trans_a, i, p);
          const T* brow = b + p * ldb;
          for (std::size_t j = 0; j < n; ++j) {
            crow[j] += av * brow[j];
          }
        }
      }
    }
  } else {
    // dot form: rows of op(B) are columns of B, contiguous when transposed.
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        T acc{0};
        for (std::size_t p = 0; p < k; ++p) {
          acc += gemm_at(a, lda, trans_a, i, p) * b[j * ldb + p];
        }
        c[i * ldc + j] += acc;
      }
    }
  }
}

#if PCBNET_GEMM_AVX2

inline constexpr std::size_t kGemmMr = 4;
inline constexpr std::size_t kGemmNr = 24;
inline constexpr std::size_t kGemmMc = 64;
inline constexpr std::size_t kGemmKc = 256;
inline constexpr std::size_t kGemmNc = 1920;

// Packs an mr x kc block of op(A) as [kc][kGemmMr], zero-padded rows.
inline void pack_a_block(const float* a, std::size_t lda, Trans tr, std::size_t row0,
                         std::size_t mr, std::size_t col0, std::size_t kc, float* dst) {
  for (std::size_t p = 0; p < kc; ++p) {
    for (std::size_t r = 0; r < kGemmMr; ++r) {
      dst[p * kGemmMr + r] =
          r < mr ? gemm_at(a, lda, tr, row0 + r, col0 + p) : 0.0f;
    }
  }
}

// Packs a kc x nr block of op(B) as [kc][kGemmNr], zero-padded columns.
inline void pack_b_block(const float* b, std::size_t ldb, Trans tr, std::size_t row0,
                         std::size_t kc, std::size_t col0, std::size_t nr, float* dst) {
  if (tr == Trans::no && nr == kGemmNr) {
    for (std::size_t p = 0; p < kc; ++p) {
      const float* src = b + (row0 + p) * ldb + col0;
      std::copy(src, src + kGemmNr, dst + p * kGemmNr);
    }
    return;
  }
  for (std::size_t p = 0; p < kc; ++p) {
    for (std::size_t j = 0; j < kGemmNr; ++j) {
      dst[p * kGemmNr + j] = j < nr ? gemm_at(b, ldb, tr, row0 + p, col0 + j) : 0.0f;
    }
  }
}

// 4x24 FMA microkernel over packed panels; tails spill through a local tile.
inline void microkernel_4x24(std::size_t kc, const float* ap, const float* bp, float* c,
                             std::size_t ldc, std::size_t mr, std::size_t nr, bool accumulate) {
  __m256 acc[kGemmMr][3];
  for (auto& row : acc) {
    row[0] = _mm256_setzero_ps();
    row[1] = _mm256_setzero_ps();
    row[2] = _mm256_setzero_ps();
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256 b0 = _mm256_loadu_ps(bp);
    const __m256 b1 = _mm256_loadu_ps(bp + 8);
    const __m256 b2 = _mm256_loadu_ps(bp + 16);
    bp += kGemmNr;
    for (std::size_t r = 0; r < kGemmMr; ++r) {
      const __m256 av = _mm256_broadcast_ss(ap + r);
      acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
      acc[r][2] = _mm256_fmadd_ps(av, b2, acc[r][2]);
    }
    ap += kGemmMr;
  }
  if (mr == kGemmMr && nr == kGemmNr) {
    for (std::size_t r = 0; r < kGemmMr; ++r) {
      float* crow = c + r * ldc;
      if (accumulate) {
        acc[r][0] = _mm256_add_ps(acc[r][0], _mm256_loadu_ps(crow));
        acc[r][1] = _mm256_add_ps(acc[r][1], _mm256_loadu_ps(crow + 8));
        acc[r][2] = _mm256_add_ps(acc[r][2], _mm256_loadu_ps(crow + 16));
      }
      _mm256_storeu_ps(crow, acc[r][0]);
      _mm256_storeu_ps(crow + 8, acc[r][1]);
      _mm256_storeu_ps(crow + 16, acc[r][2]);
    }
    return;
  }
  alignas(32) float tile[kGemmMr * kGemmNr];
  for (std::size_t r = 0; r < kGemmMr; ++r) {
    _mm256_store_ps(tile + r * kGemmNr, acc[r][0]);
    _mm256_store_ps(tile + r * kGemmNr + 8, acc[r][1]);
    _mm256_store_ps(tile + r * kGemmNr + 16, acc[r][2]);
  }
  for (std::size_t r = 0; r < mr; ++r) {
    float* crow = c + r * ldc;
    for (std::size_t j = 0; j < nr; ++j) {
      crow[j] = accumulate ? crow[j] + tile[r * kGemmNr + j] : tile[r * kGemmNr + j];
    }
  }
}

inline void gemm_avx2(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k,
                      const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
                      float* c, std::size_t ldc) {
  thread_local std::vector<float> packed_a;
  thread_local std::vector<float> packed_b;
  packed_a.resize(kGemmMc * kGemmKc);
  packed_b.resize(kGemmKc * kGemmNc);

  if (beta == 0.0f && k == 0) {
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(c + i * ldc, c + i * ldc + n, 0.0f);
    }
    return;
  }

  for (std::size_t jc = 0; jc < n; jc += kGemmNc) {
    const std::size_t nc = std::min(kGemmNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kGemmKc) {
      const std::size_t kc = std::min(kGemmKc, k - pc);
      // First k-panel honours beta, later panels accumulate.
      const bool accumulate = (pc != 0) || (beta != 0.0f);
      for (std::size_t jr = 0; jr < nc; jr += kGemmNr) {
        const std::size_t nr = std::min(kGemmNr, nc - jr);
        pack_b_block(b, ldb, trans_b, pc, kc, jc + jr, nr,
                     packed_b.data() + (jr / kGemmNr) * kGemmKc * kGemmNr);
      }
      for (std::size_t ic = 0; ic < m; ic += kGemmMc) {
        const std::size_t mc = std::min(kGemmMc, m - ic);
        for (std::size_t ir = 0; ir < mc; ir += kGemmMr) {
          const std::size_t mr = std::min(kGemmMr, mc - ir);
          pack_a_block(a, lda, trans_a, ic + ir, mr, pc, kc,
                       packed_a.data() + (ir / kGemmMr) * kGemmKc * kGemmMr);
        }
        for (std::size_t jr = 0; jr < nc; jr += kGemmNr) {
          const std::size_t nr = std::min(kGemmNr, nc - jr);
          const float* bp = packed_b.data() + (jr / kGemmNr) * kGemmKc * kGemmNr;
          for (std::size_t ir = 0; ir < mc; ir += kGemmMr) {
            const std::size_t mr = std::min(kGemmMr, mc - ir);
            microkernel_4x24(kc, packed_a.data() + (ir / kGemmMr) * kGemmKc * kGemmMr, bp,
                             c + (ic + ir) * ldc + jc + jr, ldc, mr, nr, accumulate);
          }
        }
      }
    }
  }
}

#endif  // PCBNET_GEMM_AVX2

template <typename T>
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
  if (m == 0 || n == 0) {
    return;
  }
#if PCBNET_GEMM_AVX2
  if constexpr (std::is_same_v<T, float>) {
    if (m * n * k >= 32768) {
      gemm_avx2(trans_a, trans_b, m, n, k, a, lda, b, ldb, beta, c, ldc);
      return;
    }
  }
#endif
  gemm_scalar(trans_a, trans_b, m, n, k, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace pcbnet::detail
