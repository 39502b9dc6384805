// Compiled with -mavx2; only reached when the CPU reports AVX2 support.
#include <cstdint>
#include <vector>

#include "fmcq/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace fmcq::kernels::avx2 {

namespace {

constexpr std::uint64_t kLanePattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

__m256i run(const Program& p, const __m256i* vars, __m256i* stack) {
  const __m256i ones = _mm256_set1_epi64x(-1);
  std::size_t top = 0;
  for (const Instr& in : p.code()) {
    switch (in.op) {
      case Op::kVar: stack[top++] = vars[in.arg]; break;
      case Op::kNotVar: stack[top++] = _mm256_xor_si256(vars[in.arg], ones); break;
      case Op::kTrue: stack[top++] = ones; break;
      case Op::kFalse: stack[top++] = _mm256_setzero_si256(); break;
      case Op::kNot: stack[top - 1] = _mm256_xor_si256(stack[top - 1], ones); break;
      case Op::kAnd: {
        __m256i acc = stack[--top];
        for (std::uint32_t k = 1; k < in.arg; ++k) acc = _mm256_and_si256(acc, stack[--top]);
        stack[top++] = acc;
        break;
      }
      case Op::kOr: {
        __m256i acc = stack[--top];
        for (std::uint32_t k = 1; k < in.arg; ++k) acc = _mm256_or_si256(acc, stack[--top]);
        stack[top++] = acc;
        break;
      }
    }
  }
  return stack[0];
}

std::uint64_t high_var(std::uint64_t block, std::size_t v) {
  return ((block >> (v - 6)) & 1) ? ~std::uint64_t{0} : 0;
}

// Aligned scratch for vector registers; std::vector drops the type's alignment attributes.
struct Lanes {
  explicit Lanes(std::size_t n) : data(new __m256i[n == 0 ? 1 : n]) {}
  ~Lanes() { delete[] data; }
  Lanes(const Lanes&) = delete;
  Lanes& operator=(const Lanes&) = delete;
  __m256i& operator[](std::size_t i) { return data[i]; }
  __m256i* get() { return data; }
  __m256i* data;
};

}  // namespace

void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out) {
  const std::size_t nvars = p.num_vars();
  Lanes vars(nvars);
  Lanes stack(p.max_stack() + 1);
  for (std::size_t v = 0; v < nvars && v < 6; ++v)
    vars[v] = _mm256_set1_epi64x(static_cast<long long>(kLanePattern[v]));
  std::size_t b = 0;
  for (; b + 4 <= nblocks; b += 4) {
    const std::uint64_t block = first_block + b;
    for (std::size_t v = 6; v < nvars; ++v)
      vars[v] = _mm256_set_epi64x(static_cast<long long>(high_var(block + 3, v)),
                                  static_cast<long long>(high_var(block + 2, v)),
                                  static_cast<long long>(high_var(block + 1, v)),
                                  static_cast<long long>(high_var(block, v)));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + b), run(p, vars.get(), stack.get()));
  }
  if (b < nblocks) scalar::scan_blocks(p, first_block + b, nblocks - b, out + b);
}

void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out) {
  const std::size_t nvars = p.num_vars();
  Lanes vars(nvars);
  Lanes stack(p.max_stack() + 1);
  std::size_t w = 0;
  for (; w + 4 <= nwords; w += 4) {
    for (std::size_t v = 0; v < nvars; ++v)
      vars[v] = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(columns[v] + w));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + w), run(p, vars.get(), stack.get()));
  }
  if (w < nwords) {
    std::vector<const std::uint64_t*> tail(columns.size());
    for (std::size_t v = 0; v < columns.size(); ++v) tail[v] = columns[v] + w;
    scalar::eval_columns(p, tail, nwords - w, out + w);
  }
}

}  // namespace fmcq::kernels::avx2

#else

namespace fmcq::kernels::avx2 {

void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out) {
  scalar::scan_blocks(p, first_block, nblocks, out);
}

void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out) {
  scalar::eval_columns(p, columns, nwords, out);
}

}  // namespace fmcq::kernels::avx2

#endif
