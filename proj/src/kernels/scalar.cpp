#include <cstdint>
#include <vector>

#include "fmcq/kernels.hpp"

namespace fmcq::kernels::scalar {

namespace {

constexpr std::uint64_t kLanePattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

std::uint64_t run(const Program& p, const std::uint64_t* vars, std::uint64_t* stack) {
  std::size_t top = 0;
  for (const Instr& in : p.code()) {
    switch (in.op) {
      case Op::kVar: stack[top++] = vars[in.arg]; break;
      case Op::kNotVar: stack[top++] = ~vars[in.arg]; break;
      case Op::kTrue: stack[top++] = ~std::uint64_t{0}; break;
      case Op::kFalse: stack[top++] = 0; break;
      case Op::kNot: stack[top - 1] = ~stack[top - 1]; break;
      case Op::kAnd: {
        std::uint64_t acc = stack[--top];
        for (std::uint32_t k = 1; k < in.arg; ++k) acc &= stack[--top];
        stack[top++] = acc;
        break;
      }
      case Op::kOr: {
        std::uint64_t acc = stack[--top];
        for (std::uint32_t k = 1; k < in.arg; ++k) acc |= stack[--top];
        stack[top++] = acc;
        break;
      }
    }
  }
  return stack[0];
}

}  // namespace

void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out) {
  std::vector<std::uint64_t> vars(p.num_vars());
  std::vector<std::uint64_t> stack(p.max_stack() + 1);
  for (std::size_t v = 0; v < vars.size() && v < 6; ++v) vars[v] = kLanePattern[v];
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::uint64_t block = first_block + b;
    for (std::size_t v = 6; v < vars.size(); ++v) vars[v] = ((block >> (v - 6)) & 1) ? ~std::uint64_t{0} : 0;
    out[b] = run(p, vars.data(), stack.data());
  }
}

void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out) {
  std::vector<std::uint64_t> vars(p.num_vars());
  std::vector<std::uint64_t> stack(p.max_stack() + 1);
  for (std::size_t w = 0; w < nwords; ++w) {
    for (std::size_t v = 0; v < vars.size(); ++v) vars[v] = columns[v][w];
    out[w] = run(p, vars.data(), stack.data());
  }
}

}  // namespace fmcq::kernels::scalar
