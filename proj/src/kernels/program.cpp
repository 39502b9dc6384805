#include <algorithm>
#include <bit>
#include <cstdlib>
#include <optional>
#include <stdexcept>

#include "fmcq/kernels.hpp"

namespace fmcq::kernels {

void Program::grow(std::ptrdiff_t delta) {
  depth_ += delta;
  if (depth_ < 1) throw std::logic_error("kernel program stack underflow");
  max_stack_ = std::max(max_stack_, static_cast<std::size_t>(depth_));
}

void Program::push_var(std::uint32_t var, bool negated) {
  code_.push_back({negated ? Op::kNotVar : Op::kVar, var});
  num_vars_ = std::max<std::size_t>(num_vars_, var + 1);
  grow(1);
}

void Program::push_const(bool value) {
  code_.push_back({value ? Op::kTrue : Op::kFalse, 0});
  grow(1);
}

void Program::negate() {
  if (depth_ < 1) throw std::logic_error("kernel program stack underflow");
  code_.push_back({Op::kNot, 0});
}

void Program::conjoin(std::uint32_t arity) {
  if (arity == 0) return push_const(true);
  if (depth_ < static_cast<std::ptrdiff_t>(arity)) throw std::logic_error("kernel program stack underflow");
  if (arity == 1) return;
  code_.push_back({Op::kAnd, arity});
  grow(1 - static_cast<std::ptrdiff_t>(arity));
}

void Program::disjoin(std::uint32_t arity) {
  if (arity == 0) return push_const(false);
  if (depth_ < static_cast<std::ptrdiff_t>(arity)) throw std::logic_error("kernel program stack underflow");
  if (arity == 1) return;
  code_.push_back({Op::kOr, arity});
  grow(1 - static_cast<std::ptrdiff_t>(arity));
}

void Program::finish() const {
  if (depth_ != 1) throw std::logic_error("kernel program must leave exactly one value");
}

std::string_view to_string(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::kScalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {
std::optional<Isa> forced;
}

Isa active_isa() {
  if (forced) return *forced;
  static const Isa detected = [] {
    const char* env = std::getenv("FMCQ_FORCE_SCALAR");
    if (env && *env && *env != '0') return Isa::kScalar;
    return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
  }();
  return detected;
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("ISA not available on this CPU");
  forced = isa;
}

void clear_forced_isa() { forced.reset(); }

void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out) {
  if (active_isa() == Isa::kAvx2)
    avx2::scan_blocks(p, first_block, nblocks, out);
  else
    scalar::scan_blocks(p, first_block, nblocks, out);
}

void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out) {
  if (active_isa() == Isa::kAvx2)
    avx2::eval_columns(p, columns, nwords, out);
  else
    scalar::eval_columns(p, columns, nwords, out);
}

std::vector<std::uint64_t> scan_space(const Program& p, unsigned num_vars) {
  if (num_vars > 40) throw std::invalid_argument("scan_space supports at most 40 variables");
  if (p.num_vars() > num_vars) throw std::invalid_argument("program uses more variables than the space");
  const std::uint64_t total = std::uint64_t{1} << num_vars;
  const std::size_t nblocks = static_cast<std::size_t>((total + 63) / 64);
  std::vector<std::uint64_t> out(nblocks);
  scan_blocks(p, 0, nblocks, out.data());
  if (total < 64) out[0] &= (std::uint64_t{1} << total) - 1;
  return out;
}

std::uint64_t count_space(const Program& p, unsigned num_vars) {
  if (p.num_vars() > num_vars) throw std::invalid_argument("program uses more variables than the space");
  const std::uint64_t total = std::uint64_t{1} << num_vars;
  if (total < 64) {
    std::uint64_t word = 0;
    scan_blocks(p, 0, 1, &word);
    return std::popcount(word & ((std::uint64_t{1} << total) - 1));
  }
  // Stream in chunks to keep memory flat for large spaces.
  constexpr std::size_t kChunk = 4096;
  std::vector<std::uint64_t> buf(kChunk);
  const std::uint64_t nblocks = total / 64;
  std::uint64_t count = 0;
  for (std::uint64_t b = 0; b < nblocks; b += kChunk) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, nblocks - b));
    scan_blocks(p, b, n, buf.data());
    for (std::size_t i = 0; i < n; ++i) count += std::popcount(buf[i]);
  }
  return count;
}

}  // namespace fmcq::kernels
