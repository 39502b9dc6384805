#pragma once

// Bit-sliced evaluation of Boolean programs.
//
// A Program is a postfix instruction list over numbered variables. Kernels
// evaluate it for 64 assignments per machine word (scalar) or 256 per vector
// (AVX2). Two variable sources are supported:
//   - enumeration: assignment index i, variable v takes bit v of i;
//   - columns: variable v reads bit r of a packed column for row r.
// Both ISA variants must produce bit-identical output.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fmcq::kernels {

enum class Op : std::uint8_t { kVar, kNotVar, kTrue, kFalse, kNot, kAnd, kOr };

struct Instr {
  Op op;
  /// Variable index for kVar/kNotVar, operand count for kAnd/kOr.
  std::uint32_t arg;
};

class Program {
 public:
  void push_var(std::uint32_t var, bool negated = false);
  void push_const(bool value);
  void negate();
  void conjoin(std::uint32_t arity);
  void disjoin(std::uint32_t arity);

  /// Throws std::logic_error unless exactly one value remains on the stack.
  void finish() const;

  const std::vector<Instr>& code() const noexcept { return code_; }
  std::size_t num_vars() const noexcept { return num_vars_; }
  std::size_t max_stack() const noexcept { return max_stack_; }

 private:
  void grow(std::ptrdiff_t delta);

  std::vector<Instr> code_;
  std::size_t num_vars_ = 0;
  std::ptrdiff_t depth_ = 0;
  std::size_t max_stack_ = 0;
};

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);
bool isa_available(Isa isa);
/// Best available ISA unless overridden with force_isa() or FMCQ_FORCE_SCALAR=1.
Isa active_isa();
/// Test hook. Throws std::invalid_argument when the ISA is unavailable.
void force_isa(Isa isa);
void clear_forced_isa();

namespace scalar {
void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out);
void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out);
}  // namespace scalar

namespace avx2 {
void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out);
void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out);
}  // namespace avx2

/// Dispatching entry points.
void scan_blocks(const Program& p, std::uint64_t first_block, std::size_t nblocks, std::uint64_t* out);
void eval_columns(const Program& p, std::span<const std::uint64_t* const> columns, std::size_t nwords,
                  std::uint64_t* out);

/// Satisfying-assignment bitmap over all 2^num_vars indices (bits past the
/// end of the space are cleared). num_vars must be at most 40.
std::vector<std::uint64_t> scan_space(const Program& p, unsigned num_vars);

/// Number of satisfying assignments over 2^num_vars indices.
std::uint64_t count_space(const Program& p, unsigned num_vars);

}  // namespace fmcq::kernels
