#pragma once
// Binary container: "NAHM", u32 version, u64 LE (n_t, fourier_cut, rank, count),
// then little-endian (re, im) double pairs.
#include <cstdint>
#include <string>
#include <vector>

#include "nahm/kernel.hpp"

namespace nahm {

struct BinaryContainer {
  static constexpr std::uint32_t kVersion = 1;
  std::uint64_t n_t = 0, fourier_cut = 0, rank = 0, count = 0;
  std::vector<cplx> data;
};

void write_container(const std::string& path, const BinaryContainer& c);
BinaryContainer read_container(const std::string& path);

struct KernelCache {
  Discretization disc;
  Vec3 z = Vec3::Zero();
  Weight weight;
  std::vector<double> singular_values;
  std::vector<SpinorField> basis;
  int dim_ker = 0, dim_coker = 0;
};

// Writes <stem>.nahm and <stem>.json.
void save_kernel(const std::string& stem, const DiracOperator& op, const KernelResult& k);
KernelCache load_kernel(const std::string& stem);

}  // namespace nahm
