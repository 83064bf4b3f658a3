#include "nahm/cache.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "nahm/errors.hpp"

namespace nahm {

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw FormatError("truncated container");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_container(const std::string& path, const BinaryContainer& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path);
  os.write("NAHM", 4);
  put_le<std::uint32_t>(os, BinaryContainer::kVersion);
  for (auto v : {c.n_t, c.fourier_cut, c.rank, c.count}) put_le<std::uint64_t>(os, v);
  for (const auto& z : c.data) {
    put_le<double>(os, z.real());
    put_le<double>(os, z.imag());
  }
  if (!os) throw FormatError("write failed for " + path);
}

BinaryContainer read_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "NAHM", 4) != 0) throw FormatError("bad magic in " + path);
  if (get_le<std::uint32_t>(is) != BinaryContainer::kVersion) throw FormatError("unsupported version");
  BinaryContainer c;
  c.n_t = get_le<std::uint64_t>(is);
  c.fourier_cut = get_le<std::uint64_t>(is);
  c.rank = get_le<std::uint64_t>(is);
  c.count = get_le<std::uint64_t>(is);
  // element count is implied by the file length
  while (is.peek() != std::char_traits<char>::eof()) {
    double re = get_le<double>(is);
    double im = get_le<double>(is);
    c.data.emplace_back(re, im);
  }
  return c;
}

void save_kernel(const std::string& stem, const DiracOperator& op, const KernelResult& k) {
  BinaryContainer c;
  c.n_t = op.disc.n_t;
  c.fourier_cut = op.disc.fourier_cut;
  c.rank = 4;
  c.count = k.basis.size();
  for (const auto& f : k.basis)
    for (Eigen::Index i = 0; i < f.values.size(); ++i) c.data.push_back(f.values[i]);
  write_container(stem + ".nahm", c);

  nlohmann::json j;
  j["z"] = {op.z_raw[0], op.z_raw[1], op.z_raw[2]};
  j["weight"] = {op.weight.minus, op.weight.plus};
  j["operator"] = op.which == Which::DStar ? "Dstar" : "D";
  j["grid"] = op.which == Which::DStar ? "nodes" : "midpoints";
  j["disc"] = {{"t_max", op.disc.t_max}, {"n_t", op.disc.n_t}, {"fourier_cut", op.disc.fourier_cut}, {"fd_order", op.disc.fd_order}};
  j["singular_values"] = k.singular_values;
  j["dim_ker"] = k.dim_ker;
  j["dim_coker"] = k.dim_coker;
  std::ofstream os(stem + ".json");
  os << j.dump(2) << "\n";
}

KernelCache load_kernel(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw FormatError("missing sidecar " + stem + ".json");
  nlohmann::json j = nlohmann::json::parse(js);
  KernelCache kc;
  kc.disc.t_max = j["disc"]["t_max"];
  kc.disc.n_t = j["disc"]["n_t"];
  kc.disc.fourier_cut = j["disc"]["fourier_cut"];
  kc.disc.fd_order = j["disc"]["fd_order"];
  for (int i = 0; i < 3; ++i) kc.z[i] = j["z"][i];
  kc.weight = {j["weight"][0], j["weight"][1]};
  kc.singular_values = j["singular_values"].get<std::vector<double>>();
  kc.dim_ker = j["dim_ker"];
  kc.dim_coker = j["dim_coker"];
  GridKind g = j["grid"] == "nodes" ? GridKind::nodes : GridKind::midpoints;

  BinaryContainer c = read_container(stem + ".nahm");
  if (c.n_t != static_cast<std::uint64_t>(kc.disc.n_t) || c.fourier_cut != static_cast<std::uint64_t>(kc.disc.fourier_cut))
    throw FormatError("container and sidecar disagree");
  SpinorField proto(kc.disc, g);
  auto len = static_cast<std::size_t>(proto.values.size());
  if (c.data.size() != len * c.count) throw FormatError("container length mismatch");
  for (std::uint64_t b = 0; b < c.count; ++b) {
    SpinorField f = proto;
    for (std::size_t i = 0; i < len; ++i) f.values[i] = c.data[b * len + i];
    kc.basis.push_back(std::move(f));
  }
  return kc;
}

}  // namespace nahm
