#include "fgaug/numkit/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "fgaug/errors.hpp"

namespace fgaug::numkit {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'F', 'K', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

bool read_u32(std::istream& is, std::uint32_t& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<ParamRef>& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os.write(kMagic, 4);
  for (const auto& p : params) {
    write_u32(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(os, static_cast<std::uint32_t>(p.tensor->shape.size()));
    for (auto d : p.tensor->shape) write_u32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(p.tensor->data.data()),
             static_cast<std::streamsize>(p.tensor->data.size() * sizeof(double)));
  }
  if (!os) throw IoError(path.string(), "write failed");
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open checkpoint");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path.string(), "bad checkpoint magic");
  }
  std::vector<NamedTensor> out;
  std::uint32_t name_len;
  while (read_u32(is, name_len)) {
    NamedTensor nt;
    nt.name.resize(name_len);
    std::uint32_t rank = 0;
    if (!is.read(nt.name.data(), name_len) || !read_u32(is, rank)) {
      throw IoError(path.string(), "truncated entry header");
    }
    Shape shape(rank);
    for (auto& d : shape) {
      std::uint32_t v;
      if (!read_u32(is, v) || v == 0) throw IoError(path.string(), "bad dims for " + nt.name);
      d = v;
    }
    std::vector<double> values(shape_numel(shape));
    if (!is.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(double)))) {
      throw IoError(path.string(), "truncated values for " + nt.name);
    }
    nt.tensor = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(nt));
  }
  return out;
}

void assign_checkpoint(const std::vector<NamedTensor>& entries,
                       const std::vector<ParamRef>& params) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e.tensor;
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw LoadError("checkpoint has no entry " + p.name);
    if (it->second->shape != p.tensor->shape) {
      throw LoadError("shape mismatch for " + p.name + ": checkpoint " +
                      shape_str(it->second->shape) + ", model " + shape_str(p.tensor->shape));
    }
    p.tensor->data = it->second->data;
  }
}

}  // namespace fgaug::numkit
