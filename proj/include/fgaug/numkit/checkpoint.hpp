#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fgaug/numkit/layers.hpp"
#include "fgaug/numkit/tensor.hpp"

namespace fgaug::numkit {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Container layout: "MFK1", then per tensor: u32 name length, name bytes,
// u32 rank, u32 dims, raw f64 values. All integers little-endian.
void save_checkpoint(const std::filesystem::path& path, const std::vector<ParamRef>& params);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

// Copies checkpoint values into params by name. Throws LoadError on a
// missing name or a shape mismatch; extra entries are ignored.
void assign_checkpoint(const std::vector<NamedTensor>& entries, const std::vector<ParamRef>& params);

}  // namespace fgaug::numkit
