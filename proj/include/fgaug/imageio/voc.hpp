#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fgaug/imageio/image.hpp"

namespace fgaug::imageio {

class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<std::string> names);

  // One class name per line; line index is the class id.
  static ClassTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Throws ParseError for an unknown name.
  int id(std::string_view name) const;
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

std::vector<GTBox> parse_voc_annotation(const std::string& document, const ClassTable& classes);

std::string write_voc_annotation(const std::string& filename, int width, int height, int depth,
                                 const std::vector<GTBox>& boxes, const ClassTable& classes);

}  // namespace fgaug::imageio
