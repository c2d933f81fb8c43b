#include "fgaug/imageio/voc.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fstream>
#include <sstream>

#include "fgaug/errors.hpp"

namespace fgaug::imageio {

namespace pt = boost::property_tree;

ClassTable::ClassTable(std::vector<std::string> names) : names_(std::move(names)) {}

ClassTable ClassTable::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open class table");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line.empty()) continue;
    names.push_back(line);
  }
  return ClassTable(std::move(names));
}

void ClassTable::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  for (const auto& n : names_) os << n << '\n';
}

int ClassTable::id(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw ParseError("unknown class name '" + std::string(name) + "'");
}

namespace {

double read_coord(const pt::ptree& bndbox, const char* key, const std::string& where) {
  auto v = bndbox.get_optional<std::string>(key);
  if (!v) throw ParseError(where + ": bndbox missing <" + key + ">");
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    while (used < v->size() && std::isspace(static_cast<unsigned char>((*v)[used]))) ++used;
    if (used != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    throw ParseError(where + ": <" + key + "> is not a number: '" + *v + "'");
  }
}

}  // namespace

std::vector<GTBox> parse_voc_annotation(const std::string& document, const ClassTable& classes) {
  pt::ptree tree;
  try {
    std::istringstream is(document);
    pt::read_xml(is, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed annotation markup at line " + std::to_string(e.line()) + ": " +
                     e.message());
  }
  auto root = tree.get_child_optional("annotation");
  if (!root) throw ParseError("missing <annotation> root element");

  int width = 0, height = 0;
  if (auto size = root->get_child_optional("size")) {
    width = size->get<int>("width", 0);
    height = size->get<int>("height", 0);
  }

  std::vector<GTBox> boxes;
  int index = 0;
  for (const auto& [tag, node] : *root) {
    if (tag != "object") continue;
    const std::string where = "<object> #" + std::to_string(index++);
    auto name = node.get_optional<std::string>("name");
    if (!name) throw ParseError(where + ": missing <name>");
    GTBox b;
    try {
      b.class_id = classes.id(*name);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    b.difficult = node.get<std::string>("difficult", "0") == "1";
    auto bnd = node.get_child_optional("bndbox");
    if (!bnd) throw ParseError(where + " ('" + *name + "'): missing <bndbox>");
    b.xmin = read_coord(*bnd, "xmin", where);
    b.ymin = read_coord(*bnd, "ymin", where);
    b.xmax = read_coord(*bnd, "xmax", where);
    b.ymax = read_coord(*bnd, "ymax", where);
    if (!(b.xmin < b.xmax) || !(b.ymin < b.ymax)) {
      throw ParseError(where + " ('" + *name + "'): inverted coordinates");
    }
    if (b.xmin < 0 || b.ymin < 0 || (width > 0 && b.xmax > width) ||
        (height > 0 && b.ymax > height)) {
      throw ParseError(where + " ('" + *name + "'): box outside image bounds");
    }
    boxes.push_back(b);
  }
  return boxes;
}

std::string write_voc_annotation(const std::string& filename, int width, int height, int depth,
                                 const std::vector<GTBox>& boxes, const ClassTable& classes) {
  std::ostringstream os;
  os.precision(17);
  os << "<annotation>\n"
     << "  <filename>" << filename << "</filename>\n"
     << "  <size>\n"
     << "    <width>" << width << "</width>\n"
     << "    <height>" << height << "</height>\n"
     << "    <depth>" << depth << "</depth>\n"
     << "  </size>\n";
  for (const auto& b : boxes) {
    os << "  <object>\n"
       << "    <name>" << classes.name(b.class_id) << "</name>\n"
       << "    <difficult>" << (b.difficult ? 1 : 0) << "</difficult>\n"
       << "    <bndbox>\n"
       << "      <xmin>" << b.xmin << "</xmin>\n"
       << "      <ymin>" << b.ymin << "</ymin>\n"
       << "      <xmax>" << b.xmax << "</xmax>\n"
       << "      <ymax>" << b.ymax << "</ymax>\n"
       << "    </bndbox>\n"
       << "  </object>\n";
  }
  os << "</annotation>\n";
  return os.str();
}

}  // namespace fgaug::imageio
