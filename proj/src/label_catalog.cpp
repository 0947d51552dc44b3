#include "flexq/label_catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "flexq/error.hpp"
#include "flexq/relation.hpp"
#include "flexq/text.hpp"

namespace flexq {

LabelCatalog::LabelCatalog(std::vector<LinguisticLabel> labels) {
  for (auto& label : labels) add(std::move(label));
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  });
}

}  // namespace

void LabelCatalog::add(LinguisticLabel label) {
  if (!is_identifier(label.attribute) || !is_identifier(label.name)) {
    throw SchemaError("label attribute and name must be identifiers, got '" + label.attribute +
                      "' / '" + label.name + "'");
  }
  if (find(label.attribute, label.name) != nullptr) {
    throw SchemaError("duplicate label " + label.key());
  }
  labels_.push_back(std::move(label));
}

const LinguisticLabel* LabelCatalog::find(std::string_view attribute,
                                          std::string_view name) const {
  for (const auto& label : labels_) {
    if (iequals(label.attribute, attribute) && iequals(label.name, name)) return &label;
  }
  return nullptr;
}

void LabelCatalog::check_against(const Relation& rel) const {
  for (const auto& label : labels_) {
    const Column* col = rel.find_column(label.attribute);
    if (col == nullptr) {
      throw SchemaError("label " + label.key() + " references missing attribute '" +
                        label.attribute + "'");
    }
    if (!col->numeric) {
      throw TypeError("label " + label.key() + " references non-numeric attribute '" +
                      label.attribute + "'");
    }
  }
}

namespace {

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

LabelCatalog parse_catalog(std::string_view text) {
  LabelCatalog catalog;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto fields = words(line);
    if (fields.size() < 3) {
      throw ParseError("expected 'attribute label shape parameters...'", line_no);
    }
    Shape shape{};
    try {
      shape = parse_shape(fields[2]);
    } catch (const ParameterError& e) {
      throw ParseError(e.what(), line_no, "shape");
    }
    std::vector<double> params;
    for (std::size_t i = 3; i < fields.size(); ++i) {
      auto v = parse_double(fields[i]);
      if (!v) {
        throw ParseError("parameter is not a number: '" + std::string(fields[i]) + "'", line_no,
                         "param" + std::to_string(i - 2));
      }
      params.push_back(*v);
    }
    try {
      catalog.add(LinguisticLabel{std::string(fields[0]), std::string(fields[1]),
                                  MembershipFunction(shape, std::move(params))});
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no, "parameters");
    }
  }
  return catalog;
}

LabelCatalog read_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str());
}

std::string format_catalog(const LabelCatalog& catalog) {
  std::string out = "# attribute\tlabel\tshape\tparameters\n";
  for (const auto& label : catalog.labels()) {
    out += label.attribute + "\t" + label.name + "\t" + std::string(to_string(label.fn.shape()));
    for (double p : label.fn.params()) out += "\t" + format_double(p);
    out += "\n";
  }
  return out;
}

}  // namespace flexq
