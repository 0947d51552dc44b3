#include "flexq/workspace.hpp"

#include <fstream>
#include <sstream>

#include "flexq/error.hpp"
#include "flexq/text.hpp"

namespace flexq {

namespace fs = std::filesystem;

Workspace::Workspace(fs::path dir) : dir_(std::move(dir)) {}

Relation Workspace::ingest(const fs::path& csv, const std::string& table,
                           const std::optional<std::string>& id_column) {
  Relation rel = read_csv_file(csv, table, id_column);
  fs::create_directories(dir_);
  fs::copy_file(csv, file("relation.csv"), fs::copy_options::overwrite_existing);
  std::ofstream meta(file("relation.meta"));
  meta << "table\t" << table << '\n';
  if (id_column) meta << "id_column\t" << *id_column << '\n';
  fs::remove(file("labels.cfg"));
  fs::remove(file("kb.tsv"));
  return rel;
}

Relation Workspace::relation() const {
  std::ifstream meta(file("relation.meta"));
  if (!meta || !fs::exists(file("relation.csv"))) {
    throw PipelineError("no dataset in workspace '" + dir_.string() + "'; run `ingest` first");
  }
  std::string table;
  std::optional<std::string> id_column;
  std::string line;
  while (std::getline(meta, line)) {
    auto fields = split(line, '\t');
    if (fields.size() != 2) continue;
    if (fields[0] == "table") table = std::string(fields[1]);
    if (fields[0] == "id_column") id_column = std::string(fields[1]);
  }
  return read_csv_file(file("relation.csv"), table, id_column);
}

LabelCatalog Workspace::set_labels(const fs::path& config) {
  Relation rel = relation();
  LabelCatalog catalog = read_catalog_file(config);
  catalog.check_against(rel);
  std::ofstream out(file("labels.cfg"));
  out << format_catalog(catalog);
  if (!out) throw Error("cannot write label catalog to workspace");
  fs::remove(file("kb.tsv"));
  return catalog;
}

LabelCatalog Workspace::labels() const {
  if (!fs::exists(file("labels.cfg"))) {
    throw PipelineError("no label catalog in workspace '" + dir_.string() + "'; run `labels` first");
  }
  return read_catalog_file(file("labels.cfg"));
}

KnowledgeBase Workspace::build(double threshold) {
  Relation rel = relation();
  LabelCatalog catalog = labels();
  KnowledgeBase kb = build_kb(rel, catalog, threshold);
  save_kb(kb, file("kb.tsv"));
  return kb;
}

KnowledgeBase Workspace::kb() const {
  if (!fs::exists(file("kb.tsv"))) {
    throw PipelineError("no knowledge base in workspace '" + dir_.string() + "'; run `build-kb` first");
  }
  return load_kb(file("kb.tsv"));
}

}  // namespace flexq
