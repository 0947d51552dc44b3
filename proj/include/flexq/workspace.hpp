#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "flexq/knowledge_base.hpp"
#include "flexq/label_catalog.hpp"
#include "flexq/relation.hpp"

namespace flexq {

// On-disk state shared by successive CLI invocations:
//   relation.csv + relation.meta   after `ingest`
//   labels.cfg                     after `labels`
//   kb.tsv                         after `build-kb`
// Replacing an earlier step invalidates every later one.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  Relation ingest(const std::filesystem::path& csv, const std::string& table,
                  const std::optional<std::string>& id_column = std::nullopt);
  LabelCatalog set_labels(const std::filesystem::path& config);
  KnowledgeBase build(double threshold);

  // Each throws PipelineError when its step has not run yet.
  Relation relation() const;
  LabelCatalog labels() const;
  KnowledgeBase kb() const;

 private:
  std::filesystem::path file(const char* name) const { return dir_ / name; }

  std::filesystem::path dir_;
};

}  // namespace flexq
