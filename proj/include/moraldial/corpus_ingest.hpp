#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "moraldial/types.hpp"

namespace moraldial {

/// Maps canonical field names onto the column names of an upstream release,
/// plus the textual label vocabularies used in that release.
///
/// MIC fields: id?, question, answer, rot | (judgment, action), rot_id?,
/// revised_answer?, alignment, consensus, severity, foundations, split.
/// Social-Chem fields: id?, judgment, action, situation?, consensus, pressure.
struct ColumnMap {
  char delimiter = ',';
  std::map<std::string, std::string> columns;
  std::map<std::string, std::string> alignment_labels;
  std::map<std::string, int> consensus_labels;
  std::map<std::string, int> severity_labels;
  std::map<std::string, std::string> split_labels;
  // Social-Chem action pressure is signed; records keep its magnitude.
  bool pressure_magnitude = true;

  static ColumnMap mic_default();
  static ColumnMap social_chem_default();
  /// Overlays the keys present in a JSON column-map document onto `base`.
  static ColumnMap from_json(const nlohmann::json& j, ColumnMap base);
  static ColumnMap load(const std::filesystem::path& path, ColumnMap base);

  std::optional<std::string> column_for(const std::string& field) const;
};

struct Rejection {
  std::string source;
  std::size_t line = 0;
  std::vector<std::string> reasons;
};

void to_json(nlohmann::json& j, const Rejection& r);

template <typename T>
struct IngestResult {
  std::vector<T> records;
  std::vector<Rejection> rejections;
};

/// Splits a one-sentence RoT into (judgment, action) so that
/// `judgment + " " + action` reproduces the sentence without its final period.
std::pair<std::string, std::string> split_rot_text(std::string_view rot);

/// Stable RoT id derived from the normalized RoT sentence.
std::string rot_id_for_text(std::string_view rot);

IngestResult<MetaSample> load_meta_samples(const std::filesystem::path& path,
                                           const ColumnMap& schema = ColumnMap::mic_default());

IngestResult<RoTRecord> load_socialchem_rots(
    const std::filesystem::path& path, const ColumnMap& schema = ColumnMap::social_chem_default());

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate_record(const RoTRecord& r);
ValidationResult validate_record(const MetaSample& s);

/// Appends rejections to a JSONL sidecar.
void append_rejections(const std::filesystem::path& path, const std::vector<Rejection>& rejections);

}  // namespace moraldial
