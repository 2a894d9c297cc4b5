#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdt {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

struct Table {
  using Cell = std::variant<std::int64_t, double, std::string>;

  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  std::string to_csv() const;
  nlohmann::json to_json() const;  // array of records keyed by column
};

struct CsvData {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Column index; throws Error(config) naming the missing column.
  std::size_t column(const std::string& name) const;
};

CsvData read_csv(const std::string& path);

struct ArtifactMeta {
  std::string command;
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> seed;
};

/// Buffers artifacts in memory; commit() writes each one (via a temporary
/// file and rename) together with its `<name>.meta.json` sidecar. Nothing is
/// written if the command fails before commit.
class ArtifactWriter {
 public:
  ArtifactWriter(std::string dir, ArtifactMeta meta);

  void add_text(const std::string& name, std::string content);
  void add_json(const std::string& name, const nlohmann::json& j);
  /// `stem`.csv or `stem`.json depending on format ("csv" | "json").
  void add_table(const std::string& stem, const Table& t, const std::string& format);

  std::vector<std::string> commit();

 private:
  std::string dir_;
  ArtifactMeta meta_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace sdt
