#include "core/output.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/config.hpp"
#include "core/error.hpp"

namespace sdt {

namespace fs = std::filesystem;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void Table::add(std::vector<Cell> row) {
  require(row.size() == columns.size(), "table row width does not match the header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string s;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) s += ',';
    s += columns[i];
  }
  s += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) s += format_number(v);
            else if constexpr (std::is_same_v<T, std::string>) s += v;
            else s += std::to_string(v);
          },
          row[i]);
    }
    s += '\n';
  }
  return s;
}

nlohmann::json Table::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json rec = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { rec[columns[i]] = v; }, row[i]);
    }
    arr.push_back(std::move(rec));
  }
  return arr;
}

std::size_t CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  fail(ErrorKind::config, "CSV is missing column '" + name + "'");
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open '" + path + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  CsvData d;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::config, "'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  d.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != d.columns.size()) {
      fail(ErrorKind::config, path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(d.columns.size()) + " fields");
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

ArtifactWriter::ArtifactWriter(std::string dir, ArtifactMeta meta)
    : dir_(std::move(dir)), meta_(std::move(meta)) {}

void ArtifactWriter::add_text(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

void ArtifactWriter::add_json(const std::string& name, const nlohmann::json& j) {
  add_text(name, j.dump(2) + "\n");
}

void ArtifactWriter::add_table(const std::string& stem, const Table& t, const std::string& format) {
  if (format == "json") add_json(stem + ".json", t.to_json());
  else add_text(stem + ".csv", t.to_csv());
}

std::vector<std::string> ArtifactWriter::commit() {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir_ + "': " + ec.message());

  auto write = [](const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << content;
      if (!out) fail(ErrorKind::io, "cannot write '" + tmp.string() + "'");
    }
    std::error_code err;
    fs::rename(tmp, target, err);
    if (err) fail(ErrorKind::io, "cannot move '" + tmp.string() + "' into place: " + err.message());
  };

  std::vector<std::string> paths;
  for (const auto& [name, content] : files_) {
    const fs::path target = fs::path(dir_) / name;
    nlohmann::json meta = {
        {"artifact", name},
        {"command", meta_.command},
        {"config_hash", hash_hex(meta_.config_hash)},
        {"seed", meta_.seed ? nlohmann::json(*meta_.seed) : nlohmann::json(nullptr)},
        {"tool_version", SDT_VERSION_STRING},
    };
    write(target, content);
    write(target.string() + ".meta.json", meta.dump(2) + "\n");
    paths.push_back(target.string());
  }
  files_.clear();
  return paths;
}

}  // namespace sdt
